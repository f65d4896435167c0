// SPDX-License-Identifier: Apache-2.0

//! Binary matrix rank test.

use super::{igamc, require, NistError};

/// Rank over GF(2) of a matrix whose rows are the low `cols` bits of `rows`.
pub fn gf2_rank(rows: &mut [u64], cols: usize) -> usize {
    let mut rank = 0;
    for c in (0..cols).rev() {
        let bit = 1u64 << c;
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r] & bit != 0) else {
            continue;
        };
        rows.swap(rank, pivot);
        let p = rows[rank];
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && *row & bit != 0 {
                *row ^= p;
            }
        }
        rank += 1;
    }
    rank
}

/// Probability that a random `m × q` binary matrix has rank `r`.
pub fn rank_probability(r: usize, m: usize, q: usize) -> f64 {
    let exponent = (r * (q + m - r)) as f64 - (m * q) as f64;
    let mut prod = 1.0;
    for i in 0..r {
        let i = i as f64;
        prod *= (1.0 - 2f64.powf(i - q as f64)) * (1.0 - 2f64.powf(i - m as f64))
            / (1.0 - 2f64.powf(i - r as f64));
    }
    2f64.powf(exponent) * prod
}

/// Rank test on consecutive `m × q` matrices filled row by row.
pub fn rank(bits: &[bool], m: usize, q: usize) -> Result<f64, NistError> {
    let full = m.min(q);
    let p_full = rank_probability(full, m, q);
    let p_minus = rank_probability(full.saturating_sub(1), m, q);
    rank_with_probabilities(bits, m, q, [p_full, p_minus, 1.0 - p_full - p_minus])
}

/// Rank test with explicit class probabilities for full rank, one below
/// full rank, and the remainder.
pub fn rank_with_probabilities(
    bits: &[bool],
    m: usize,
    q: usize,
    pi: [f64; 3],
) -> Result<f64, NistError> {
    if m == 0 || q == 0 || q > 64 {
        return Err(NistError::InvalidParameter(
            "matrix size must be 1..=64 columns",
        ));
    }
    require("Rank", bits.len(), m * q)?;
    let full = m.min(q);
    let mut counts = [0usize; 3];
    let mut rows = vec![0u64; m];
    for block in bits.chunks_exact(m * q) {
        for (row, chunk) in rows.iter_mut().zip(block.chunks_exact(q)) {
            *row = chunk.iter().fold(0, |acc, &b| (acc << 1) | u64::from(b));
        }
        match gf2_rank(&mut rows, q) {
            r if r == full => counts[0] += 1,
            r if r + 1 == full => counts[1] += 1,
            _ => counts[2] += 1,
        }
    }
    let n = (bits.len() / (m * q)) as f64;
    let chi2: f64 = counts
        .iter()
        .zip(pi)
        .map(|(&f, p)| (f as f64 - n * p).powi(2) / (n * p))
        .sum();
    Ok(igamc(1.0, chi2 / 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nist::tests::bits;

    #[test]
    fn probabilities_for_32() {
        assert!((rank_probability(32, 32, 32) - 0.288_788_095_1).abs() < 1e-9);
        assert!((rank_probability(31, 32, 32) - 0.577_576_190_3).abs() < 1e-9);
    }

    #[test]
    fn small_rank() {
        let mut m = vec![0b010, 0b110, 0b100];
        assert_eq!(gf2_rank(&mut m, 3), 2);
        let mut id = vec![0b100, 0b010, 0b001];
        assert_eq!(gf2_rank(&mut id, 3), 3);
    }

    #[test]
    fn small_example() {
        // The published 3 x 3 example scores its counts against the 32 x 32
        // class probabilities, rounded to four places.
        let pi32 = [0.2888, 0.5776, 0.1336];
        let b = bits("01011001001010101101");
        let p = rank_with_probabilities(&b, 3, 3, pi32).unwrap();
        assert!((p - 0.741948).abs() < 1e-6, "{p}");
        // Scored against the exact 3 x 3 probabilities instead.
        assert!((rank(&b, 3, 3).unwrap() - 0.820_961_6).abs() < 1e-6);
    }
}
