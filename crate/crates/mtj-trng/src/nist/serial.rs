// SPDX-License-Identifier: Apache-2.0

//! Approximate entropy and serial tests. Both count overlapping `m`-bit
//! patterns with the sequence wrapped around its end.

use super::{igamc, require, NistError};

/// Frequencies of every `m`-bit pattern, indexed by its value (first bit most
/// significant).
fn pattern_counts(bits: &[bool], m: usize) -> Vec<u64> {
    let mut counts = vec![0u64; 1 << m];
    if m == 0 {
        counts[0] = bits.len() as u64;
        return counts;
    }
    let mask = (1usize << m) - 1;
    let n = bits.len();
    let mut v = 0usize;
    for &b in bits.iter().chain(bits.iter()).take(m - 1) {
        v = (v << 1) | usize::from(b);
    }
    for i in 0..n {
        v = ((v << 1) | usize::from(bits[(i + m - 1) % n])) & mask;
        counts[v] += 1;
    }
    counts
}

fn phi(bits: &[bool], m: usize) -> f64 {
    let n = bits.len() as f64;
    pattern_counts(bits, m)
        .into_iter()
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            p * p.ln()
        })
        .sum()
}

pub fn approximate_entropy(bits: &[bool], m: usize) -> Result<f64, NistError> {
    if m == 0 || m > 24 {
        return Err(NistError::InvalidParameter(
            "block length must be in 1..=24",
        ));
    }
    require("ApproximateEntropy", bits.len(), m + 1)?;
    let n = bits.len() as f64;
    let ap_en = phi(bits, m) - phi(bits, m + 1);
    let chi2 = 2.0 * n * (std::f64::consts::LN_2 - ap_en);
    Ok(igamc(2f64.powi(m as i32 - 1), chi2 / 2.0))
}

fn psi2(bits: &[bool], m: usize) -> f64 {
    if m == 0 {
        return 0.0;
    }
    let n = bits.len() as f64;
    let sum: f64 = pattern_counts(bits, m)
        .into_iter()
        .map(|c| (c as f64).powi(2))
        .sum();
    sum * 2f64.powi(m as i32) / n - n
}

/// Serial test; returns the two p-values.
pub fn serial(bits: &[bool], m: usize) -> Result<(f64, f64), NistError> {
    if !(2..=24).contains(&m) {
        return Err(NistError::InvalidParameter(
            "block length must be in 2..=24",
        ));
    }
    require("Serial", bits.len(), m)?;
    let (a, b, c) = (psi2(bits, m), psi2(bits, m - 1), psi2(bits, m - 2));
    let d1 = a - b;
    let d2 = a - 2.0 * b + c;
    Ok((
        igamc(2f64.powi(m as i32 - 2), d1 / 2.0),
        igamc(2f64.powi(m as i32 - 3), d2 / 2.0),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nist::tests::bits;

    #[test]
    fn counts_wrap_around() {
        assert_eq!(
            pattern_counts(&bits("0011011101"), 3),
            [0, 1, 1, 2, 1, 2, 2, 1]
        );
    }

    #[test]
    fn approximate_entropy_small() {
        let p = approximate_entropy(&bits("0100110101"), 3).unwrap();
        assert!((p - 0.261961).abs() < 1e-6, "{p}");
    }

    #[test]
    fn serial_small() {
        let (p1, p2) = serial(&bits("0011011101"), 3).unwrap();
        assert!((p1 - 0.808792).abs() < 1e-6, "{p1}");
        assert!((p2 - 0.670320).abs() < 1e-6, "{p2}");
    }
}
