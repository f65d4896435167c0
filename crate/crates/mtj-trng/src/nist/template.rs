// SPDX-License-Identifier: Apache-2.0

//! Non-overlapping and overlapping template matching tests.

use super::{igamc, require, NistError};

/// All aperiodic `m`-bit templates in lexicographic order. A template is
/// aperiodic when no proper prefix equals the suffix of the same length.
pub fn aperiodic_templates(m: usize) -> Vec<Vec<bool>> {
    assert!((1..=24).contains(&m), "template length out of range");
    (0u32..1 << m)
        .map(|v| (0..m).rev().map(|i| v >> i & 1 == 1).collect::<Vec<bool>>())
        .filter(|t| (1..m).all(|s| t[..m - s] != t[s..]))
        .collect()
}

/// Non-overlapping template test over `n_blocks` blocks.
pub fn non_overlapping_template(
    bits: &[bool],
    template: &[bool],
    n_blocks: usize,
) -> Result<f64, NistError> {
    let m = template.len();
    if m == 0 || n_blocks == 0 {
        return Err(NistError::InvalidParameter("empty template or no blocks"));
    }
    require("NonOverlappingTemplate", bits.len(), n_blocks * m)?;
    let block_len = bits.len() / n_blocks;
    let mu = (block_len - m + 1) as f64 / 2f64.powi(m as i32);
    let var = block_len as f64
        * (1.0 / 2f64.powi(m as i32) - (2 * m - 1) as f64 / 2f64.powi(2 * m as i32));
    let chi2: f64 = bits
        .chunks_exact(block_len)
        .take(n_blocks)
        .map(|block| {
            let mut w = 0usize;
            let mut i = 0;
            while i + m <= block_len {
                if block[i..i + m] == *template {
                    w += 1;
                    i += m;
                } else {
                    i += 1;
                }
            }
            (w as f64 - mu).powi(2) / var
        })
        .sum();
    Ok(igamc(n_blocks as f64 / 2.0, chi2 / 2.0))
}

/// Corrected class probabilities for m = 9, M = 1032, K = 5.
pub const OVERLAPPING_PI_9_1032: [f64; 6] =
    [0.364091, 0.185659, 0.139381, 0.100571, 0.070432, 0.139865];

/// Class probabilities for `K + 1` classes of overlapping hit counts. The
/// standard parameters use the exact tabulated values; otherwise the
/// compound-Poisson approximation.
pub fn overlapping_probabilities(m: usize, block_len: usize, k: usize) -> Vec<f64> {
    if (m, block_len, k) == (9, 1032, 5) {
        return OVERLAPPING_PI_9_1032.to_vec();
    }
    approximate_overlapping_probabilities(m, block_len, k)
}

/// Compound-Poisson approximation of the overlapping hit-count classes.
pub fn approximate_overlapping_probabilities(m: usize, block_len: usize, k: usize) -> Vec<f64> {
    let lambda = (block_len - m + 1) as f64 / 2f64.powi(m as i32);
    let eta = lambda / 2.0;
    let mut pi = Vec::with_capacity(k + 1);
    pi.push((-eta).exp());
    for u in 1..k {
        // exp(-eta) / 2^u * sum_{l=1..u} C(u-1, l-1) eta^l / l!
        let mut sum = 0.0;
        let mut binom = 1.0;
        let mut term = 1.0;
        for l in 1..=u {
            if l > 1 {
                binom *= (u - l + 1) as f64 / (l - 1) as f64;
            }
            term *= eta / l as f64;
            sum += binom * term;
        }
        pi.push((-eta).exp() / 2f64.powi(u as i32) * sum);
    }
    pi.push(1.0 - pi.iter().sum::<f64>());
    pi
}

/// Overlapping template test with the all-ones template of length `m`.
pub fn overlapping_template(
    bits: &[bool],
    m: usize,
    block_len: usize,
    k: usize,
) -> Result<f64, NistError> {
    overlapping_template_with_probabilities(
        bits,
        m,
        block_len,
        &overlapping_probabilities(m, block_len, k),
    )
}

/// Overlapping template test with explicit class probabilities; `pi.len()`
/// is `K + 1`.
pub fn overlapping_template_with_probabilities(
    bits: &[bool],
    m: usize,
    block_len: usize,
    pi: &[f64],
) -> Result<f64, NistError> {
    if m == 0 || block_len < m || pi.len() < 2 {
        return Err(NistError::InvalidParameter(
            "need 0 < m <= block length and K > 0",
        ));
    }
    let k = pi.len() - 1;
    require("OverlappingTemplate", bits.len(), block_len)?;
    let mut counts = vec![0usize; k + 1];
    for block in bits.chunks_exact(block_len) {
        let hits = block.windows(m).filter(|w| w.iter().all(|&b| b)).count();
        counts[hits.min(k)] += 1;
    }
    let n = (bits.len() / block_len) as f64;
    let chi2: f64 = pi
        .iter()
        .zip(&counts)
        .map(|(&p, &v)| (v as f64 - n * p).powi(2) / (n * p))
        .sum();
    Ok(igamc(k as f64 / 2.0, chi2 / 2.0))
}
