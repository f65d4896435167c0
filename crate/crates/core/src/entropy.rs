// SPDX-License-Identifier: Apache-2.0

//! Marginal entropy estimators over an observed bit sequence.

use crate::markov::{binary_entropy, binary_min_entropy, mean_variance_inflation};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct EntropyReport {
    pub shannon: f64,
    pub min_entropy: f64,
    pub n_bits: usize,
    pub p_one: f64,
}

impl EntropyReport {
    pub fn of(bits: &[bool]) -> Self {
        let p_one = ones_fraction(bits);
        Self {
            shannon: binary_entropy(p_one),
            min_entropy: binary_min_entropy(p_one),
            n_bits: bits.len(),
            p_one,
        }
    }
}

/// Observed fraction of ones; 0 for an empty slice.
pub fn ones_fraction(bits: &[bool]) -> f64 {
    if bits.is_empty() {
        return 0.0;
    }
    bits.iter().filter(|&&b| b).count() as f64 / bits.len() as f64
}

pub fn shannon_entropy(bits: &[bool]) -> f64 {
    binary_entropy(ones_fraction(bits))
}

pub fn min_entropy(bits: &[bool]) -> f64 {
    binary_min_entropy(ones_fraction(bits))
}

/// Half-widths of the `z`-sigma sampling band of the entropy estimates for
/// `n_bits` from a source with 1-probability `p` and lag-1 autocorrelation
/// `lag1`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct EntropyBand {
    pub shannon: f64,
    pub min_entropy: f64,
}

pub fn sampling_band(p: f64, n_bits: usize, lag1: f64, z: f64) -> EntropyBand {
    let lag = lag1.clamp(-0.999_999, 0.999_999);
    let sigma = libm::sqrt(p * (1.0 - p) * mean_variance_inflation(lag) / n_bits as f64);
    let lo = (p - z * sigma).max(0.0);
    let hi = (p + z * sigma).min(1.0);
    // Entropy is unimodal in p, so the extremes over [lo, hi] sit at the
    // ends or at 1/2.
    let widest = |f: fn(f64) -> f64| {
        let centre = f(p);
        let mut pts = [lo, hi, p];
        if lo <= 0.5 && 0.5 <= hi {
            pts[2] = 0.5;
        }
        pts.iter()
            .map(|&x| libm::fabs(f(x) - centre))
            .fold(0.0, f64::max)
    };
    EntropyBand {
        shannon: widest(binary_entropy),
        min_entropy: widest(binary_min_entropy),
    }
}
