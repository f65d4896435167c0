// SPDX-License-Identifier: Apache-2.0

//! Linear complexity test.

use super::{igamc, require, NistError};

/// Length of the shortest LFSR generating `s` (Berlekamp–Massey over GF(2)).
pub fn berlekamp_massey(s: &[bool]) -> usize {
    let n = s.len();
    let mut c = vec![false; n + 1];
    let mut b = vec![false; n + 1];
    c[0] = true;
    b[0] = true;
    let (mut l, mut m) = (0usize, -1isize);
    for i in 0..n {
        let d = (1..=l).fold(s[i], |acc, j| acc ^ (c[j] & s[i - j]));
        if d {
            let t = c.clone();
            let shift = (i as isize - m) as usize;
            for j in 0..=n - shift {
                c[j + shift] ^= b[j];
            }
            if 2 * l <= i {
                l = i + 1 - l;
                m = i as isize;
                b = t;
            }
        }
    }
    l
}

// First class as in the reference implementation (the exact value is 1/96);
// the published p-values were produced with it.
const PI: [f64; 7] = [0.01047, 0.03125, 0.125, 0.5, 0.25, 0.0625, 0.020833];

pub fn linear_complexity(bits: &[bool], block_len: usize) -> Result<f64, NistError> {
    if block_len == 0 {
        return Err(NistError::InvalidParameter("block length must be > 0"));
    }
    require("LinearComplexity", bits.len(), block_len)?;
    let mf = block_len as f64;
    let sign = if block_len.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    };
    // (-1)^(M+1) = -sign
    let mu = mf / 2.0 + (9.0 - sign) / 36.0 - (mf / 3.0 + 2.0 / 9.0) / 2f64.powf(mf);
    let mut counts = [0usize; 7];
    for block in bits.chunks_exact(block_len) {
        let t = sign * (berlekamp_massey(block) as f64 - mu) + 2.0 / 9.0;
        let class = match t {
            t if t <= -2.5 => 0,
            t if t <= -1.5 => 1,
            t if t <= -0.5 => 2,
            t if t <= 0.5 => 3,
            t if t <= 1.5 => 4,
            t if t <= 2.5 => 5,
            _ => 6,
        };
        counts[class] += 1;
    }
    let n = (bits.len() / block_len) as f64;
    let chi2: f64 = counts
        .iter()
        .zip(PI)
        .map(|(&v, p)| (v as f64 - n * p).powi(2) / (n * p))
        .sum();
    Ok(igamc(3.0, chi2 / 2.0))
}
