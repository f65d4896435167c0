// SPDX-License-Identifier: Apache-2.0

//! Frequency, block frequency, cumulative sums, runs and longest run.

use super::{erfc, igamc, normal_cdf, require, NistError};

/// Frequency (monobit) test.
pub fn frequency(bits: &[bool]) -> Result<f64, NistError> {
    require("Frequency", bits.len(), 1)?;
    let n = bits.len() as f64;
    let s: i64 = bits.iter().map(|&b| if b { 1 } else { -1 }).sum();
    Ok(erfc(
        s.unsigned_abs() as f64 / n.sqrt() / std::f64::consts::SQRT_2,
    ))
}

/// Frequency test within blocks of `m` bits.
pub fn block_frequency(bits: &[bool], m: usize) -> Result<f64, NistError> {
    if m == 0 {
        return Err(NistError::InvalidParameter("block length must be > 0"));
    }
    require("BlockFrequency", bits.len(), m)?;
    let blocks = bits.len() / m;
    let chi2: f64 = bits
        .chunks_exact(m)
        .map(|b| {
            let pi = b.iter().filter(|&&x| x).count() as f64 / m as f64;
            (pi - 0.5).powi(2)
        })
        .sum::<f64>()
        * 4.0
        * m as f64;
    Ok(igamc(blocks as f64 / 2.0, chi2 / 2.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CusumMode {
    Forward,
    Reverse,
}

/// Cumulative sums test.
pub fn cumulative_sums(bits: &[bool], mode: CusumMode) -> Result<f64, NistError> {
    require("CumulativeSums", bits.len(), 1)?;
    let step = |&b: &bool| if b { 1i64 } else { -1 };
    let mut s = 0i64;
    let mut z = 0u64;
    let mut visit = |x: i64| {
        s += x;
        z = z.max(s.unsigned_abs());
    };
    match mode {
        CusumMode::Forward => bits.iter().map(step).for_each(&mut visit),
        CusumMode::Reverse => bits.iter().rev().map(step).for_each(&mut visit),
    }
    let n = bits.len() as f64;
    let z = z as f64;
    let sqrt_n = n.sqrt();
    // Summation bounds truncate toward zero, as in the reference code.
    let mut sum1 = 0.0;
    let mut k = ((-n / z + 1.0) / 4.0) as i64;
    while k as f64 <= (n / z - 1.0) / 4.0 {
        let k4 = 4.0 * k as f64;
        sum1 += normal_cdf((k4 + 1.0) * z / sqrt_n) - normal_cdf((k4 - 1.0) * z / sqrt_n);
        k += 1;
    }
    let mut sum2 = 0.0;
    let mut k = ((-n / z - 3.0) / 4.0) as i64;
    while k as f64 <= (n / z - 1.0) / 4.0 {
        let k4 = 4.0 * k as f64;
        sum2 += normal_cdf((k4 + 3.0) * z / sqrt_n) - normal_cdf((k4 + 1.0) * z / sqrt_n);
        k += 1;
    }
    Ok((1.0 - sum1 + sum2).clamp(0.0, 1.0))
}

/// Runs test. Returns 0 when the frequency prerequisite fails.
pub fn runs(bits: &[bool]) -> Result<f64, NistError> {
    require("Runs", bits.len(), 2)?;
    let n = bits.len() as f64;
    let pi = bits.iter().filter(|&&b| b).count() as f64 / n;
    if (pi - 0.5).abs() >= 2.0 / n.sqrt() {
        return Ok(0.0);
    }
    let v = 1 + bits.windows(2).filter(|w| w[0] != w[1]).count();
    let q = pi * (1.0 - pi);
    Ok(erfc(
        (v as f64 - 2.0 * n * q).abs() / (2.0 * (2.0 * n).sqrt() * q),
    ))
}

struct LongestRunTable {
    m: usize,
    /// Run length mapped to the first class.
    v0: usize,
    pi: &'static [f64],
}

const LONGEST_RUN_8: LongestRunTable = LongestRunTable {
    m: 8,
    v0: 1,
    pi: &[0.21484375, 0.3671875, 0.23046875, 0.1875],
};
const LONGEST_RUN_128: LongestRunTable = LongestRunTable {
    m: 128,
    v0: 4,
    pi: &[
        0.1174035788,
        0.242955959,
        0.249363483,
        0.17517706,
        0.102701071,
        0.112398847,
    ],
};
const LONGEST_RUN_10000: LongestRunTable = LongestRunTable {
    m: 10_000,
    v0: 10,
    pi: &[0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727],
};

/// Longest run of ones in a block. Block size follows the input length.
pub fn longest_run(bits: &[bool]) -> Result<f64, NistError> {
    require("LongestRun", bits.len(), 128)?;
    let t = match bits.len() {
        n if n < 6272 => &LONGEST_RUN_8,
        n if n < 750_000 => &LONGEST_RUN_128,
        _ => &LONGEST_RUN_10000,
    };
    let k = t.pi.len() - 1;
    let mut counts = vec![0usize; k + 1];
    for block in bits.chunks_exact(t.m) {
        let (mut run, mut longest) = (0usize, 0usize);
        for &b in block {
            run = if b { run + 1 } else { 0 };
            longest = longest.max(run);
        }
        counts[longest.clamp(t.v0, t.v0 + k) - t.v0] += 1;
    }
    let n_blocks = (bits.len() / t.m) as f64;
    let chi2: f64 = counts
        .iter()
        .zip(t.pi)
        .map(|(&v, &p)| (v as f64 - n_blocks * p).powi(2) / (n_blocks * p))
        .sum();
    Ok(igamc(k as f64 / 2.0, chi2 / 2.0))
}
