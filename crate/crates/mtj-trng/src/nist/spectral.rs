// SPDX-License-Identifier: Apache-2.0

//! Discrete Fourier transform (spectral) test.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::{erfc, require, NistError};

pub fn spectral(bits: &[bool]) -> Result<f64, NistError> {
    require("FFT", bits.len(), 2)?;
    let n = bits.len();
    let mut x: Vec<Complex<f64>> = bits
        .iter()
        .map(|&b| Complex::new(if b { 1.0 } else { -1.0 }, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut x);
    let nf = n as f64;
    let threshold = ((1.0f64 / 0.05).ln() * nf).sqrt();
    let n0 = 0.95 * nf / 2.0;
    let n1 = x[..n / 2].iter().filter(|c| c.norm() < threshold).count() as f64;
    let d = (n1 - n0) / (nf * 0.95 * 0.05 / 4.0).sqrt();
    Ok(erfc(d.abs() / std::f64::consts::SQRT_2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nist::tests::bits;

    #[test]
    fn small_example() {
        // Every one of the five moduli (0, 2, 4.47, 2, 4.47) is below
        // T = 5.4733, so N1 = 5 and d = 0.7255.
        let p = spectral(&bits("1001010011")).unwrap();
        assert!((p - 0.468_159_91).abs() < 1e-6, "{p}");
    }
}
