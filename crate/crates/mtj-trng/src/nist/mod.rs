// SPDX-License-Identifier: Apache-2.0

//! NIST SP 800-22 rev. 1a statistical tests and a grouped test battery.
//!
//! The input is split into equal groups. Every test yields one p-value per
//! group (148 per group for the non-overlapping template test). A row passes
//! when the uniformity p-value of its group p-values exceeds
//! [`SuiteParams::composite_threshold`] and the fraction of group p-values at
//! or above [`SuiteParams::group_alpha`] reaches [`SuiteParams::pass_rate`].

mod frequency;
mod linear;
mod rank;
mod serial;
mod spectral;
mod template;

use std::fmt::{self, Write as _};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use frequency::{block_frequency, cumulative_sums, frequency, longest_run, runs, CusumMode};
pub use linear::{berlekamp_massey, linear_complexity};
pub use rank::{gf2_rank, rank, rank_probability, rank_with_probabilities};
pub use serial::{approximate_entropy, serial};
pub use spectral::spectral;
pub use template::{
    aperiodic_templates, approximate_overlapping_probabilities, non_overlapping_template,
    overlapping_probabilities, overlapping_template, overlapping_template_with_probabilities,
    OVERLAPPING_PI_9_1032,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NistError {
    #[error("{test} needs at least {needed} bits, got {got}")]
    TooShort {
        test: &'static str,
        needed: usize,
        got: usize,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("{n_bits} bits cannot be split into {n_groups} equal groups")]
    UnevenGroups { n_bits: usize, n_groups: usize },
}

pub(crate) fn require(test: &'static str, got: usize, needed: usize) -> Result<(), NistError> {
    if got < needed {
        Err(NistError::TooShort { test, needed, got })
    } else {
        Ok(())
    }
}

pub(crate) fn erfc(x: f64) -> f64 {
    statrs::function::erf::erfc(x)
}

pub(crate) fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Regularized upper incomplete gamma function Q(a, x), extended to x = 0.
pub(crate) fn igamc(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else if x.is_infinite() {
        0.0
    } else {
        statrs::function::gamma::gamma_ur(a, x)
    }
}

/// Uniformity of p-values: chi-square over ten equal-width bins.
pub fn uniformity_p_value(p_values: &[f64]) -> f64 {
    let mut bins = [0usize; 10];
    for &p in p_values {
        bins[((p * 10.0) as usize).min(9)] += 1;
    }
    let expected = p_values.len() as f64 / 10.0;
    let chi2: f64 = bins
        .iter()
        .map(|&f| (f as f64 - expected).powi(2) / expected)
        .sum();
    igamc(4.5, chi2 / 2.0)
}

/// Per-test parameters for one group, sized for 10^5-bit groups.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SuiteParams {
    pub block_frequency_m: usize,
    pub rank_rows: usize,
    pub rank_cols: usize,
    pub non_overlapping_m: usize,
    pub non_overlapping_blocks: usize,
    pub overlapping_m: usize,
    pub overlapping_block: usize,
    pub overlapping_k: usize,
    pub approximate_entropy_m: usize,
    pub serial_m: usize,
    pub linear_complexity_m: usize,
    /// Group-level significance for the pass rate.
    pub group_alpha: f64,
    /// Minimum uniformity p-value.
    pub composite_threshold: f64,
    /// Minimum fraction of passing groups.
    pub pass_rate: f64,
}

impl Default for SuiteParams {
    fn default() -> Self {
        Self {
            block_frequency_m: 128,
            rank_rows: 32,
            rank_cols: 32,
            non_overlapping_m: 9,
            non_overlapping_blocks: 8,
            overlapping_m: 9,
            overlapping_block: 1032,
            overlapping_k: 5,
            approximate_entropy_m: 10,
            serial_m: 13,
            linear_complexity_m: 500,
            group_alpha: 0.01,
            composite_threshold: 0.0001,
            pass_rate: 0.91,
        }
    }
}

/// One row of the report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Row {
    Frequency,
    BlockFrequency,
    CumulativeSumsForward,
    CumulativeSumsReverse,
    Runs,
    LongestRun,
    Rank,
    Fft,
    NonOverlappingTemplate,
    OverlappingTemplate,
    ApproximateEntropy,
    Serial1,
    Serial2,
    LinearComplexity,
}

impl Row {
    pub const ALL: [Row; 14] = [
        Row::Frequency,
        Row::BlockFrequency,
        Row::CumulativeSumsForward,
        Row::CumulativeSumsReverse,
        Row::Runs,
        Row::LongestRun,
        Row::Rank,
        Row::Fft,
        Row::NonOverlappingTemplate,
        Row::OverlappingTemplate,
        Row::ApproximateEntropy,
        Row::Serial1,
        Row::Serial2,
        Row::LinearComplexity,
    ];

    pub fn module(self) -> &'static str {
        match self {
            Row::Frequency => "Frequency",
            Row::BlockFrequency => "BlockFrequency",
            Row::CumulativeSumsForward | Row::CumulativeSumsReverse => "CumulativeSums",
            Row::Runs => "Runs",
            Row::LongestRun => "LongestRun",
            Row::Rank => "Rank",
            Row::Fft => "FFT",
            Row::NonOverlappingTemplate => "NonOverlappingTemplate",
            Row::OverlappingTemplate => "OverlappingTemplate",
            Row::ApproximateEntropy => "ApproximateEntropy",
            Row::Serial1 | Row::Serial2 => "Serial",
            Row::LinearComplexity => "LinearComplexity",
        }
    }

    pub fn variant(self) -> Option<&'static str> {
        match self {
            Row::CumulativeSumsForward => Some("Forward"),
            Row::CumulativeSumsReverse => Some("Reverse"),
            Row::Serial1 => Some("P-value 1"),
            Row::Serial2 => Some("P-value 2"),
            _ => None,
        }
    }

    pub fn label(self) -> String {
        match self.variant() {
            Some(v) => format!("{} ({v})", self.module()),
            None => self.module().to_string(),
        }
    }

    /// Smallest group length for which the test is run.
    pub fn min_bits(self, p: &SuiteParams) -> usize {
        match self {
            Row::Frequency
            | Row::BlockFrequency
            | Row::CumulativeSumsForward
            | Row::CumulativeSumsReverse
            | Row::Runs => 100,
            Row::LongestRun => 128,
            Row::Rank => 38 * p.rank_rows * p.rank_cols,
            Row::Fft => 1000,
            Row::NonOverlappingTemplate => p.non_overlapping_blocks * p.non_overlapping_m * 2,
            Row::OverlappingTemplate => {
                // At least five expected hits in the rarest class.
                let pi = overlapping_probabilities(
                    p.overlapping_m,
                    p.overlapping_block,
                    p.overlapping_k,
                );
                let rarest = pi.iter().copied().fold(f64::INFINITY, f64::min);
                (5.0 / rarest).ceil() as usize * p.overlapping_block
            }
            Row::ApproximateEntropy => 1 << (p.approximate_entropy_m + 6),
            Row::Serial1 | Row::Serial2 => 1 << (p.serial_m + 3),
            Row::LinearComplexity => 200 * p.linear_complexity_m,
        }
    }
}

impl fmt::Display for Row {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Skipped,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "Pass",
            Verdict::Fail => "Fail",
            Verdict::Skipped => "Skipped",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestResult {
    pub row: Row,
    pub module: &'static str,
    pub variant: Option<&'static str>,
    /// Uniformity p-value over all group p-values.
    pub p_value: Option<f64>,
    pub group_p_values: Vec<f64>,
    pub pass_count: usize,
    pub total: usize,
    pub pass_rate: f64,
    pub verdict: Verdict,
}

/// All group p-values of every row for one group.
fn group_p_values(bits: &[bool], p: &SuiteParams, templates: &[Vec<bool>]) -> Vec<Vec<f64>> {
    let n = bits.len();
    let one = |r: Result<f64, NistError>| r.map(|v| vec![v]).unwrap_or_default();
    let serial = (n >= Row::Serial1.min_bits(p))
        .then(|| serial(bits, p.serial_m).ok())
        .flatten();
    Row::ALL
        .iter()
        .map(|&row| {
            if n < row.min_bits(p) {
                return Vec::new();
            }
            match row {
                Row::Frequency => one(frequency(bits)),
                Row::BlockFrequency => one(block_frequency(bits, p.block_frequency_m)),
                Row::CumulativeSumsForward => one(cumulative_sums(bits, CusumMode::Forward)),
                Row::CumulativeSumsReverse => one(cumulative_sums(bits, CusumMode::Reverse)),
                Row::Runs => one(runs(bits)),
                Row::LongestRun => one(longest_run(bits)),
                Row::Rank => one(rank(bits, p.rank_rows, p.rank_cols)),
                Row::Fft => one(spectral(bits)),
                Row::NonOverlappingTemplate => templates
                    .iter()
                    .filter_map(|t| {
                        non_overlapping_template(bits, t, p.non_overlapping_blocks).ok()
                    })
                    .collect(),
                Row::OverlappingTemplate => one(overlapping_template(
                    bits,
                    p.overlapping_m,
                    p.overlapping_block,
                    p.overlapping_k,
                )),
                Row::ApproximateEntropy => one(approximate_entropy(bits, p.approximate_entropy_m)),
                Row::Serial1 => serial.map(|s| vec![s.0]).unwrap_or_default(),
                Row::Serial2 => serial.map(|s| vec![s.1]).unwrap_or_default(),
                Row::LinearComplexity => one(linear_complexity(bits, p.linear_complexity_m)),
            }
        })
        .collect()
}

/// Run every row over `n_groups` equal groups of `bits`.
pub fn run_nist_suite(
    bits: &[bool],
    n_groups: usize,
    params: &SuiteParams,
) -> Result<Vec<TestResult>, NistError> {
    if n_groups == 0 || bits.is_empty() || !bits.len().is_multiple_of(n_groups) {
        return Err(NistError::UnevenGroups {
            n_bits: bits.len(),
            n_groups,
        });
    }
    let group_len = bits.len() / n_groups;
    let templates = aperiodic_templates(params.non_overlapping_m);
    let per_group: Vec<Vec<Vec<f64>>> = bits
        .par_chunks_exact(group_len)
        .map(|g| group_p_values(g, params, &templates))
        .collect();
    Ok(Row::ALL
        .iter()
        .enumerate()
        .map(|(i, &row)| {
            let ps: Vec<f64> = per_group
                .iter()
                .flat_map(|g| g[i].iter().copied())
                .collect();
            summarize(row, ps, params)
        })
        .collect())
}

fn summarize(row: Row, ps: Vec<f64>, params: &SuiteParams) -> TestResult {
    let total = ps.len();
    let pass_count = ps.iter().filter(|&&p| p >= params.group_alpha).count();
    let (p_value, pass_rate, verdict) = if total == 0 {
        (None, 0.0, Verdict::Skipped)
    } else {
        let composite = uniformity_p_value(&ps);
        let rate = pass_count as f64 / total as f64;
        let ok = composite > params.composite_threshold && rate >= params.pass_rate;
        (
            Some(composite),
            rate,
            if ok { Verdict::Pass } else { Verdict::Fail },
        )
    };
    TestResult {
        row,
        module: row.module(),
        variant: row.variant(),
        p_value,
        group_p_values: ps,
        pass_count,
        total,
        pass_rate,
        verdict,
    }
}

/// Human-readable table: module, uniformity p-value, pass rate, verdict.
pub fn text_report(results: &[TestResult]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<36} {:>10} {:>11}  Pass/Fail",
        "Test module", "P-value", "Pass rate"
    );
    let _ = writeln!(out, "{}", "-".repeat(70));
    for r in results {
        let p = r
            .p_value
            .map_or_else(|| "-".to_string(), |p| format!("{p:.6}"));
        let rate = format!("{}/{}", r.pass_count, r.total);
        let _ = writeln!(
            out,
            "{:<36} {:>10} {:>11}  {}",
            r.row.label(),
            p,
            rate,
            r.verdict
        );
    }
    out
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn bits(s: &str) -> Vec<bool> {
        s.bytes()
            .filter(|c| !c.is_ascii_whitespace())
            .map(|c| c == b'1')
            .collect()
    }

    #[test]
    fn uniformity_of_even_spread() {
        let ps: Vec<f64> = (0..100).map(|i| (i as f64 + 0.5) / 100.0).collect();
        assert_eq!(uniformity_p_value(&ps), 1.0);
        assert!(uniformity_p_value(&[0.001; 10]) < 1e-4);
    }

    #[test]
    fn igamc_edges() {
        assert_eq!(igamc(2.0, 0.0), 1.0);
        assert_eq!(igamc(2.0, f64::INFINITY), 0.0);
        assert!((igamc(1.0, 1.0) - (-1.0f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn uneven_groups_rejected() {
        assert!(run_nist_suite(&[true; 11], 10, &SuiteParams::default()).is_err());
        assert!(run_nist_suite(&[], 1, &SuiteParams::default()).is_err());
    }

    #[test]
    fn short_groups_skip_long_tests() {
        let b: Vec<bool> = (0..2000u32)
            .map(|i| i.wrapping_mul(2_654_435_761) >> 31 == 1)
            .collect();
        let r = run_nist_suite(&b, 2, &SuiteParams::default()).unwrap();
        let verdict = |row| r.iter().find(|t| t.row == row).unwrap().verdict;
        assert_eq!(verdict(Row::Rank), Verdict::Skipped);
        assert_eq!(verdict(Row::LinearComplexity), Verdict::Skipped);
        assert_ne!(verdict(Row::Frequency), Verdict::Skipped);
    }

    #[test]
    fn minimums_fit_default_groups() {
        let p = SuiteParams::default();
        for row in Row::ALL {
            assert!(row.min_bits(&p) <= 100_000, "{row}");
        }
    }
}
