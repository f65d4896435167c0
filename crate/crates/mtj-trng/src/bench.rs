// SPDX-License-Identifier: Apache-2.0

//! Option-pricing benchmark driver over backends and path counts.

use std::io::Write;

use mtj_trng_core::system::{bench_entry, speedup_report, BenchRow, BenchSetup};
use mtj_trng_core::BackendKind;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{io_err, Result};

/// Flat CSV/JSON record.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRecord {
    pub backend: &'static str,
    pub n_paths: u64,
    pub price: f64,
    pub stderr: f64,
    pub instructions: f64,
    pub runtime_s: f64,
    pub ratio_vs_trng: f64,
    pub speedup_vs_trng: f64,
}

impl From<&BenchRow> for BenchRecord {
    fn from(r: &BenchRow) -> Self {
        Self {
            backend: r.entry.backend.name(),
            n_paths: r.entry.n_paths,
            price: r.entry.price,
            stderr: r.entry.stderr,
            instructions: r.entry.instructions,
            runtime_s: r.entry.runtime_s,
            ratio_vs_trng: r.ratio_vs_trng,
            speedup_vs_trng: r.speedup_vs_trng,
        }
    }
}

/// Price with every backend at every path count. Rows are ordered by path
/// count, then backend.
pub fn run_bench(setup: &BenchSetup, grid: &[u64], seed: u64) -> Result<Vec<BenchRecord>> {
    setup.validate()?;
    let jobs: Vec<(u64, BackendKind)> = grid
        .iter()
        .flat_map(|&n| BackendKind::ALL.into_iter().map(move |k| (n, k)))
        .collect();
    let entries = jobs
        .par_iter()
        .map(|&(n, k)| bench_entry(setup, k, n, seed))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(speedup_report(&entries)
        .iter()
        .map(BenchRecord::from)
        .collect())
}

pub fn write_csv<W: Write>(out: W, records: &[BenchRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush().map_err(io_err("<csv>"))?;
    Ok(())
}
