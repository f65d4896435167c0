// SPDX-License-Identifier: Apache-2.0

//! Processor-side model: the `rand` / `frand.s` / `frand.d` instruction
//! semantics, an analytical instruction-count model, and a Monte Carlo
//! European option pricer with pluggable uniform sources.

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use libm::{cos, erfc, exp, log, sqrt};
use rand::Rng;

use crate::device::Environment;
use crate::error::{check, Error};
use crate::rng::{mix64, substream, SimRng};
use crate::trng::{Generator, GeneratorConfig, Variant};
use crate::Result;

/// A stream of raw random bits.
pub trait BitSource {
    fn next_bit(&mut self) -> Result<bool>;
}

impl BitSource for Generator {
    fn next_bit(&mut self) -> Result<bool> {
        Ok(Generator::next_bit(self))
    }
}

/// Replays a finite bit sequence.
#[derive(Debug, Clone)]
pub struct SliceSource<'a> {
    bits: &'a [bool],
    pos: usize,
}

impl<'a> SliceSource<'a> {
    pub fn new(bits: &'a [bool]) -> Self {
        Self { bits, pos: 0 }
    }

    pub fn remaining(&self) -> usize {
        self.bits.len() - self.pos
    }
}

impl BitSource for SliceSource<'_> {
    fn next_bit(&mut self) -> Result<bool> {
        let b = *self.bits.get(self.pos).ok_or(Error::SourceExhausted)?;
        self.pos += 1;
        Ok(b)
    }
}

/// Ideal fair bits from a seeded ChaCha stream.
#[derive(Debug, Clone)]
pub struct FairSource(SimRng);

impl FairSource {
    pub fn new(seed: u64) -> Self {
        Self(substream(seed, &[u64::from_le_bytes(*b"fair\0\0\0\0")]))
    }
}

impl BitSource for FairSource {
    fn next_bit(&mut self) -> Result<bool> {
        Ok(self.0.random())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(rename_all = "snake_case")
)]
pub enum BackendKind {
    TrngInstruction,
    SoftwareStdlib,
    SoftwareBoostLagFib,
}

impl BackendKind {
    pub const ALL: [BackendKind; 3] = [
        BackendKind::TrngInstruction,
        BackendKind::SoftwareStdlib,
        BackendKind::SoftwareBoostLagFib,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BackendKind::TrngInstruction => "trng",
            BackendKind::SoftwareStdlib => "stdlib",
            BackendKind::SoftwareBoostLagFib => "boost-lagfib1279",
        }
    }
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Per-call instruction costs of a random number backend.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(deny_unknown_fields)
)]
pub struct RngBackend {
    pub kind: BackendKind,
    pub instructions_per_u15: f64,
    pub instructions_per_double: f64,
    /// Issue-to-result latency of the TRNG instruction.
    pub latency_cycles: u32,
}

impl RngBackend {
    pub const fn trng() -> Self {
        Self {
            kind: BackendKind::TrngInstruction,
            instructions_per_u15: 1.0,
            instructions_per_double: 1.0,
            latency_cycles: 8,
        }
    }

    /// `rand()`; one call yields one double, so both costs match.
    pub const fn stdlib() -> Self {
        Self {
            kind: BackendKind::SoftwareStdlib,
            instructions_per_u15: 23.14,
            instructions_per_double: 23.14,
            latency_cycles: 0,
        }
    }

    pub const fn boost_lagfib() -> Self {
        Self {
            kind: BackendKind::SoftwareBoostLagFib,
            instructions_per_u15: 77.5,
            instructions_per_double: 77.5,
            latency_cycles: 0,
        }
    }

    pub fn of_kind(kind: BackendKind) -> Self {
        match kind {
            BackendKind::TrngInstruction => Self::trng(),
            BackendKind::SoftwareStdlib => Self::stdlib(),
            BackendKind::SoftwareBoostLagFib => Self::boost_lagfib(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        check(
            self.instructions_per_u15.is_finite() && self.instructions_per_u15 > 0.0,
            "instructions_per_u15",
            "must be finite and > 0",
        )?;
        check(
            self.instructions_per_double.is_finite() && self.instructions_per_double > 0.0,
            "instructions_per_double",
            "must be finite and > 0",
        )?;
        if self.kind == BackendKind::TrngInstruction {
            check(
                self.instructions_per_u15 == 1.0 && self.instructions_per_double == 1.0,
                "instructions_per_double",
                "a TRNG instruction is one instruction",
            )?;
            check(self.latency_cycles >= 1, "latency_cycles", "must be >= 1")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(deny_unknown_fields, default)
)]
pub struct PipelineConfig {
    pub frequency_hz: f64,
    pub ipc: f64,
    /// Pre-charge, read and write phases of the in-core TRNG.
    pub relaxed_phases_ns: [f64; 3],
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            frequency_hz: 2e9,
            ipc: 1.0,
            relaxed_phases_ns: [0.5, 0.5, 3.0],
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self, trng: &RngBackend) -> Result<()> {
        check(
            self.frequency_hz.is_finite() && self.frequency_hz > 0.0,
            "frequency_hz",
            "must be finite and > 0",
        )?;
        check(
            self.ipc.is_finite() && self.ipc > 0.0,
            "ipc",
            "must be finite and > 0",
        )?;
        check(
            self.relaxed_phases_ns
                .iter()
                .all(|t| t.is_finite() && *t >= 0.0),
            "relaxed_phases_ns",
            "must be finite and >= 0",
        )?;
        let generation_ns: f64 = self.relaxed_phases_ns.iter().sum();
        let latency_ns = f64::from(trng.latency_cycles) / self.frequency_hz * 1e9;
        check(
            generation_ns <= latency_ns * (1.0 + 1e-12),
            "relaxed_phases_ns",
            "generation must fit in the instruction latency",
        )
    }

    pub fn runtime_s(&self, instructions: f64) -> f64 {
        instructions / (self.ipc * self.frequency_hz)
    }
}

/// Instruction-count model of the pricing kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(deny_unknown_fields, default)
)]
pub struct CostModel {
    pub per_path_work: f64,
    pub fixed_overhead: f64,
}

impl Default for CostModel {
    fn default() -> Self {
        Self {
            per_path_work: 16.0,
            fixed_overhead: 20_000.0,
        }
    }
}

impl CostModel {
    pub fn validate(&self) -> Result<()> {
        check(
            self.per_path_work.is_finite() && self.per_path_work >= 0.0,
            "per_path_work",
            "must be finite and >= 0",
        )?;
        check(
            self.fixed_overhead.is_finite() && self.fixed_overhead >= 0.0,
            "fixed_overhead",
            "must be finite and >= 0",
        )
    }

    /// Two uniforms per path.
    pub fn instruction_count(&self, backend: &RngBackend, n_paths: u64) -> f64 {
        self.fixed_overhead
            + n_paths as f64 * (self.per_path_work + 2.0 * backend.instructions_per_double)
    }

    /// Large-`n` limit of the instruction ratio of `backend` over `baseline`.
    pub fn asymptotic_ratio(&self, backend: &RngBackend, baseline: &RngBackend) -> f64 {
        (self.per_path_work + 2.0 * backend.instructions_per_double)
            / (self.per_path_work + 2.0 * baseline.instructions_per_double)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    Single,
    Double,
}

impl Precision {
    pub fn mantissa_bits(self) -> u32 {
        match self {
            Precision::Single => 23,
            Precision::Double => 52,
        }
    }
}

/// Executes the TRNG instructions over a bit source and counts the
/// instructions charged to `backend`.
#[derive(Debug, Clone)]
pub struct RngUnit<S> {
    pub backend: RngBackend,
    source: S,
    instructions: f64,
}

impl<S: BitSource> RngUnit<S> {
    pub fn new(backend: RngBackend, source: S) -> Self {
        Self {
            backend,
            source,
            instructions: 0.0,
        }
    }

    pub fn instructions(&self) -> f64 {
        self.instructions
    }

    fn take_bits(&mut self, n: u32) -> Result<u64> {
        let mut v = 0u64;
        for _ in 0..n {
            v = (v << 1) | u64::from(self.source.next_bit()?);
        }
        Ok(v)
    }

    /// `rand`: 15 bits, first one most significant.
    pub fn rand_u15(&mut self) -> Result<u16> {
        let v = self.take_bits(15)? as u16;
        self.instructions += self.backend.instructions_per_u15;
        Ok(v)
    }

    /// `frand.s` / `frand.d`: a uniform value in `[lo, hi)`.
    ///
    /// The random bits fill the mantissa of a fixed-point fraction
    /// `u = m / 2^p`, which is then scaled onto the range. Single precision
    /// does its arithmetic in `f32`.
    pub fn frand(&mut self, precision: Precision, lo: f64, hi: f64) -> Result<f64> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidRange);
        }
        let (lo32, hi32) = (lo as f32, hi as f32);
        if precision == Precision::Single && !(lo32 < hi32 && (hi32 - lo32).is_finite()) {
            return Err(Error::InvalidRange);
        }
        if precision == Precision::Double && !(hi - lo).is_finite() {
            return Err(Error::InvalidRange);
        }
        let p = precision.mantissa_bits();
        let m = self.take_bits(p)?;
        self.instructions += self.backend.instructions_per_double;
        let value = match precision {
            Precision::Single => {
                let u = m as f32 / (1u32 << p) as f32;
                let r = lo32 + u * (hi32 - lo32);
                f64::from(if r >= hi32 { hi32.next_down() } else { r })
            }
            Precision::Double => {
                let u = m as f64 / (1u64 << p) as f64;
                let r = lo + u * (hi - lo);
                if r >= hi {
                    hi.next_down()
                } else {
                    r
                }
            }
        };
        Ok(value)
    }
}

/// Source of uniform doubles in `[0, 1)`.
pub trait UniformSource {
    fn next_uniform(&mut self) -> Result<f64>;
}

impl<S: BitSource> UniformSource for RngUnit<S> {
    fn next_uniform(&mut self) -> Result<f64> {
        self.frand(Precision::Double, 0.0, 1.0)
    }
}

/// Linear congruential `rand()` as shipped in the MSVC C runtime.
#[derive(Debug, Clone)]
pub struct StdlibRand {
    state: u32,
}

impl StdlibRand {
    pub const RAND_MAX: u16 = 0x7fff;

    pub fn new(seed: u32) -> Self {
        Self { state: seed }
    }

    pub fn rand(&mut self) -> u16 {
        self.state = self.state.wrapping_mul(214_013).wrapping_add(2_531_011);
        ((self.state >> 16) & 0x7fff) as u16
    }
}

impl UniformSource for StdlibRand {
    /// `rand() / (RAND_MAX + 1.0)`
    fn next_uniform(&mut self) -> Result<f64> {
        Ok(f64::from(self.rand()) / (f64::from(Self::RAND_MAX) + 1.0))
    }
}

/// Additive lagged Fibonacci generator on doubles, lags (1279, 418):
/// `x[n] = (x[n-1279] + x[n-418]) mod 1`.
#[derive(Debug, Clone)]
pub struct LaggedFibonacci1279 {
    x: Vec<f64>,
    i: usize,
}

impl LaggedFibonacci1279 {
    const LONG: usize = 1279;
    const SHORT: usize = 418;

    /// Fills the lag table with 48-bit fractions from a SplitMix64 sequence.
    pub fn new(seed: u64) -> Self {
        let mut z = seed;
        let x = (0..Self::LONG)
            .map(|_| {
                z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
                (mix64(z) >> 16) as f64 / (1u64 << 48) as f64
            })
            .collect();
        Self { x, i: 0 }
    }

    pub fn next_f64(&mut self) -> f64 {
        // x[i] holds x[n-1279]; x[n-418] sits 1279-418 slots ahead.
        let j = (self.i + Self::LONG - Self::SHORT) % Self::LONG;
        let mut v = self.x[self.i] + self.x[j];
        if v >= 1.0 {
            v -= 1.0;
        }
        self.x[self.i] = v;
        self.i = (self.i + 1) % Self::LONG;
        v
    }
}

impl UniformSource for LaggedFibonacci1279 {
    fn next_uniform(&mut self) -> Result<f64> {
        Ok(self.next_f64())
    }
}

/// One standard normal from two uniforms in `[0, 1)` (cosine branch).
pub fn box_muller(u1: f64, u2: f64) -> f64 {
    sqrt(-2.0 * log(1.0 - u1)) * cos(2.0 * PI * u2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(deny_unknown_fields, default)
)]
pub struct OptionSpec {
    pub s0: f64,
    pub strike: f64,
    pub rate: f64,
    pub volatility: f64,
    pub maturity_years: f64,
    pub n_paths: u64,
}

impl Default for OptionSpec {
    fn default() -> Self {
        Self {
            s0: 100.0,
            strike: 100.0,
            rate: 0.05,
            volatility: 0.2,
            maturity_years: 1.0,
            n_paths: 10_000,
        }
    }
}

impl OptionSpec {
    /// `volatility = 0` is accepted and prices the deterministic drift.
    pub fn validate(&self) -> Result<()> {
        check(self.s0.is_finite() && self.s0 > 0.0, "s0", "must be > 0")?;
        check(
            self.strike.is_finite() && self.strike > 0.0,
            "strike",
            "must be > 0",
        )?;
        check(self.rate.is_finite(), "rate", "must be finite")?;
        check(
            self.volatility.is_finite() && self.volatility >= 0.0,
            "volatility",
            "must be >= 0",
        )?;
        check(
            self.maturity_years.is_finite() && self.maturity_years > 0.0,
            "maturity_years",
            "must be > 0",
        )?;
        check(self.n_paths >= 1, "n_paths", "must be >= 1")
    }

    pub fn with_paths(mut self, n_paths: u64) -> Self {
        self.n_paths = n_paths;
        self
    }
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / core::f64::consts::SQRT_2)
}

/// Closed-form European call price.
pub fn black_scholes_oracle(spec: &OptionSpec) -> Result<f64> {
    spec.validate()?;
    let t = spec.maturity_years;
    let discount = exp(-spec.rate * t);
    let sig_sqrt_t = spec.volatility * sqrt(t);
    if sig_sqrt_t == 0.0 {
        return Ok(discount * (spec.s0 * exp(spec.rate * t) - spec.strike).max(0.0));
    }
    let d1 = (log(spec.s0 / spec.strike)
        + (spec.rate + 0.5 * spec.volatility * spec.volatility) * t)
        / sig_sqrt_t;
    let d2 = d1 - sig_sqrt_t;
    Ok(spec.s0 * normal_cdf(d1) - spec.strike * discount * normal_cdf(d2))
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct McEstimate {
    pub price: f64,
    pub stderr: f64,
}

/// Terminal-value Monte Carlo price of a European call.
pub fn price_option_mc<U: UniformSource + ?Sized>(
    spec: &OptionSpec,
    uniforms: &mut U,
) -> Result<McEstimate> {
    spec.validate()?;
    let t = spec.maturity_years;
    let drift = (spec.rate - 0.5 * spec.volatility * spec.volatility) * t;
    let diffusion = spec.volatility * sqrt(t);
    let discount = exp(-spec.rate * t);
    // Welford accumulation of the undiscounted payoff.
    let (mut mean, mut m2) = (0.0f64, 0.0f64);
    for k in 1..=spec.n_paths {
        let u1 = uniforms.next_uniform()?;
        let u2 = uniforms.next_uniform()?;
        let z = box_muller(u1, u2);
        let st = spec.s0 * exp(drift + diffusion * z);
        let payoff = (st - spec.strike).max(0.0);
        let d = payoff - mean;
        mean += d / k as f64;
        m2 += d * (payoff - mean);
    }
    let n = spec.n_paths as f64;
    let stderr = if spec.n_paths >= 2 {
        discount * sqrt(m2 / (n - 1.0)) / sqrt(n)
    } else {
        0.0
    };
    Ok(McEstimate {
        price: discount * mean,
        stderr,
    })
}

/// One backend at one path count.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct BenchEntry {
    pub backend: BackendKind,
    pub n_paths: u64,
    pub price: f64,
    pub stderr: f64,
    pub instructions: f64,
    pub runtime_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct BenchRow {
    #[cfg_attr(feature = "serde", serde(flatten))]
    pub entry: BenchEntry,
    pub ratio_vs_trng: f64,
    pub speedup_vs_trng: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchSetup {
    pub option: OptionSpec,
    pub costs: CostModel,
    pub pipeline: PipelineConfig,
    pub backends: [RngBackend; 3],
    /// Generator behind the TRNG instruction.
    pub trng: GeneratorConfig,
}

impl Default for BenchSetup {
    fn default() -> Self {
        Self {
            option: OptionSpec::default(),
            costs: CostModel::default(),
            pipeline: PipelineConfig::default(),
            backends: [
                RngBackend::trng(),
                RngBackend::stdlib(),
                RngBackend::boost_lagfib(),
            ],
            trng: GeneratorConfig::new(Variant::RhsTrng),
        }
    }
}

impl BenchSetup {
    pub fn backend(&self, kind: BackendKind) -> &RngBackend {
        self.backends
            .iter()
            .find(|b| b.kind == kind)
            .expect("every kind is configured")
    }

    pub fn validate(&self) -> Result<()> {
        self.option.validate()?;
        self.costs.validate()?;
        for b in &self.backends {
            b.validate()?;
        }
        for kind in BackendKind::ALL {
            check(
                self.backends.iter().filter(|b| b.kind == kind).count() == 1,
                "backends",
                "each backend kind must appear exactly once",
            )?;
        }
        self.pipeline
            .validate(self.backend(BackendKind::TrngInstruction))?;
        self.trng.validate()
    }
}

/// Price with one backend at `n_paths` and account its instructions.
pub fn bench_entry(
    setup: &BenchSetup,
    kind: BackendKind,
    n_paths: u64,
    seed: u64,
) -> Result<BenchEntry> {
    let spec = setup.option.with_paths(n_paths);
    let backend = *setup.backend(kind);
    let run_seed = mix64(seed ^ mix64(n_paths));
    let estimate = match kind {
        BackendKind::TrngInstruction => {
            let gen = Generator::new(&setup.trng, Environment::nominal(), run_seed)?;
            price_option_mc(&spec, &mut RngUnit::new(backend, gen))?
        }
        BackendKind::SoftwareStdlib => {
            price_option_mc(&spec, &mut StdlibRand::new(run_seed as u32))?
        }
        BackendKind::SoftwareBoostLagFib => {
            price_option_mc(&spec, &mut LaggedFibonacci1279::new(run_seed))?
        }
    };
    let instructions = setup.costs.instruction_count(&backend, n_paths);
    Ok(BenchEntry {
        backend: kind,
        n_paths,
        price: estimate.price,
        stderr: estimate.stderr,
        instructions,
        runtime_s: setup.pipeline.runtime_s(instructions),
    })
}

/// Attach ratios against the TRNG entry with the same path count. Entries
/// without a TRNG baseline get `NaN`.
pub fn speedup_report(entries: &[BenchEntry]) -> Vec<BenchRow> {
    entries
        .iter()
        .map(|e| {
            let base = entries
                .iter()
                .find(|b| b.backend == BackendKind::TrngInstruction && b.n_paths == e.n_paths);
            let (ratio, speedup) = match base {
                Some(b) => (e.instructions / b.instructions, e.runtime_s / b.runtime_s),
                None => (f64::NAN, f64::NAN),
            };
            BenchRow {
                entry: *e,
                ratio_vs_trng: ratio,
                speedup_vs_trng: speedup,
            }
        })
        .collect()
}

/// Decades `10^lo ..= 10^hi`.
pub fn decade_grid(lo: u32, hi: u32) -> Vec<u64> {
    (lo..=hi).map(|k| 10u64.pow(k)).collect()
}
