// SPDX-License-Identifier: Apache-2.0

//! Generator state machines.
//!
//! Conventional cells run reset → random write → read each cycle. RHS units
//! run read → write-inverse: the bit read is emitted and its complement is
//! the write target, so the device walks a two-state Markov chain with flip
//! probabilities (P1, P2). An RHS-TRNG XORs two units; the parallel array
//! XORs each adjacent pair of `n + 1` units.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng;

use crate::device::{
    calibrate_pulse, switching_probability, DeviceInstance, DeviceParams, Direction, Environment,
    MagState, WritePulse,
};
use crate::error::{check, Error};
use crate::markov::{
    lag1_autocorrelation, steady_state, xor_chain_lag1, xor_output_prob, FlipProbs,
};
use crate::rng::{substream, SimRng};
use crate::Result;

/// Phase durations of one generation cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(deny_unknown_fields, default)
)]
pub struct CycleTiming {
    pub t_pre_ns: f64,
    pub t_rd_ns: f64,
    pub t_wr_ns: f64,
    /// Only spent by conventional designs.
    pub t_reset_ns: f64,
}

impl Default for CycleTiming {
    fn default() -> Self {
        Self {
            t_pre_ns: 0.2,
            t_rd_ns: 0.2,
            t_wr_ns: 2.9,
            t_reset_ns: 2.9,
        }
    }
}

impl CycleTiming {
    pub fn cycle_ns(&self, variant: Variant) -> f64 {
        let base = self.t_pre_ns + self.t_rd_ns + self.t_wr_ns;
        if variant.is_conventional() {
            base + self.t_reset_ns
        } else {
            base
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (v, name) in [
            (self.t_pre_ns, "t_pre_ns"),
            (self.t_rd_ns, "t_rd_ns"),
            (self.t_wr_ns, "t_wr_ns"),
            (self.t_reset_ns, "t_reset_ns"),
        ] {
            check(v.is_finite() && v >= 0.0, name, "must be finite and >= 0")?;
        }
        check(self.t_wr_ns > 0.0, "t_wr_ns", "write phase must be > 0")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(try_from = "String", into = "String")
)]
pub enum Variant {
    ConvApToP,
    ConvPToAp,
    RhsSingleUnit,
    RhsTrng,
    /// `n` output lanes from `n + 1` units.
    RhsParallel(u32),
}

impl Variant {
    /// The four designs compared in the variation studies.
    pub const COMPARED: [Variant; 4] = [
        Variant::ConvApToP,
        Variant::ConvPToAp,
        Variant::RhsSingleUnit,
        Variant::RhsTrng,
    ];

    pub fn is_conventional(self) -> bool {
        matches!(self, Variant::ConvApToP | Variant::ConvPToAp)
    }

    pub fn units(self) -> usize {
        match self {
            Variant::ConvApToP | Variant::ConvPToAp | Variant::RhsSingleUnit => 1,
            Variant::RhsTrng => 2,
            Variant::RhsParallel(n) => n as usize + 1,
        }
    }

    /// Output bits per cycle.
    pub fn lanes(self) -> usize {
        match self {
            Variant::RhsParallel(n) => n as usize,
            _ => 1,
        }
    }

    pub fn validate(self) -> Result<()> {
        check(
            !matches!(self, Variant::RhsParallel(0)),
            "variant",
            "rhs-parallel needs at least one lane",
        )
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::ConvApToP => f.write_str("conv-ap-to-p"),
            Variant::ConvPToAp => f.write_str("conv-p-to-ap"),
            Variant::RhsSingleUnit => f.write_str("rhs-single-unit"),
            Variant::RhsTrng => f.write_str("rhs-trng"),
            Variant::RhsParallel(n) => write!(f, "rhs-parallel-{n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseVariantError(pub String);

impl fmt::Display for ParseVariantError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "unknown variant `{}` (expected conv-ap-to-p, conv-p-to-ap, rhs-single-unit, rhs-trng or rhs-parallel-N)",
            self.0
        )
    }
}

impl core::error::Error for ParseVariantError {}

impl FromStr for Variant {
    type Err = ParseVariantError;

    fn from_str(s: &str) -> core::result::Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        let v = match norm.as_str() {
            "conv-ap-to-p" | "conv-aptop" | "conv.aptop" => Variant::ConvApToP,
            "conv-p-to-ap" | "conv-ptoap" | "conv.ptoap" => Variant::ConvPToAp,
            "rhs-single-unit" | "rhs-singleunit" | "rhs-single" => Variant::RhsSingleUnit,
            "rhs-trng" => Variant::RhsTrng,
            other => {
                let n = other
                    .strip_prefix("rhs-parallel-")
                    .and_then(|n| n.parse::<u32>().ok())
                    .filter(|&n| n >= 1)
                    .ok_or_else(|| ParseVariantError(String::from(s)))?;
                Variant::RhsParallel(n)
            }
        };
        Ok(v)
    }
}

impl TryFrom<String> for Variant {
    type Error = ParseVariantError;
    fn try_from(s: String) -> core::result::Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Variant> for String {
    fn from(v: Variant) -> String {
        format!("{v}")
    }
}

/// The 50 % write pulses for both directions.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PulseCalibration {
    pub to_ap: WritePulse,
    pub to_p: WritePulse,
}

impl PulseCalibration {
    /// Calibrate on the nominal device at the nominal environment.
    pub fn nominal(params: &DeviceParams, width_ns: f64) -> Result<Self> {
        let device = DeviceInstance::nominal(*params);
        let env = Environment::nominal();
        Ok(Self {
            to_ap: calibrate_pulse(Direction::PToAp, 0.5, width_ns, &device, &env)?,
            to_p: calibrate_pulse(Direction::ApToP, 0.5, width_ns, &device, &env)?,
        })
    }

    pub fn pulse(&self, direction: Direction) -> &WritePulse {
        match direction {
            Direction::PToAp => &self.to_ap,
            Direction::ApToP => &self.to_p,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(deny_unknown_fields, default)
)]
pub struct GeneratorConfig {
    pub variant: Variant,
    pub timing: CycleTiming,
    pub energy_pj_per_bit_cell: f64,
    pub energy_pj_per_bit_parallel_asymptote: f64,
    pub area_um2_cell: f64,
    pub area_um2_unit: f64,
    pub area_um2_per_bit_parallel_asymptote: f64,
    pub device: DeviceParams,
    /// Overrides the nominal-device calibration when set.
    pub calibration: Option<PulseCalibration>,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self::new(Variant::RhsTrng)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Throughput {
    pub cycle_ns: f64,
    pub per_lane_mbps: f64,
    pub aggregate_mbps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CostReport {
    pub energy_pj_per_bit: f64,
    pub area_um2_per_bit: f64,
}

impl GeneratorConfig {
    pub fn new(variant: Variant) -> Self {
        Self {
            variant,
            timing: CycleTiming::default(),
            energy_pj_per_bit_cell: 5.3,
            energy_pj_per_bit_parallel_asymptote: 2.65,
            area_um2_cell: 24.29,
            area_um2_unit: 9.79,
            area_um2_per_bit_parallel_asymptote: 14.5,
            device: DeviceParams::default(),
            calibration: None,
        }
    }

    pub fn with_variant(&self, variant: Variant) -> Self {
        Self {
            variant,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.variant.validate()?;
        self.timing.validate()?;
        self.device.validate()?;
        for (v, name) in [
            (self.energy_pj_per_bit_cell, "energy_pj_per_bit_cell"),
            (
                self.energy_pj_per_bit_parallel_asymptote,
                "energy_pj_per_bit_parallel_asymptote",
            ),
            (self.area_um2_cell, "area_um2_cell"),
            (self.area_um2_unit, "area_um2_unit"),
            (
                self.area_um2_per_bit_parallel_asymptote,
                "area_um2_per_bit_parallel_asymptote",
            ),
        ] {
            check(v.is_finite() && v > 0.0, name, "must be finite and > 0")?;
        }
        check(
            self.area_um2_cell >= 2.0 * self.area_um2_unit,
            "area_um2_cell",
            "must cover two units plus the XOR gate",
        )
    }

    pub fn calibration(&self) -> Result<PulseCalibration> {
        match self.calibration {
            Some(c) => Ok(c),
            None => PulseCalibration::nominal(&self.device, self.timing.t_wr_ns),
        }
    }

    pub fn cycle_ns(&self) -> f64 {
        self.timing.cycle_ns(self.variant)
    }

    pub fn throughput_report(&self) -> Throughput {
        let cycle_ns = self.cycle_ns();
        let per_lane_mbps = 1e3 / cycle_ns;
        Throughput {
            cycle_ns,
            per_lane_mbps,
            aggregate_mbps: per_lane_mbps * self.variant.lanes() as f64,
        }
    }

    /// Area of the XOR gate joining two units.
    pub fn xor_area_um2(&self) -> f64 {
        self.area_um2_cell - 2.0 * self.area_um2_unit
    }

    /// Per-bit energy and area. Single-unit designs (conventional cells and a
    /// lone RHS unit) are booked as one unit without the XOR gate.
    pub fn cost_report(&self) -> CostReport {
        match self.variant {
            Variant::RhsTrng => CostReport {
                energy_pj_per_bit: self.energy_pj_per_bit_cell,
                area_um2_per_bit: self.area_um2_cell,
            },
            Variant::RhsParallel(n) => {
                let n = f64::from(n);
                CostReport {
                    energy_pj_per_bit: (n + 1.0) / n * self.energy_pj_per_bit_parallel_asymptote,
                    area_um2_per_bit: ((n + 1.0) * self.area_um2_unit + n * self.xor_area_um2())
                        / n,
                }
            }
            _ => CostReport {
                energy_pj_per_bit: self.energy_pj_per_bit_parallel_asymptote,
                area_um2_per_bit: self.area_um2_unit,
            },
        }
    }
}

/// What drives a unit's switching.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UnitModel {
    /// A physical device written with the calibrated pulses.
    Device(DeviceInstance),
    /// Fixed flip probabilities, bypassing the device model.
    Forced(FlipProbs),
}

/// Flip probabilities of a device under the calibrated pulses.
pub fn device_flip_probs(
    device: &DeviceInstance,
    pulses: &PulseCalibration,
    env: &Environment,
) -> FlipProbs {
    FlipProbs {
        p1: switching_probability(device, pulses.pulse(Direction::PToAp), env),
        p2: switching_probability(device, pulses.pulse(Direction::ApToP), env),
    }
}

// Device and environment are fixed for a generator's lifetime, so each unit
// reduces to its two switching probabilities.
#[derive(Debug, Clone)]
struct Unit {
    probs: FlipProbs,
    state: MagState,
    rng: SimRng,
}

impl Unit {
    fn write(&mut self, direction: Direction) {
        if self.state != direction.source() {
            return;
        }
        let p = match direction {
            Direction::PToAp => self.probs.p1,
            Direction::ApToP => self.probs.p2,
        };
        if self.rng.random::<f64>() < p {
            self.state = direction.target();
        }
    }

    /// Read-then-write-inverse. Returns the bit read.
    fn rhs_cycle(&mut self) -> bool {
        let read = self.state;
        self.write(Direction::towards(read.flipped()));
        read.bit()
    }

    /// Reset to the source state, random write, read.
    fn conventional_cycle(&mut self, direction: Direction) -> bool {
        self.state = direction.source();
        self.write(direction);
        self.state.bit()
    }
}

/// A running generator instance. Strictly sequential.
#[derive(Debug, Clone)]
pub struct Generator {
    variant: Variant,
    units: Vec<Unit>,
    warmed_up: bool,
    cycles: u64,
    lane_buf: Vec<bool>,
    scratch: Vec<bool>,
}

impl Generator {
    /// Generator built from nominal devices.
    pub fn new(config: &GeneratorConfig, env: Environment, seed: u64) -> Result<Self> {
        let device = DeviceInstance::nominal(config.device);
        let models = (0..config.variant.units())
            .map(|_| UnitModel::Device(device))
            .collect();
        Self::with_units(config, env, seed, models)
    }

    /// Generator whose units are driven by `models` (one per unit). Unit `i`
    /// draws from stream `[i]` under `seed`.
    pub fn with_units(
        config: &GeneratorConfig,
        env: Environment,
        seed: u64,
        models: Vec<UnitModel>,
    ) -> Result<Self> {
        config.validate()?;
        env.validate()?;
        check(
            models.len() == config.variant.units(),
            "models",
            "one model per unit required",
        )?;
        let pulses = config.calibration()?;
        let units = models
            .into_iter()
            .enumerate()
            .map(|(i, model)| Unit {
                probs: match model {
                    UnitModel::Device(d) => device_flip_probs(&d, &pulses, &env),
                    UnitModel::Forced(fp) => fp,
                },
                state: MagState::P,
                rng: substream(seed, &[i as u64]),
            })
            .collect();
        Ok(Self {
            variant: config.variant,
            units,
            warmed_up: config.variant.is_conventional(),
            cycles: 0,
            lane_buf: Vec::new(),
            scratch: Vec::new(),
        })
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    /// Switching probabilities of each unit.
    pub fn flip_probs(&self) -> Vec<FlipProbs> {
        self.units.iter().map(|u| u.probs).collect()
    }

    /// Cycles emitted so far, excluding the warm-up cycle.
    pub fn cycles(&self) -> u64 {
        self.cycles
    }

    fn raw_cycle(&mut self, out: &mut Vec<bool>) {
        match self.variant {
            Variant::ConvApToP => out.push(self.units[0].conventional_cycle(Direction::ApToP)),
            Variant::ConvPToAp => out.push(self.units[0].conventional_cycle(Direction::PToAp)),
            Variant::RhsSingleUnit => out.push(self.units[0].rhs_cycle()),
            Variant::RhsTrng => {
                let a = self.units[0].rhs_cycle();
                let b = self.units[1].rhs_cycle();
                out.push(a ^ b);
            }
            Variant::RhsParallel(_) => {
                self.scratch.clear();
                self.scratch
                    .extend(self.units.iter_mut().map(Unit::rhs_cycle));
                out.extend(self.scratch.windows(2).map(|w| w[0] ^ w[1]));
            }
        }
    }

    /// Run one cycle and append its `lanes()` output bits to `out`.
    pub fn step_cycle(&mut self, out: &mut Vec<bool>) {
        if !self.warmed_up {
            // The first read of an RHS unit returns the initial state.
            let mut discard = Vec::with_capacity(self.variant.lanes());
            self.raw_cycle(&mut discard);
            self.warmed_up = true;
        }
        self.raw_cycle(out);
        self.cycles += 1;
    }

    /// Next output bit, buffering the lanes of parallel variants.
    pub fn next_bit(&mut self) -> bool {
        if self.lane_buf.is_empty() {
            let mut buf = core::mem::take(&mut self.lane_buf);
            self.step_cycle(&mut buf);
            buf.reverse();
            self.lane_buf = buf;
        }
        self.lane_buf.pop().expect("a cycle emits at least one bit")
    }

    /// Run whole cycles until at least `n_bits` bits are available; bits of a
    /// final partial cycle beyond `n_bits` are dropped.
    pub fn fill(&mut self, n_bits: usize) -> Vec<bool> {
        let mut bits = Vec::with_capacity(n_bits + self.variant.lanes());
        while bits.len() < n_bits {
            self.step_cycle(&mut bits);
        }
        bits.truncate(n_bits);
        bits
    }
}

/// Stationary statistics of a variant's output given its units' switching
/// probabilities. For parallel arrays this describes lane 0.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct OutputModel {
    pub p_one: f64,
    pub lag1: f64,
}

pub fn predicted_output(variant: Variant, probs: &[FlipProbs]) -> Result<OutputModel> {
    check(
        probs.len() == variant.units(),
        "probs",
        "one entry per unit required",
    )?;
    let unit = |fp: FlipProbs| -> Result<(f64, f64)> {
        Ok((steady_state(fp)?.p_out_1, lag1_autocorrelation(fp)?))
    };
    Ok(match variant {
        // Reset to AP, then a 1 survives when AP→P fails.
        Variant::ConvApToP => OutputModel {
            p_one: 1.0 - probs[0].p2,
            lag1: 0.0,
        },
        Variant::ConvPToAp => OutputModel {
            p_one: probs[0].p1,
            lag1: 0.0,
        },
        Variant::RhsSingleUnit => {
            let (p_one, lag1) = unit(probs[0])?;
            OutputModel { p_one, lag1 }
        }
        Variant::RhsTrng | Variant::RhsParallel(_) => {
            let (pa, la) = unit(probs[0])?;
            let (pb, lb) = unit(probs[1])?;
            OutputModel {
                p_one: xor_output_prob(pa, pb),
                lag1: xor_chain_lag1(pa, la, pb, lb),
            }
        }
    })
}

/// A generated bit sequence and its accounting.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct BitStream {
    #[cfg_attr(feature = "serde", serde(skip))]
    pub bits: Vec<bool>,
    pub n_bits: usize,
    pub n_cycles: u64,
    pub cycle_ns: f64,
    pub simulated_time_ns: f64,
    pub energy_pj: f64,
    pub variant: String,
    pub seed: u64,
}

impl BitStream {
    /// Wrap `bits` produced in `n_cycles` cycles of `config`.
    pub fn from_bits(config: &GeneratorConfig, bits: Vec<bool>, n_cycles: u64, seed: u64) -> Self {
        let cycle_ns = config.cycle_ns();
        Self {
            n_bits: bits.len(),
            n_cycles,
            cycle_ns,
            simulated_time_ns: n_cycles as f64 * cycle_ns,
            energy_pj: bits.len() as f64 * config.cost_report().energy_pj_per_bit,
            variant: format!("{}", config.variant),
            seed,
            bits,
        }
    }
}

/// Generate `n_bits` from nominal devices.
pub fn generate_bitstream(
    config: &GeneratorConfig,
    env: Environment,
    n_bits: usize,
    seed: u64,
) -> Result<BitStream> {
    if n_bits == 0 {
        return Err(Error::EmptyStream);
    }
    let mut gen = Generator::new(config, env, seed)?;
    let bits = gen.fill(n_bits);
    Ok(BitStream::from_bits(config, bits, gen.cycles(), seed))
}
