// SPDX-License-Identifier: Apache-2.0

//! Voltage, temperature and process-variation studies.
//!
//! Every (variant, point) job derives its own seed from the sweep seed and
//! the point index, so all variants at one point share unit streams and the
//! result does not depend on thread scheduling.

use std::io::Write;

use mtj_trng_core::device::{sample_device_with, NOMINAL_TEMPERATURE_K};
use mtj_trng_core::rng::{mix64, substream};
use mtj_trng_core::trng::{device_flip_probs, predicted_output};
use mtj_trng_core::{
    DeviceInstance, EntropyReport, Environment, FlipProbs, Generator, GeneratorConfig, UnitModel,
    Variant,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const DEVICE_STREAM: u64 = u64::from_le_bytes(*b"process\0");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Voltage,
    Temperature,
    Process,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::Voltage => "voltage",
            Axis::Temperature => "temperature",
            Axis::Process => "process",
        }
    }
}

/// Inclusive arithmetic range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Range {
    pub fn points(&self) -> Result<Vec<f64>> {
        let ok = self.start.is_finite()
            && self.stop.is_finite()
            && self.step.is_finite()
            && self.step > 0.0
            && self.stop >= self.start;
        if !ok {
            return Err(Error::Invalid(format!("empty or malformed range {self:?}")));
        }
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        // Computed from the index, then rounded, so CSV values are clean.
        Ok((0..=n)
            .map(|i| ((self.start + i as f64 * self.step) * 1e9).round() / 1e9)
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSpec {
    pub variants: Vec<Variant>,
    pub axis: Axis,
    /// Supply variation rate.
    pub voltage: Range,
    /// Kelvin.
    pub temperature: Range,
    pub n_samples: usize,
    pub bits_per_point: usize,
    pub seed: u64,
    pub generator: GeneratorConfig,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            variants: Variant::COMPARED.to_vec(),
            axis: Axis::Voltage,
            voltage: Range {
                start: -0.1,
                stop: 0.1,
                step: 0.02,
            },
            temperature: Range {
                start: 280.15,
                stop: 320.15,
                step: 5.0,
            },
            n_samples: 200,
            bits_per_point: 1_000_000,
            seed: 0,
            generator: GeneratorConfig::default(),
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.variants.is_empty() {
            return Err(Error::Invalid("sweep needs at least one variant".into()));
        }
        if self.bits_per_point < 10_000 {
            return Err(Error::Invalid("bits_per_point must be >= 10000".into()));
        }
        if self.axis == Axis::Process
            && (self.n_samples == 0 || self.bits_per_point / self.n_samples == 0)
        {
            return Err(Error::Invalid(
                "process study needs 1 <= n_samples <= bits_per_point".into(),
            ));
        }
        for v in &self.variants {
            v.validate()?;
        }
        self.generator.validate()?;
        Ok(())
    }

    fn environments(&self) -> Result<Vec<(f64, Environment)>> {
        let nominal = Environment::nominal();
        Ok(match self.axis {
            Axis::Voltage => self
                .voltage
                .points()?
                .into_iter()
                .map(|v| (v, nominal.with_voltage(v)))
                .collect(),
            Axis::Temperature => self
                .temperature
                .points()?
                .into_iter()
                .map(|t| (t, nominal.with_temperature(t)))
                .collect(),
            Axis::Process => vec![(self.n_samples as f64, nominal)],
        })
    }
}

/// One CSV row. For the process axis `value` is the number of device
/// samples and the model probabilities are averaged over unit 0 of every
/// sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub variant: String,
    pub axis: &'static str,
    pub value: f64,
    pub p_one: f64,
    pub shannon: f64,
    pub min_entropy: f64,
    pub p1_model: f64,
    pub p2_model: f64,
}

/// A row plus the analytic prediction behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub row: SweepRow,
    pub variant: Variant,
    pub n_bits: usize,
    /// Predicted 1-probability, averaged over samples for the process axis.
    pub p_one_model: f64,
    pub lag1_model: f64,
}

fn point_seed(seed: u64, point: usize) -> u64 {
    mix64(seed ^ mix64(point as u64))
}

fn run_point(
    spec: &SweepSpec,
    variant: Variant,
    index: usize,
    value: f64,
    env: Environment,
) -> Result<SweepPoint> {
    let config = spec.generator.with_variant(variant);
    let pulses = config.calibration()?;
    let device = DeviceInstance::nominal(config.device);
    let probs = vec![device_flip_probs(&device, &pulses, &env); variant.units()];
    let models = probs.iter().map(|&fp| UnitModel::Forced(fp)).collect();
    let mut gen = Generator::with_units(&config, env, point_seed(spec.seed, index), models)?;
    let bits = gen.fill(spec.bits_per_point);
    let report = EntropyReport::of(&bits);
    let model = predicted_output(variant, &probs)?;
    Ok(SweepPoint {
        row: SweepRow {
            variant: variant.to_string(),
            axis: spec.axis.name(),
            value,
            p_one: report.p_one,
            shannon: report.shannon,
            min_entropy: report.min_entropy,
            p1_model: probs[0].p1,
            p2_model: probs[0].p2,
        },
        variant,
        n_bits: bits.len(),
        p_one_model: model.p_one,
        lag1_model: model.lag1,
    })
}

/// Devices of sample `i`, shared by every variant.
fn sample_devices(spec: &SweepSpec, sample: usize, units: usize) -> Result<Vec<DeviceInstance>> {
    (0..units)
        .map(|u| {
            let mut rng = substream(spec.seed, &[DEVICE_STREAM, sample as u64, u as u64]);
            Ok(sample_device_with(&spec.generator.device, &mut rng)?)
        })
        .collect()
}

fn run_process(spec: &SweepSpec, variant: Variant) -> Result<SweepPoint> {
    let config = spec.generator.with_variant(variant);
    let pulses = config.calibration()?;
    let env = Environment::nominal();
    let per_sample = spec.bits_per_point / spec.n_samples;
    let samples: Vec<(Vec<bool>, Vec<FlipProbs>)> = (0..spec.n_samples)
        .into_par_iter()
        .map(|i| {
            let probs: Vec<FlipProbs> = sample_devices(spec, i, variant.units())?
                .iter()
                .map(|d| device_flip_probs(d, &pulses, &env))
                .collect();
            let models = probs.iter().map(|&fp| UnitModel::Forced(fp)).collect();
            let mut gen = Generator::with_units(&config, env, point_seed(spec.seed, i), models)?;
            Ok((gen.fill(per_sample), probs))
        })
        .collect::<Result<_>>()?;
    let mut bits = Vec::with_capacity(per_sample * spec.n_samples);
    let (mut p1, mut p2, mut p_model, mut lag_model) = (0.0, 0.0, 0.0, 0.0);
    for (b, probs) in &samples {
        bits.extend_from_slice(b);
        p1 += probs[0].p1;
        p2 += probs[0].p2;
        let m = predicted_output(variant, probs)?;
        p_model += m.p_one;
        lag_model += m.lag1;
    }
    let k = spec.n_samples as f64;
    let report = EntropyReport::of(&bits);
    Ok(SweepPoint {
        row: SweepRow {
            variant: variant.to_string(),
            axis: spec.axis.name(),
            value: k,
            p_one: report.p_one,
            shannon: report.shannon,
            min_entropy: report.min_entropy,
            p1_model: p1 / k,
            p2_model: p2 / k,
        },
        variant,
        n_bits: bits.len(),
        p_one_model: p_model / k,
        lag1_model: lag_model / k,
    })
}

/// Run the sweep. Rows are ordered by variant (as listed), then by point.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepPoint>> {
    spec.validate()?;
    if spec.axis == Axis::Process {
        return spec
            .variants
            .iter()
            .map(|&v| run_process(spec, v))
            .collect();
    }
    let envs = spec.environments()?;
    let jobs: Vec<(Variant, usize)> = spec
        .variants
        .iter()
        .flat_map(|&v| (0..envs.len()).map(move |i| (v, i)))
        .collect();
    jobs.par_iter()
        .map(|&(v, i)| run_point(spec, v, i, envs[i].0, envs[i].1))
        .collect()
}

pub fn voltage_sweep(spec: &SweepSpec) -> Result<Vec<SweepPoint>> {
    run_sweep(&SweepSpec {
        axis: Axis::Voltage,
        ..spec.clone()
    })
}

pub fn temperature_sweep(spec: &SweepSpec) -> Result<Vec<SweepPoint>> {
    run_sweep(&SweepSpec {
        axis: Axis::Temperature,
        ..spec.clone()
    })
}

pub fn process_variation_study(spec: &SweepSpec) -> Result<Vec<SweepPoint>> {
    run_sweep(&SweepSpec {
        axis: Axis::Process,
        ..spec.clone()
    })
}

pub fn write_csv<W: Write>(out: W, points: &[SweepPoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for p in points {
        w.serialize(&p.row)?;
    }
    w.flush().map_err(crate::error::io_err("<csv>"))?;
    Ok(())
}

/// Nominal temperature, the centre of the temperature sweep.
pub const CENTRE_TEMPERATURE_K: f64 = NOMINAL_TEMPERATURE_K;

#[cfg(test)]
mod tests {
    use super::*;
    use mtj_trng_core::sampling_band;

    fn small(axis: Axis) -> SweepSpec {
        SweepSpec {
            axis,
            bits_per_point: 20_000,
            n_samples: 20,
            seed: 3,
            ..SweepSpec::default()
        }
    }

    #[test]
    fn range_points() {
        let v = SweepSpec::default().voltage.points().unwrap();
        assert_eq!(v.len(), 11);
        assert_eq!(v[5], 0.0);
        assert_eq!(v[10], 0.1);
        let t = SweepSpec::default().temperature.points().unwrap();
        assert_eq!(t.len(), 9);
        assert_eq!((t[0], t[4], t[8]), (280.15, 300.15, 320.15));
        assert!(Range {
            start: 1.0,
            stop: 0.0,
            step: 1.0
        }
        .points()
        .is_err());
        assert!(Range {
            start: 0.0,
            stop: 1.0,
            step: 0.0
        }
        .points()
        .is_err());
    }

    #[test]
    fn spec_validation() {
        let mut s = small(Axis::Voltage);
        s.bits_per_point = 9_999;
        assert!(s.validate().is_err());
        let mut s = small(Axis::Voltage);
        s.variants.clear();
        assert!(s.validate().is_err());
    }

    #[test]
    fn rows_are_reproducible_and_ordered() {
        let a = run_sweep(&small(Axis::Voltage)).unwrap();
        let b = run_sweep(&small(Axis::Voltage)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 4 * 11);
        assert_eq!(a[0].row.variant, "conv-ap-to-p");
        assert_eq!(a[0].row.value, -0.1);
        assert_eq!(a[43].row.variant, "rhs-trng");
    }

    #[test]
    fn empirical_frequency_tracks_model() {
        for axis in [Axis::Voltage, Axis::Temperature, Axis::Process] {
            for p in run_sweep(&small(axis)).unwrap() {
                let sd = (p.p_one_model * (1.0 - p.p_one_model) / p.n_bits as f64
                    * mtj_trng_core::markov::mean_variance_inflation(p.lag1_model.abs()))
                .sqrt();
                // The process axis mixes devices, which widens the spread.
                let k = if axis == Axis::Process { 5.0 } else { 4.0 };
                assert!(
                    (p.row.p_one - p.p_one_model).abs() <= k * sd + 1e-12,
                    "{axis:?} {} {}: {} vs {}",
                    p.row.variant,
                    p.row.value,
                    p.row.p_one,
                    p.p_one_model
                );
            }
        }
    }

    #[test]
    fn nominal_point_is_fair() {
        let rows = run_sweep(&small(Axis::Voltage)).unwrap();
        for p in rows.iter().filter(|p| p.row.value == 0.0) {
            assert!((p.row.p1_model - 0.5).abs() < 1e-5);
            assert!((p.row.p2_model - 0.5).abs() < 1e-5);
            let band = sampling_band(0.5, p.n_bits, p.lag1_model, 4.0);
            assert!(1.0 - p.row.shannon <= band.shannon, "{}", p.row.variant);
        }
    }

    #[test]
    fn zero_sigma_process_matches_nominal() {
        let mut s = small(Axis::Process);
        s.generator.device = s.generator.device.without_variation();
        for p in run_sweep(&s).unwrap() {
            assert!((p.row.p1_model - 0.5).abs() < 1e-5);
            assert!((p.p_one_model - 0.5).abs() < 1e-5);
        }
    }

    #[test]
    fn csv_header() {
        let rows = run_sweep(&SweepSpec {
            variants: vec![Variant::RhsTrng],
            ..small(Axis::Temperature)
        })
        .unwrap();
        let mut buf = Vec::new();
        write_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(
            text.starts_with("variant,axis,value,p_one,shannon,min_entropy,p1_model,p2_model\n")
        );
        assert_eq!(text.lines().count(), 10);
    }
}
