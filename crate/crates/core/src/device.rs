// SPDX-License-Identifier: Apache-2.0

//! Behavioral STT-MTJ device model.
//!
//! Switching is thermally activated (Néel–Brown):
//!
//! ```text
//! P_sw = 1 - exp(-width / tau)
//! tau  = tau0 * exp(max(0, Delta(T) * (1 - I_eff / Ic0)))
//! Delta(T) = Delta_300 * 300 / T
//! I_eff = I * (1 + v) * (R_P_nom + R_load) / (R_state + R_load)
//! ```
//!
//! `R_state` is the resistance of the state being switched away from and
//! `R_load` the series resistance of that direction's write path. Process
//! variation enters through the sampled free-layer thickness (scales Delta
//! and Ic0 linearly), barrier thickness (R_P exponential in thickness) and
//! TMR (R_AP only).

use libm::{exp, fabs};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{check, Error};
use crate::rng::SimRng;
use crate::Result;

/// Reference temperature of `delta_300`.
pub const REFERENCE_TEMPERATURE_K: f64 = 300.0;
/// 27 °C, the calibration point and center of the temperature sweep.
pub const NOMINAL_TEMPERATURE_K: f64 = 300.15;

const MAX_REJECTIONS: usize = 100;
const CALIBRATION_TOLERANCE: f64 = 1e-6;
const CALIBRATION_MAX_ITER: usize = 200;

/// Nominal device geometry and model constants.
///
/// The `sigma_*` fields are absolute standard deviations in the unit of the
/// corresponding nominal value.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(deny_unknown_fields, default)
)]
pub struct DeviceParams {
    pub t_fl_nm: f64,
    pub sigma_t_fl: f64,
    pub t_tb_nm: f64,
    pub sigma_t_tb: f64,
    pub cd_nm: f64,
    /// (R_AP - R_P) / R_P, dimensionless (2.0 for 200 %).
    pub tmr: f64,
    pub sigma_tmr: f64,
    pub r_p_ohm: f64,
    pub delta_300: f64,
    pub ic0_ap2p_ua: f64,
    pub ic0_p2ap_ua: f64,
    pub tau0_ns: f64,
    /// Series resistance of the P→AP write path.
    pub r_load_p2ap_ohm: f64,
    /// Series resistance of the AP→P write path.
    pub r_load_ap2p_ohm: f64,
    /// Length over which R_P grows by a factor e with barrier thickness.
    pub tb_decay_nm: f64,
}

impl Default for DeviceParams {
    fn default() -> Self {
        Self {
            t_fl_nm: 1.3,
            sigma_t_fl: 0.03 * 1.3,
            t_tb_nm: 0.85,
            sigma_t_tb: 0.03 * 0.85,
            cd_nm: 32.0,
            tmr: 2.0,
            sigma_tmr: 0.03 * 2.0,
            r_p_ohm: 5_000.0,
            delta_300: 4.0,
            ic0_ap2p_ua: 40.0,
            ic0_p2ap_ua: 55.0,
            tau0_ns: 0.5,
            r_load_p2ap_ohm: 1_000.0,
            r_load_ap2p_ohm: 10_000.0,
            tb_decay_nm: 0.05,
        }
    }
}

impl DeviceParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            (self.t_fl_nm, "t_fl_nm"),
            (self.t_tb_nm, "t_tb_nm"),
            (self.cd_nm, "cd_nm"),
            (self.tmr, "tmr"),
            (self.r_p_ohm, "r_p_ohm"),
            (self.delta_300, "delta_300"),
            (self.ic0_ap2p_ua, "ic0_ap2p_ua"),
            (self.ic0_p2ap_ua, "ic0_p2ap_ua"),
            (self.tau0_ns, "tau0_ns"),
            (self.tb_decay_nm, "tb_decay_nm"),
        ];
        for (v, name) in positive {
            check(v.is_finite() && v > 0.0, name, "must be finite and > 0")?;
        }
        let non_negative = [
            (self.sigma_t_fl, "sigma_t_fl"),
            (self.sigma_t_tb, "sigma_t_tb"),
            (self.sigma_tmr, "sigma_tmr"),
            (self.r_load_p2ap_ohm, "r_load_p2ap_ohm"),
            (self.r_load_ap2p_ohm, "r_load_ap2p_ohm"),
        ];
        for (v, name) in non_negative {
            check(v.is_finite() && v >= 0.0, name, "must be finite and >= 0")?;
        }
        Ok(())
    }

    /// Parameters with all process-variation sigmas set to zero.
    pub fn without_variation(mut self) -> Self {
        self.sigma_t_fl = 0.0;
        self.sigma_t_tb = 0.0;
        self.sigma_tmr = 0.0;
        self
    }
}

/// Magnetic state of the free layer. AP reads as bit 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MagState {
    P,
    AP,
}

impl MagState {
    pub fn bit(self) -> bool {
        self == MagState::AP
    }

    pub fn flipped(self) -> Self {
        match self {
            MagState::P => MagState::AP,
            MagState::AP => MagState::P,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Direction {
    #[cfg_attr(feature = "serde", serde(rename = "ap_to_p"))]
    ApToP,
    #[cfg_attr(feature = "serde", serde(rename = "p_to_ap"))]
    PToAp,
}

impl Direction {
    /// State the write switches away from.
    pub fn source(self) -> MagState {
        match self {
            Direction::ApToP => MagState::AP,
            Direction::PToAp => MagState::P,
        }
    }

    pub fn target(self) -> MagState {
        self.source().flipped()
    }

    /// Write direction that drives the device into `state`.
    pub fn towards(state: MagState) -> Self {
        match state {
            MagState::AP => Direction::PToAp,
            MagState::P => Direction::ApToP,
        }
    }
}

/// Ambient operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(deny_unknown_fields, default)
)]
pub struct Environment {
    pub temperature_k: f64,
    /// Signed fractional deviation applied to both write rails.
    pub v_variation_rate: f64,
}

impl Default for Environment {
    fn default() -> Self {
        Self::nominal()
    }
}

impl Environment {
    pub const fn nominal() -> Self {
        Self {
            temperature_k: NOMINAL_TEMPERATURE_K,
            v_variation_rate: 0.0,
        }
    }

    pub fn with_voltage(mut self, rate: f64) -> Self {
        self.v_variation_rate = rate;
        self
    }

    pub fn with_temperature(mut self, kelvin: f64) -> Self {
        self.temperature_k = kelvin;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check(
            self.temperature_k.is_finite() && self.temperature_k > 0.0,
            "temperature_k",
            "must be > 0",
        )?;
        check(
            (-0.5..=0.5).contains(&self.v_variation_rate),
            "v_variation_rate",
            "must lie in [-0.5, 0.5]",
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WritePulse {
    pub direction: Direction,
    pub current_ua: f64,
    pub width_ns: f64,
}

impl WritePulse {
    pub fn new(direction: Direction, current_ua: f64, width_ns: f64) -> Result<Self> {
        check(current_ua > 0.0, "current_ua", "must be > 0")?;
        check(width_ns > 0.0, "width_ns", "must be > 0")?;
        Ok(Self {
            direction,
            current_ua,
            width_ns,
        })
    }
}

/// One sampled device.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceInstance {
    /// The nominal parameters this device was sampled from.
    pub nominal: DeviceParams,
    pub t_fl_nm: f64,
    pub t_tb_nm: f64,
    pub tmr: f64,
    pub state: MagState,
    pub r_p_eff: f64,
    pub r_ap_eff: f64,
}

impl DeviceInstance {
    /// Device with exactly the nominal parameters, in state P.
    pub fn nominal(params: DeviceParams) -> Self {
        Self::from_sampled(params, params.t_fl_nm, params.t_tb_nm, params.tmr)
    }

    fn from_sampled(nominal: DeviceParams, t_fl_nm: f64, t_tb_nm: f64, tmr: f64) -> Self {
        let r_p_eff = nominal.r_p_ohm * exp((t_tb_nm - nominal.t_tb_nm) / nominal.tb_decay_nm);
        Self {
            nominal,
            t_fl_nm,
            t_tb_nm,
            tmr,
            state: MagState::P,
            r_p_eff,
            r_ap_eff: r_p_eff * (1.0 + tmr),
        }
    }

    fn volume_scale(&self) -> f64 {
        self.t_fl_nm / self.nominal.t_fl_nm
    }

    /// Thermal stability factor at `temperature_k`.
    pub fn delta(&self, temperature_k: f64) -> f64 {
        self.nominal.delta_300 * self.volume_scale() * REFERENCE_TEMPERATURE_K / temperature_k
    }

    /// Critical current for switching in `direction`, scaled by volume.
    pub fn ic0_ua(&self, direction: Direction) -> f64 {
        let nominal = match direction {
            Direction::ApToP => self.nominal.ic0_ap2p_ua,
            Direction::PToAp => self.nominal.ic0_p2ap_ua,
        };
        nominal * self.volume_scale()
    }

    pub fn resistance(&self, state: MagState) -> f64 {
        match state {
            MagState::P => self.r_p_eff,
            MagState::AP => self.r_ap_eff,
        }
    }

    /// Current actually delivered to the junction for `pulse` under `env`.
    pub fn effective_current_ua(&self, pulse: &WritePulse, env: &Environment) -> f64 {
        let r_load = match pulse.direction {
            Direction::ApToP => self.nominal.r_load_ap2p_ohm,
            Direction::PToAp => self.nominal.r_load_p2ap_ohm,
        };
        let r_state = self.resistance(pulse.direction.source());
        pulse.current_ua * (1.0 + env.v_variation_rate) * (self.nominal.r_p_ohm + r_load)
            / (r_state + r_load)
    }
}

fn gaussian(rng: &mut SimRng, mean: f64, sigma: f64, name: &'static str) -> Result<f64> {
    if sigma == 0.0 {
        return Ok(mean);
    }
    for _ in 0..MAX_REJECTIONS {
        let z: f64 = StandardNormal.sample(rng);
        let v = mean + sigma * z;
        if v > 0.0 {
            return Ok(v);
        }
    }
    Err(Error::PathologicalSigma(name))
}

/// Sample one device. With `process_variation` off the nominal values are
/// returned; otherwise t_FL, t_TB and TMR are drawn independently from their
/// Gaussians, resampling non-positive draws.
pub fn sample_device(
    params: &DeviceParams,
    process_variation: bool,
    seed: u64,
) -> Result<DeviceInstance> {
    params.validate()?;
    if !process_variation {
        return Ok(DeviceInstance::nominal(*params));
    }
    let mut rng = crate::rng::substream(seed, &[u64::from_le_bytes(*b"device\0\0")]);
    sample_device_with(params, &mut rng)
}

/// Like [`sample_device`] with variation on, drawing from a caller-owned stream.
pub fn sample_device_with(params: &DeviceParams, rng: &mut SimRng) -> Result<DeviceInstance> {
    let t_fl = gaussian(rng, params.t_fl_nm, params.sigma_t_fl, "t_fl_nm")?;
    let t_tb = gaussian(rng, params.t_tb_nm, params.sigma_t_tb, "t_tb_nm")?;
    let tmr = gaussian(rng, params.tmr, params.sigma_tmr, "tmr")?;
    Ok(DeviceInstance::from_sampled(*params, t_fl, t_tb, tmr))
}

/// Probability that `pulse` switches `device` under `env`.
///
/// Defined regardless of the device's current state.
pub fn switching_probability(
    device: &DeviceInstance,
    pulse: &WritePulse,
    env: &Environment,
) -> f64 {
    if pulse.width_ns <= 0.0 {
        return 0.0;
    }
    let i_eff = device.effective_current_ua(pulse, env);
    let ic0 = device.ic0_ua(pulse.direction);
    let barrier = device.delta(env.temperature_k) * (1.0 - i_eff / ic0);
    let tau = device.nominal.tau0_ns * exp(barrier.max(0.0));
    1.0 - exp(-pulse.width_ns / tau)
}

/// Apply one write. A pulse whose source state differs from the device's
/// state cannot switch it and returns `false`.
pub fn apply_write(
    device: &mut DeviceInstance,
    pulse: &WritePulse,
    env: &Environment,
    rng: &mut SimRng,
) -> bool {
    if device.state != pulse.direction.source() {
        return false;
    }
    let p = switching_probability(device, pulse, env);
    let switched = rng.random::<f64>() < p;
    if switched {
        device.state = pulse.direction.target();
    }
    switched
}

/// Bisect the pulse amplitude in `[0, 100 * Ic0]` until the switching
/// probability is within 1e-6 of `target_prob`.
pub fn calibrate_pulse(
    direction: Direction,
    target_prob: f64,
    width_ns: f64,
    device: &DeviceInstance,
    env: &Environment,
) -> Result<WritePulse> {
    check(
        target_prob > 0.0 && target_prob < 1.0,
        "target_prob",
        "must lie in (0, 1)",
    )?;
    check(width_ns > 0.0, "width_ns", "must be > 0")?;
    let prob = |current_ua: f64| {
        let pulse = WritePulse {
            direction,
            current_ua,
            width_ns,
        };
        switching_probability(device, &pulse, env)
    };
    let (mut lo, mut hi) = (0.0, 100.0 * device.ic0_ua(direction));
    if prob(lo) > target_prob + CALIBRATION_TOLERANCE
        || prob(hi) < target_prob - CALIBRATION_TOLERANCE
    {
        return Err(Error::Unreachable {
            target: target_prob,
        });
    }
    for _ in 0..CALIBRATION_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        let p = prob(mid);
        if fabs(p - target_prob) <= CALIBRATION_TOLERANCE && mid > 0.0 {
            return WritePulse::new(direction, mid, width_ns);
        }
        if p < target_prob {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Unreachable {
        target: target_prob,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::vec::Vec;

    fn nominal() -> DeviceInstance {
        DeviceInstance::nominal(DeviceParams::default())
    }

    fn half_pulse(direction: Direction) -> WritePulse {
        calibrate_pulse(direction, 0.5, 2.9, &nominal(), &Environment::nominal()).unwrap()
    }

    #[test]
    fn nominal_sampling_returns_table_values() {
        let d = sample_device(&DeviceParams::default(), false, 99).unwrap();
        assert_eq!(d.t_fl_nm, 1.3);
        assert_eq!(d.t_tb_nm, 0.85);
        assert_eq!(d.tmr, 2.0);
        assert_eq!(d.state, MagState::P);
        assert_eq!(d.r_p_eff, 5_000.0);
        assert_eq!(d.r_ap_eff, 15_000.0);
    }

    #[test]
    fn zero_sigma_equals_variation_off() {
        let p = DeviceParams::default().without_variation();
        assert_eq!(
            sample_device(&p, true, 5).unwrap(),
            sample_device(&p, false, 5).unwrap()
        );
    }

    #[test]
    fn sampled_thickness_statistics() {
        let p = DeviceParams::default();
        let mut rng = crate::rng::substream(2024, &[0]);
        let n = 100_000;
        let xs: Vec<f64> = (0..n)
            .map(|_| sample_device_with(&p, &mut rng).unwrap().t_fl_nm)
            .collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
        assert!((mean - 1.3).abs() < 0.001, "mean {mean}");
        assert!((var.sqrt() - 0.039).abs() < 0.002, "std {}", var.sqrt());
    }

    #[test]
    fn sampling_is_deterministic_and_keeps_tmr_invariant() {
        let p = DeviceParams::default();
        let a = sample_device(&p, true, 11).unwrap();
        assert_eq!(a, sample_device(&p, true, 11).unwrap());
        assert_ne!(a, sample_device(&p, true, 12).unwrap());
        assert!((a.r_ap_eff - a.r_p_eff * (1.0 + a.tmr)).abs() < 1e-9);
    }

    #[test]
    fn pathological_sigma_is_rejected() {
        // A Gaussian sitting entirely below zero can never produce a
        // physical thickness.
        let mut rng = crate::rng::substream(1, &[0]);
        assert_eq!(
            gaussian(&mut rng, -10.0, 1e-3, "t_fl_nm"),
            Err(Error::PathologicalSigma("t_fl_nm"))
        );
    }

    #[test]
    fn invalid_params_rejected() {
        let p = DeviceParams {
            t_tb_nm: 0.0,
            ..DeviceParams::default()
        };
        assert!(matches!(
            sample_device(&p, false, 0),
            Err(Error::InvalidParameter {
                name: "t_tb_nm",
                ..
            })
        ));
    }

    #[test]
    fn ln2_point_is_half() {
        let d = nominal();
        let env = Environment::nominal();
        let pulse = half_pulse(Direction::ApToP);
        // width / tau == ln 2 exactly when P = 0.5; check via the closed form.
        let i_eff = d.effective_current_ua(&pulse, &env);
        let tau =
            0.5 * exp(d.delta(env.temperature_k) * (1.0 - i_eff / d.ic0_ua(Direction::ApToP)));
        assert!((2.9 / tau - core::f64::consts::LN_2).abs() < 1e-5);
        let p = switching_probability(&d, &pulse, &env);
        assert!((p - 0.5).abs() <= 1e-6);
    }

    #[test]
    fn zero_width_never_switches() {
        let pulse = WritePulse {
            direction: Direction::PToAp,
            current_ua: 1e3,
            width_ns: 0.0,
        };
        assert_eq!(
            switching_probability(&nominal(), &pulse, &Environment::nominal()),
            0.0
        );
    }

    #[test]
    fn saturated_current_clamps_tau_to_tau0() {
        let params = DeviceParams {
            tau0_ns: 1.0,
            ..DeviceParams::default()
        };
        let d = DeviceInstance::nominal(params);
        let pulse = WritePulse::new(Direction::ApToP, 1e4, 2.9).unwrap();
        let p = switching_probability(&d, &pulse, &Environment::nominal());
        // 1 - e^-2.9
        assert!((p - 0.944_977_1).abs() < 1e-6, "{p}");
    }

    #[test]
    fn certain_write_switches() {
        let mut d = nominal();
        d.state = MagState::AP;
        let pulse = WritePulse::new(Direction::ApToP, 1e4, 50.0).unwrap();
        let mut rng = crate::rng::substream(0, &[0]);
        assert!(apply_write(
            &mut d,
            &pulse,
            &Environment::nominal(),
            &mut rng
        ));
        assert_eq!(d.state, MagState::P);
    }

    #[test]
    fn wrong_direction_is_noop() {
        let mut d = nominal();
        let pulse = WritePulse::new(Direction::ApToP, 1e4, 50.0).unwrap();
        let mut rng = crate::rng::substream(0, &[0]);
        assert!(!apply_write(
            &mut d,
            &pulse,
            &Environment::nominal(),
            &mut rng
        ));
        assert_eq!(d.state, MagState::P);
    }

    #[test]
    fn calibrated_half_pulse_switches_half_the_time() {
        let pulse = half_pulse(Direction::ApToP);
        let env = Environment::nominal();
        let mut rng = crate::rng::substream(77, &[0]);
        let trials = 1_000_000;
        let mut hits = 0usize;
        for _ in 0..trials {
            let mut d = nominal();
            d.state = MagState::AP;
            hits += apply_write(&mut d, &pulse, &env, &mut rng) as usize;
        }
        let frac = hits as f64 / trials as f64;
        assert!((frac - 0.5).abs() <= 0.0015, "{frac}");
    }

    #[test]
    fn calibration_amplitudes_differ_per_direction() {
        let a = half_pulse(Direction::ApToP);
        let b = half_pulse(Direction::PToAp);
        assert!((a.current_ua - b.current_ua).abs() > 1.0);
    }

    #[test]
    fn near_certain_target_needs_more_current() {
        let env = Environment::nominal();
        let half = calibrate_pulse(Direction::PToAp, 0.5, 5.0, &nominal(), &env).unwrap();
        let sure = calibrate_pulse(Direction::PToAp, 0.9999, 5.0, &nominal(), &env).unwrap();
        assert!(sure.current_ua > half.current_ua);
        let p = switching_probability(&nominal(), &sure, &env);
        assert!((p - 0.9999).abs() <= 1e-6);
    }

    #[test]
    fn unreachable_target_errors() {
        let env = Environment::nominal();
        // tau >= tau0 caps P at 1 - e^{-0.1/0.5}.
        assert!(matches!(
            calibrate_pulse(Direction::PToAp, 0.9, 0.1, &nominal(), &env),
            Err(Error::Unreachable { .. })
        ));
        assert!(calibrate_pulse(Direction::PToAp, 1.0, 2.9, &nominal(), &env).is_err());
    }

    #[test]
    fn temperature_raises_both_directions() {
        let (a, b) = (half_pulse(Direction::ApToP), half_pulse(Direction::PToAp));
        let cold = Environment::nominal().with_temperature(280.15);
        let hot = Environment::nominal().with_temperature(320.15);
        for pulse in [a, b] {
            let pc = switching_probability(&nominal(), &pulse, &cold);
            let ph = switching_probability(&nominal(), &pulse, &hot);
            assert!(ph > 0.5 && pc < 0.5, "{pc} {ph}");
        }
    }

    #[test]
    fn voltage_shifts_both_directions_the_same_way() {
        let (a, b) = (half_pulse(Direction::ApToP), half_pulse(Direction::PToAp));
        let up = Environment::nominal().with_voltage(0.05);
        let down = Environment::nominal().with_voltage(-0.05);
        for pulse in [a, b] {
            assert!(switching_probability(&nominal(), &pulse, &up) > 0.5);
            assert!(switching_probability(&nominal(), &pulse, &down) < 0.5);
        }
    }

    proptest! {
        #[test]
        fn monotone_in_current_and_width(
            i in 0.1f64..200.0, di in 0.0f64..50.0,
            w in 0.01f64..20.0, dw in 0.0f64..10.0,
            t in 250.0f64..400.0, v in -0.5f64..0.5,
            up in proptest::bool::ANY,
        ) {
            let d = nominal();
            let dir = if up { Direction::PToAp } else { Direction::ApToP };
            let env = Environment { temperature_k: t, v_variation_rate: v };
            let base = switching_probability(&d, &WritePulse { direction: dir, current_ua: i, width_ns: w }, &env);
            let more_i = switching_probability(&d, &WritePulse { direction: dir, current_ua: i + di, width_ns: w }, &env);
            let more_w = switching_probability(&d, &WritePulse { direction: dir, current_ua: i, width_ns: w + dw }, &env);
            prop_assert!((0.0..=1.0).contains(&base));
            prop_assert!(more_i >= base);
            prop_assert!(more_w >= base);
        }
    }
}
