// SPDX-License-Identifier: Apache-2.0

//! Behavioral model of STT-MTJ true random number generators.
//!
//! The crate is `no_std` (with `alloc`) and holds only the algorithmic
//! pieces: the stochastic device model, the generator state machines, the
//! closed-form Markov analysis, marginal entropy estimators and the
//! custom-instruction / option-pricing cost model. File formats, the NIST
//! battery, sweeps and the command line live in the `mtj-trng` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod device;
pub mod entropy;
mod error;
pub mod markov;
pub mod rng;
pub mod system;
pub mod trng;

pub use device::{
    apply_write, calibrate_pulse, sample_device, switching_probability, DeviceInstance,
    DeviceParams, Direction, Environment, MagState, WritePulse,
};
pub use entropy::{min_entropy, sampling_band, shannon_entropy, EntropyBand, EntropyReport};
pub use error::Error;
pub use markov::{FlipProbs, SteadyState};
pub use system::{BackendKind, BitSource, OptionSpec, RngBackend, RngUnit};
pub use trng::{
    generate_bitstream, predicted_output, BitStream, CycleTiming, Generator, GeneratorConfig,
    OutputModel, PulseCalibration, UnitModel, Variant,
};

pub type Result<T> = core::result::Result<T, Error>;
