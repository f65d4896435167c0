// SPDX-License-Identifier: Apache-2.0

//! Command-line companion of `mtj-trng-core`: bitstream files, the NIST
//! SP 800-22 battery, process/voltage/temperature sweeps and the option
//! pricing benchmark driver.

pub mod bench;
pub mod bitfile;
pub mod cli;
pub mod config;
mod error;
pub mod nist;
pub mod sweep;

pub use error::{Error, Result};
