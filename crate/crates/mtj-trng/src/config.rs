// SPDX-License-Identifier: Apache-2.0

//! JSON run configuration. Unknown keys are rejected at every level.

use std::fs;
use std::path::Path;

use mtj_trng_core::system::{CostModel, OptionSpec, PipelineConfig, RngBackend};
use mtj_trng_core::{Environment, GeneratorConfig};
use serde::{Deserialize, Serialize};

use crate::bitfile::Format;
use crate::error::{io_err, Error, Result};
use crate::nist::SuiteParams;
use crate::sweep::SweepSpec;

/// Environment variable naming a config file when `--config` is absent.
pub const CONFIG_ENV: &str = "MTJ_TRNG_CONFIG";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BenchSettings {
    pub option: OptionSpec,
    pub costs: CostModel,
    pub pipeline: PipelineConfig,
    pub stdlib: RngBackend,
    pub boost: RngBackend,
    pub trng: RngBackend,
    pub paths: Vec<u64>,
}

impl Default for BenchSettings {
    fn default() -> Self {
        Self {
            option: OptionSpec::default(),
            costs: CostModel::default(),
            pipeline: PipelineConfig::default(),
            stdlib: RngBackend::stdlib(),
            boost: RngBackend::boost_lagfib(),
            trng: RngBackend::trng(),
            paths: mtj_trng_core::system::decade_grid(2, 6),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub generator: GeneratorConfig,
    pub environment: Environment,
    /// The sweep's own `generator` entry is replaced by the top-level one.
    pub sweep: SweepSpec,
    pub nist: SuiteParams,
    pub nist_groups: usize,
    pub bench: BenchSettings,
    pub format: Option<Format>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: None,
            generator: GeneratorConfig::default(),
            environment: Environment::nominal(),
            sweep: SweepSpec::default(),
            nist: SuiteParams::default(),
            nist_groups: 10,
            bench: BenchSettings::default(),
            format: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        Self::from_json(&text).map_err(|source| Error::Config {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}
