//! JSON run configuration. Every section is optional; command-line flags win.

use std::path::{Path, PathBuf};

use magflow::catalog::ExampleParams;
use magflow::legendre::BundleDescriptor;
use serde::Deserialize;

use crate::error::{CliError, CliResult};
use crate::output::read_file;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub tol: Option<f64>,
    pub params: Option<ExampleParams>,
    pub bundles: Vec<PathBuf>,
    pub simulate: SimulateSection,
    pub verify: VerifySection,
    pub hodograph: HodographSection,
    pub build_rational: Option<BundleDescriptor>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateSection {
    pub example: Option<String>,
    pub phase: Option<[f64; 4]>,
    pub q: Option<[f64; 2]>,
    pub phi: Option<f64>,
    pub t_end: Option<f64>,
    pub method: Option<MethodName>,
    pub step: Option<f64>,
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub record_every: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum MethodName {
    Rk4,
    Rk45,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySection {
    pub example: Option<String>,
    pub corrupt: Option<f64>,
    pub t_end: Option<f64>,
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HodographSection {
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub delta: Option<f64>,
    pub epsilon: Option<f64>,
    pub zeta: Option<f64>,
    pub x: Option<[f64; 2]>,
    pub y: Option<[f64; 2]>,
    pub n: Option<[usize; 2]>,
    pub h: Option<f64>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = read_file(path)?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}
