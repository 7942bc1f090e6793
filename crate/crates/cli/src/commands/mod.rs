pub mod build_rational;
pub mod hodograph;
pub mod list;
pub mod simulate;
pub mod verify;

use std::collections::BTreeMap;

use magflow::catalog::ExampleParams;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliResult;

/// One audited number: the measured value, its bound and the verdict.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub value: f64,
    pub threshold: f64,
    /// `"upper"`: pass iff value <= threshold. `"lower"`: pass iff value > threshold.
    pub bound: &'static str,
    pub pass: bool,
}

impl Check {
    pub fn at_most(value: f64, threshold: f64) -> Self {
        Self {
            value,
            threshold,
            bound: "upper",
            pass: value <= threshold,
        }
    }

    pub fn above(value: f64, threshold: f64) -> Self {
        Self {
            value,
            threshold,
            bound: "lower",
            pass: value > threshold,
        }
    }

    pub fn equal(value: f64, expected: f64) -> Self {
        Self {
            value,
            threshold: expected,
            bound: "equal",
            pass: value == expected,
        }
    }
}

pub type Checks = BTreeMap<String, Check>;

pub fn failed(checks: &Checks) -> Vec<String> {
    checks
        .iter()
        .filter(|(_, c)| !c.pass)
        .map(|(k, _)| k.clone())
        .collect()
}

#[derive(Debug, Clone, Default, clap::Args)]
pub struct ParamArgs {
    /// Field strength of ex1.
    #[arg(long = "b")]
    pub b: Option<f64>,
    /// Constant gamma of ex4, ex5 and ex6.
    #[arg(long = "gamma")]
    pub gamma: Option<f64>,
    /// Energy constant C of ex4, ex5 and ex6 (level H = C/2).
    #[arg(long = "c")]
    pub c: Option<f64>,
}

impl ParamArgs {
    pub fn resolve(&self, config: &RunConfig) -> CliResult<ExampleParams> {
        let base = config.params.unwrap_or_default();
        let p = ExampleParams {
            b: self.b.unwrap_or(base.b),
            gamma: self.gamma.unwrap_or(base.gamma),
            c: self.c.unwrap_or(base.c),
        };
        p.validate()?;
        Ok(p)
    }
}

/// Converts a comma-separated flag value into a fixed-size tuple.
pub fn tuple<T: Copy, const N: usize>(v: Option<Vec<T>>, flag: &str) -> CliResult<Option<[T; N]>> {
    match v {
        None => Ok(None),
        Some(v) => <[T; N]>::try_from(v.as_slice()).map(Some).map_err(|_| {
            crate::error::CliError::Config(format!(
                "--{flag} takes {N} comma-separated values, got {}",
                v.len()
            ))
        }),
    }
}
