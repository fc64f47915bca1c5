//! Configuration documents, one per subcommand. Unknown keys are rejected and
//! `rho`, `order` and `sigma` have no defaults.

use std::path::Path;

use serde::Deserialize;
use wellfilt::signals::SignalSpec;
use wellfilt::GridBox;

use crate::{CliError, EXIT_CONFIG};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    pub lo: Vec<i64>,
    pub hi: Vec<i64>,
}

impl BoxSpec {
    pub fn grid(&self) -> Result<GridBox, CliError> {
        GridBox::new(self.lo.clone(), self.hi.clone()).map_err(|e| CliError::new(EXIT_CONFIG, format!("bad box: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerateConfig {
    pub signal: SignalSpec,
    pub domain: BoxSpec,
    pub sigma: f64,
    pub seed: u64,
    #[serde(default)]
    pub signal_out: Option<String>,
    #[serde(default)]
    pub observations_out: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateConfig {
    /// ZDF1 file of observations.
    pub observations: String,
    pub rho: f64,
    pub order: usize,
    /// Required by `predict`, rejected by `denoise`.
    #[serde(default)]
    pub kappa: Option<usize>,
    #[serde(default)]
    pub anchors: Option<Vec<Vec<i64>>>,
    /// Every point of the box is an anchor.
    #[serde(default)]
    pub anchor_box: Option<BoxSpec>,
    #[serde(default)]
    pub estimates_out: Option<String>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub max_iter: Option<usize>,
}

/// A certificate construction, built bottom-up.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CertSpec {
    ExpPoly {
        terms: Vec<wellfilt::signals::TermSpec>,
    },
    QuasiStable {
        terms: Vec<wellfilt::signals::TermSpec>,
        kappa: usize,
    },
    Polynomial {
        dim: usize,
        degree: usize,
    },
    /// Nearest-neighbour averaging in `dim >= 2` dimensions.
    Harmonic {
        #[serde(default = "two")]
        dim: usize,
        #[serde(default = "one")]
        c24: usize,
    },
    Modulate {
        inner: Box<CertSpec>,
        omega: Vec<f64>,
        #[serde(default)]
        phase: f64,
    },
    Lift {
        inner: Box<CertSpec>,
        dim: usize,
    },
    Tensor {
        a: Box<CertSpec>,
        b: Box<CertSpec>,
    },
    Combine {
        parts: Vec<CertSpec>,
        /// `[re, im]` per part.
        lambdas: Vec<[f64; 2]>,
    },
}

fn one() -> usize {
    1
}

fn two() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifyConfig {
    pub order: usize,
    pub certificate: CertSpec,
    /// Centre of the test box; defaults to the origin.
    #[serde(default)]
    pub anchor: Option<Vec<i64>>,
    /// Half-width of the test box; defaults to `order`.
    #[serde(default)]
    pub radius: Option<usize>,
    #[serde(default)]
    pub filter_out: Option<String>,
    #[serde(default)]
    pub report_out: Option<String>,
}

pub fn load<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::new(EXIT_CONFIG, format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::new(EXIT_CONFIG, format!("invalid config {}: {e}", path.display())))
}
