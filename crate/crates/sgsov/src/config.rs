//! JSON run configuration and the named parameter sets used by the tests.

use crate::model_core::ModelParams;
use crate::oracle::Tolerances;
use crate::scalar::{c, Cx, Real};
use crate::{Result, SgError};
use serde::{Deserialize, Serialize};

/// A complex number in JSON as `[re, im]`.
pub type JsonComplex = [f64; 2];

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub p: usize,
    #[serde(default = "default_p_prime")]
    pub p_prime: usize,
    pub kappa: Vec<JsonComplex>,
    pub xi: Vec<JsonComplex>,
    #[serde(default)]
    pub u: Option<Vec<JsonComplex>>,
    #[serde(default)]
    pub v: Option<Vec<JsonComplex>>,
}

fn default_p_prime() -> usize {
    2
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub model: ModelConfig,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Uniform tolerance; overrides every pass threshold.
    #[serde(default)]
    pub tol: Option<f64>,
    /// Per-check overrides applied on top of the defaults.
    #[serde(default)]
    pub tolerances: Option<Tolerances>,
    #[serde(default)]
    pub output: Option<OutputConfig>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub path: std::path::PathBuf,
    pub format: OutputFormat,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| SgError::Config(e.to_string()))
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| SgError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Tolerances in effect: uniform `tol` wins over per-check overrides.
    pub fn effective_tolerances(&self) -> Tolerances {
        match self.tol {
            Some(t) => Tolerances::uniform(t),
            None => self.tolerances.clone().unwrap_or_default(),
        }
    }
}

fn to_cx<R: Real>(v: &[JsonComplex]) -> Vec<Cx<R>> {
    v.iter().map(|z| c(z[0], z[1])).collect()
}

impl ModelConfig {
    pub fn build<R: Real>(&self) -> Result<ModelParams<R>> {
        ModelParams::new(self.p, self.p_prime, to_cx(&self.kappa), to_cx(&self.xi), self.u.as_deref().map(to_cx), self.v.as_deref().map(to_cx))
    }

    fn imaginary(p: usize, kappa: &[f64], xi: &[f64]) -> Self {
        Self { p, p_prime: 2, kappa: kappa.iter().map(|k| [0.0, *k]).collect(), xi: xi.iter().map(|x| [*x, 0.0]).collect(), u: None, v: None }
    }

    /// N = 3, p = 3, inhomogeneous.
    pub fn cfg_a() -> Self {
        Self::imaginary(3, &[1.1, 1.3, 0.7], &[1.0, 1.2, 0.9])
    }

    /// N = 2, p = 3.
    pub fn cfg_b() -> Self {
        Self::imaginary(3, &[1.1, 0.8], &[1.0, 1.3])
    }

    /// Single site, p = 3.
    pub fn single_site() -> Self {
        Self::imaginary(3, &[1.1], &[1.0])
    }

    /// N = 3, p = 3, homogeneous.
    pub fn homogeneous() -> Self {
        Self::imaginary(3, &[1.1, 1.1, 1.1], &[1.0, 1.0, 1.0])
    }

    /// N = 3, p = 5.
    pub fn stretch() -> Self {
        Self::imaginary(5, &[1.1, 1.3, 0.7], &[1.0, 1.2, 0.9])
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "cfg-a" => Some(Self::cfg_a()),
            "cfg-b" => Some(Self::cfg_b()),
            "single-site" => Some(Self::single_site()),
            "homogeneous" => Some(Self::homogeneous()),
            "stretch" => Some(Self::stretch()),
            _ => None,
        }
    }
}
