//! TOML run configuration.
//!
//! ```toml
//! seed = 7
//! output_path = "out.csv"
//!
//! [problem]
//! name = "paper_example"
//! [problem.parameters]
//! lg = 0.01
//!
//! [discretization]
//! step = 1e-3
//! quadrature = "trapezoid"
//!
//! [picard]
//! tolerance = 1e-10
//! max_iterations = 200
//! ```
//!
//! Every section and key is optional; unknown keys are errors.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use impulsive_core::model::catalog::{self, CatalogEntry};
use impulsive_core::solver::{Discretization, PicardControl, Quadrature};
use serde::Deserialize;

pub const DEFAULT_PROBLEM: &str = "paper_example";
pub const DEFAULT_STEP: f64 = 1e-3;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("`{key}`: {reason}")]
    Invalid { key: String, reason: String },
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub problem: ProblemSection,
    #[serde(default)]
    pub discretization: DiscretizationSection,
    #[serde(default)]
    pub picard: PicardSection,
    #[serde(default)]
    pub seed: u64,
    pub output_path: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    #[serde(default = "default_problem")]
    pub name: String,
    #[serde(default)]
    pub parameters: BTreeMap<String, f64>,
}

impl Default for ProblemSection {
    fn default() -> Self {
        Self {
            name: default_problem(),
            parameters: BTreeMap::new(),
        }
    }
}

fn default_problem() -> String {
    DEFAULT_PROBLEM.into()
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DiscretizationSection {
    #[serde(default = "default_step")]
    pub step: f64,
    #[serde(default = "default_quadrature")]
    pub quadrature: String,
}

impl Default for DiscretizationSection {
    fn default() -> Self {
        Self {
            step: DEFAULT_STEP,
            quadrature: default_quadrature(),
        }
    }
}

fn default_step() -> f64 {
    DEFAULT_STEP
}

fn default_quadrature() -> String {
    Quadrature::Trapezoid.name().into()
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PicardSection {
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
}

impl Default for PicardSection {
    fn default() -> Self {
        Self {
            tolerance: default_tolerance(),
            max_iterations: default_max_iterations(),
        }
    }
}

fn default_tolerance() -> f64 {
    PicardControl::default().tolerance
}

fn default_max_iterations() -> usize {
    PicardControl::default().max_iterations
}

fn invalid(key: impl Into<String>, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.into(),
        reason: reason.into(),
    }
}

/// A validated configuration with its catalog entry instantiated.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: RunConfig,
    pub entry: CatalogEntry,
    pub disc: Discretization,
    pub control: PicardControl,
}

impl RunConfig {
    pub fn from_toml(text: &str, origin: &Path) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text, path)
    }

    pub fn resolve(self) -> Result<Resolved, ConfigError> {
        let step = self.discretization.step;
        if !(step > 0.0 && step.is_finite()) {
            return Err(invalid("discretization.step", format!("must be positive, got {step}")));
        }
        let quadrature = Quadrature::from_name(&self.discretization.quadrature).ok_or_else(|| {
            invalid(
                "discretization.quadrature",
                format!(
                    "unknown rule `{}` (available: trapezoid)",
                    self.discretization.quadrature
                ),
            )
        })?;
        let tol = self.picard.tolerance;
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(invalid("picard.tolerance", format!("must be positive, got {tol}")));
        }
        if self.picard.max_iterations == 0 {
            return Err(invalid("picard.max_iterations", "must be at least 1"));
        }
        let base = catalog::entry(&self.problem.name).ok_or_else(|| {
            invalid(
                "problem.name",
                format!(
                    "unknown problem `{}` (available: {})",
                    self.problem.name,
                    catalog::names().join(", ")
                ),
            )
        })?;
        let entry = base.with_parameters(&self.problem.parameters).map_err(|e| match e {
            impulsive_core::Error::Parameter { name, reason } => invalid(format!("problem.parameters.{name}"), reason),
            other => invalid("problem.parameters", other.to_string()),
        })?;
        Ok(Resolved {
            disc: Discretization { step, quadrature },
            control: PicardControl {
                tolerance: tol,
                max_iterations: self.picard.max_iterations,
            },
            entry,
            config: self,
        })
    }
}
