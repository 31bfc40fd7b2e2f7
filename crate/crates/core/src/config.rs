//! JSON configuration schema shared by the CLI and the test harnesses.
//!
//! A config object carries the scalar parameters and, optionally, the
//! k-coupled coefficient tables:
//!
//! ```json
//! {
//!   "n": 3, "a": 0.0, "b": 0.25, "nu": 1.0, "alpha": 2.4, "beta": 2.4,
//!   "kappa":    [[1.0, 0.5], [0.6, 1.0]],
//!   "alpha_ij": [[2.4, 2.0], [2.8, 2.4]],
//!   "beta_ij":  [[2.4, 2.8], [2.0, 2.4]]
//! }
//! ```

use serde::Deserialize;

use crate::params::{CouplingSpec, ProblemParams};
use crate::Result;

/// Deserialized configuration object.
#[derive(Debug, Clone, Deserialize)]
pub struct Config {
    pub n: u32,
    pub a: f64,
    pub b: f64,
    pub nu: f64,
    pub alpha: f64,
    pub beta: f64,
    #[serde(default)]
    pub kappa: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub alpha_ij: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub beta_ij: Option<Vec<Vec<f64>>>,
}

impl Config {
    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Builds the validated parameters.
    pub fn params(&self) -> Result<ProblemParams> {
        ProblemParams::new(self.n, self.a, self.b, self.nu, self.alpha, self.beta)
    }

    /// Builds the k-coupled spec when the tables are present.
    pub fn coupling_spec(&self) -> Result<Option<CouplingSpec>> {
        match (&self.kappa, &self.alpha_ij, &self.beta_ij) {
            (Some(k), Some(al), Some(be)) => {
                let spec = CouplingSpec::new(self.params()?, k.clone(), al.clone(), be.clone())?;
                Ok(Some(spec))
            }
            (None, None, None) => Ok(None),
            _ => Err(crate::Error::ConstraintViolation(
                "kappa, alpha_ij and beta_ij must be given together".into(),
            )),
        }
    }
}
