use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Gaussian,
    Binomial,
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" | "normal" => Ok(Family::Gaussian),
            "binomial" | "logistic" => Ok(Family::Binomial),
            other => Err(Error::Config(format!("unknown family `{other}`"))),
        }
    }
}

/// Convergence controls shared by every fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Control {
    /// Convergence threshold on the largest curvature-weighted squared
    /// coefficient change `aⱼ Δβⱼ²` in a sweep (and between IRLS steps),
    /// relative to the variance of the response. `aⱼ` is the weighted
    /// variance of column `j`, so this is the largest drop in the objective
    /// any single coordinate update can still produce.
    pub tol: f64,
    /// IRLS iterations (binomial only).
    pub max_outer_iters: usize,
    /// Coordinate-descent sweeps per (inner) solve.
    pub max_cd_sweeps: usize,
}

impl Default for Control {
    fn default() -> Self {
        Control {
            tol: 1e-7,
            max_outer_iters: 100,
            max_cd_sweeps: 1000,
        }
    }
}

/// Everything needed for one penalized fit apart from the data.
#[derive(Debug, Clone, PartialEq)]
pub struct FitSpec {
    pub family: Family,
    /// Elastic-net mixing: 1 is lasso, 0 is ridge.
    pub alpha: f64,
    pub lambda: f64,
    pub standardize: bool,
    pub tol: f64,
    pub max_outer_iters: usize,
    pub max_cd_sweeps: usize,
}

impl Default for FitSpec {
    fn default() -> Self {
        let c = Control::default();
        FitSpec {
            family: Family::Gaussian,
            alpha: 1.0,
            lambda: 0.0,
            standardize: true,
            tol: c.tol,
            max_outer_iters: c.max_outer_iters,
            max_cd_sweeps: c.max_cd_sweeps,
        }
    }
}

impl FitSpec {
    pub fn control(&self) -> Control {
        Control {
            tol: self.tol,
            max_outer_iters: self.max_outer_iters,
            max_cd_sweeps: self.max_cd_sweeps,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::Config(format!("alpha must lie in [0, 1], got {}", self.alpha)));
        }
        if !(self.lambda >= 0.0) || self.lambda.is_infinite() {
            return Err(Error::Config(format!(
                "lambda must be finite and nonnegative, got {}",
                self.lambda
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Config(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_cd_sweeps == 0 || self.max_outer_iters == 0 {
            return Err(Error::Config("iteration limits must be positive".into()));
        }
        Ok(())
    }
}
