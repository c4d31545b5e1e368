use serde::{Deserialize, Serialize};

use super::spec::Family;
use crate::data::DesignMatrix;
use crate::error::{Error, Result};

/// Outcome of one penalized fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub family: Family,
    pub alpha: f64,
    pub lambda: f64,
    pub intercept: f64,
    /// One coefficient per design column, on the original column scale.
    pub coefficients: Vec<f64>,
    pub n_nonzero_penalized: usize,
    /// Penalized objective at the solution.
    pub objective: f64,
    pub converged: bool,
    /// Coordinate-descent sweeps, summed over IRLS iterations.
    pub sweeps: usize,
    /// IRLS iterations (1 for Gaussian fits).
    pub outer_iterations: usize,
    /// Objective after each sweep (Gaussian) or IRLS step (binomial).
    pub objective_trace: Vec<f64>,
    /// Some linear predictor reached the ±30 cap, which signals
    /// (quasi-)separation in a binomial fit.
    pub separation: bool,
}

impl FitResult {
    pub fn intercept_only(family: Family, alpha: f64, lambda: f64, intercept: f64, n_cols: usize) -> Self {
        FitResult {
            family,
            alpha,
            lambda,
            intercept,
            coefficients: vec![0.0; n_cols],
            n_nonzero_penalized: 0,
            objective: f64::NAN,
            converged: true,
            sweeps: 0,
            outer_iterations: 0,
            objective_trace: Vec::new(),
            separation: false,
        }
    }

    /// Indices of nonzero coefficients.
    pub fn support(&self) -> Vec<usize> {
        self.coefficients
            .iter()
            .enumerate()
            .filter(|(_, &b)| b != 0.0)
            .map(|(j, _)| j)
            .collect()
    }

    pub fn to_document(&self, x: &DesignMatrix) -> FitDocument {
        FitDocument {
            family: self.family,
            alpha: self.alpha,
            lambda: self.lambda,
            intercept: self.intercept,
            coefficients: self
                .coefficients
                .iter()
                .enumerate()
                .filter(|(_, &v)| v != 0.0)
                .map(|(j, &value)| CoefficientEntry {
                    column: j,
                    name: x.name(j).to_string(),
                    value,
                })
                .collect(),
            n_nonzero: self.n_nonzero_penalized,
            converged: self.converged,
            objective: self.objective,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientEntry {
    pub column: usize,
    pub name: String,
    pub value: f64,
}

/// JSON form of a [`FitResult`]. Zero coefficients are omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDocument {
    pub family: Family,
    pub alpha: f64,
    pub lambda: f64,
    pub intercept: f64,
    pub coefficients: Vec<CoefficientEntry>,
    pub n_nonzero: usize,
    pub converged: bool,
    pub objective: f64,
}

impl FitDocument {
    /// Rebuild a dense coefficient vector for `x`, matching columns by name.
    pub fn to_fit(&self, x: &DesignMatrix) -> Result<FitResult> {
        let mut fit = FitResult::intercept_only(self.family, self.alpha, self.lambda, self.intercept, x.n_cols());
        for c in &self.coefficients {
            let j = x
                .column_index(&c.name)
                .ok_or_else(|| Error::Input(format!("fit column `{}` is not in the design", c.name)))?;
            fit.coefficients[j] = c.value;
        }
        fit.n_nonzero_penalized = fit
            .coefficients
            .iter()
            .enumerate()
            .filter(|(j, &b)| b != 0.0 && x.is_penalized(*j))
            .count();
        fit.converged = self.converged;
        fit.objective = self.objective;
        Ok(fit)
    }
}
