//! Elastic-net penalized Gaussian and binomial GLMs on a sparse design.
//!
//! Objectives, for `N = Σ wᵢ` (row weights default to 1):
//!
//! * Gaussian: `(1/2N) Σ wᵢ (yᵢ − μᵢ)² + λ P(β)`
//! * Binomial: `(1/N) Σ wᵢ [−yᵢ μᵢ + log(1 + e^{μᵢ})] + λ P(β)`
//!
//! with `P(β) = Σⱼ [(1−α)/2 · sⱼ² βⱼ² + α · sⱼ |βⱼ|]` over penalized columns.
//! `sⱼ` is the column's weighted standard deviation when standardizing and 1
//! otherwise, so coefficients are always reported on the original column
//! scale. The intercept is never penalized.

mod problem;
mod result;
mod spec;

pub use problem::{soft_threshold, GlmProblem};
pub use result::{CoefficientEntry, FitDocument, FitResult};
pub use spec::{Control, Family, FitSpec};

use crate::data::DesignMatrix;
use crate::error::Result;

/// Fit a penalized Gaussian model at `spec.lambda`.
pub fn fit_gaussian(x: &DesignMatrix, y: &[f64], spec: &FitSpec) -> Result<FitResult> {
    let spec = FitSpec {
        family: Family::Gaussian,
        ..spec.clone()
    };
    GlmProblem::from_spec(x, y, None, &spec)?.fit(spec.lambda, &spec.control(), None)
}

/// Fit a penalized logistic model at `spec.lambda` by IRLS.
pub fn fit_binomial(x: &DesignMatrix, y01: &[f64], spec: &FitSpec) -> Result<FitResult> {
    let spec = FitSpec {
        family: Family::Binomial,
        ..spec.clone()
    };
    GlmProblem::from_spec(x, y01, None, &spec)?.fit(spec.lambda, &spec.control(), None)
}

/// Smallest λ at which every penalized coefficient is zero.
pub fn lambda_max(x: &DesignMatrix, response: &[f64], spec: &FitSpec) -> Result<f64> {
    GlmProblem::from_spec(x, response, None, spec)?.lambda_max()
}

/// Linear predictor `b₀ + Xβ`.
pub fn predict_linear(fit: &FitResult, x: &DesignMatrix) -> Vec<f64> {
    let mut eta = x.mul_vec(&fit.coefficients);
    for e in &mut eta {
        *e += fit.intercept;
    }
    eta
}

/// Logistic probabilities `1 / (1 + e^{−μ})`.
pub fn predict_prob(fit: &FitResult, x: &DesignMatrix) -> Vec<f64> {
    predict_linear(fit, x).into_iter().map(logistic).collect()
}

#[inline]
pub fn logistic(mu: f64) -> f64 {
    if mu >= 0.0 {
        1.0 / (1.0 + (-mu).exp())
    } else {
        let e = mu.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^μ)` without overflow.
#[inline]
pub(crate) fn softplus(mu: f64) -> f64 {
    mu.max(0.0) + (-mu.abs()).exp().ln_1p()
}

/// Shrinkage diagnostic `1 − ‖β_λ‖₁ / ‖β_ref‖₁` over penalized columns,
/// typically against an unpenalized reference fit.
pub fn shrinkage_fraction(fit: &FitResult, reference: &FitResult, x: &DesignMatrix) -> f64 {
    let l1 = |f: &FitResult| -> f64 {
        f.coefficients
            .iter()
            .enumerate()
            .filter(|(j, _)| x.is_penalized(*j))
            .map(|(_, b)| b.abs())
            .sum()
    };
    let r = l1(reference);
    if r == 0.0 {
        0.0
    } else {
        1.0 - l1(fit) / r
    }
}
