use crate::error::{Error, Result};
use crate::glm::GlmProblem;

/// Strictly decreasing sequence of penalty values.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaPath {
    lambdas: Vec<f64>,
}

impl LambdaPath {
    pub const DEFAULT_LEN: usize = 100;
    pub const DEFAULT_RATIO: f64 = 1e-4;
    /// Mixing value used to size a ridge path, where λ_max itself is
    /// undefined.
    pub const RIDGE_PATH_ALPHA: f64 = 1e-3;

    /// `n_lambda` values spaced evenly on the log scale from `lambda_max`
    /// down to `ratio · lambda_max`.
    pub fn geometric(lambda_max: f64, n_lambda: usize, ratio: f64) -> Result<Self> {
        if !(lambda_max > 0.0 && lambda_max.is_finite()) {
            return Err(Error::Numerical(format!(
                "cannot build a λ path from lambda_max = {lambda_max}; the response may be constant"
            )));
        }
        if n_lambda == 0 {
            return Err(Error::Config("a λ path needs at least one value".into()));
        }
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::Config(format!("path ratio must lie in (0, 1), got {ratio}")));
        }
        if n_lambda == 1 {
            return Ok(LambdaPath {
                lambdas: vec![lambda_max],
            });
        }
        let step = ratio.ln() / (n_lambda - 1) as f64;
        let lambdas = (0..n_lambda)
            .map(|i| {
                if i == 0 {
                    lambda_max
                } else {
                    lambda_max * (step * i as f64).exp()
                }
            })
            .collect();
        Ok(LambdaPath { lambdas })
    }

    /// Default path for a problem, starting at its λ_max. Ridge problems
    /// (α = 0) are sized with α = 10⁻³.
    pub fn for_problem(problem: &GlmProblem<'_>, n_lambda: usize, ratio: f64) -> Result<Self> {
        let lmax = if problem.alpha() > 0.0 {
            problem.lambda_max()?
        } else {
            problem.with_alpha(Self::RIDGE_PATH_ALPHA)?.lambda_max()?
        };
        Self::geometric(lmax, n_lambda, ratio)
    }

    /// Use explicit values, which must be nonnegative and strictly
    /// decreasing.
    pub fn from_values(lambdas: Vec<f64>) -> Result<Self> {
        if lambdas.is_empty() {
            return Err(Error::Config("a λ path needs at least one value".into()));
        }
        if lambdas.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
            return Err(Error::Config("λ values must be finite and nonnegative".into()));
        }
        if lambdas.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Config("λ path must be strictly decreasing".into()));
        }
        Ok(LambdaPath { lambdas })
    }

    pub fn values(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_path_shape() {
        let p = LambdaPath::geometric(2.0, 100, 1e-4).unwrap();
        assert_eq!(p.len(), 100);
        assert_eq!(p.values()[0], 2.0);
        assert!((p.values()[99] - 2e-4).abs() < 1e-15);
        assert!(p.values().windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn rejects_bad_paths() {
        assert!(LambdaPath::geometric(0.0, 10, 0.01).is_err());
        assert!(LambdaPath::from_values(vec![1.0, 1.0]).is_err());
        assert!(LambdaPath::from_values(vec![0.5, 1.0]).is_err());
        assert!(LambdaPath::from_values(vec![1.0, 0.5, 0.0]).is_ok());
    }
}
