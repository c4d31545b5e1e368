use serde::{Deserialize, Serialize};

use crate::data::{DesignMatrix, Side};
use crate::error::{Error, Result};
use crate::glm::{predict_linear, FitDocument, FitResult};

/// How a defensive coefficient enters the player's linear predictor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignConvention {
    /// `μ = b₀ − β^d`: the defender's on-court indicator is −1, as in the
    /// design matrix.
    #[default]
    Model,
    /// `μ = b₀ + β^d`, the literal per-player formula.
    Paper,
}

impl std::str::FromStr for SignConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "model" => Ok(SignConvention::Model),
            "paper" => Ok(SignConvention::Paper),
            other => Err(Error::Config(format!(
                "unknown sign convention `{other}` (model|paper)"
            ))),
        }
    }
}

impl SignConvention {
    pub fn as_str(self) -> &'static str {
        match self {
            SignConvention::Model => "model",
            SignConvention::Paper => "paper",
        }
    }

    fn defense_sign(self) -> f64 {
        match self {
            SignConvention::Model => -1.0,
            SignConvention::Paper => 1.0,
        }
    }
}

/// Baseline-category probabilities `(π₀, π₁, π₂, π₃)` for linear predictors
/// `(μ₁, μ₂, μ₃)` with `μ₀ = 0`. A predictor of −∞ gives its category
/// probability zero.
pub fn category_probs(mu1: f64, mu2: f64, mu3: f64) -> [f64; 4] {
    let mu = [0.0, mu1, mu2, mu3];
    let m = mu.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e = mu.map(|v| (v - m).exp());
    let total: f64 = e.iter().sum();
    e.map(|v| v / total)
}

/// Expected points `π₁ + 2π₂ + c₃π₃`.
pub fn epts_from_predictors(mu: [f64; 3], c3: f64) -> f64 {
    let p = category_probs(mu[0], mu[1], mu[2]);
    p[1] + 2.0 * p[2] + c3 * p[3]
}

/// Three binomial components (scores of 1, 2 and 3+ against no score) and
/// the point value of the top category.
///
/// A missing component (no rows in its category) is a structural zero:
/// its predictor is −∞ everywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct MultinomialFit {
    pub components: [Option<FitResult>; 3],
    pub c3: f64,
}

impl MultinomialFit {
    pub fn new(components: [Option<FitResult>; 3], c3: f64) -> Result<Self> {
        if !(c3 >= 3.0 && c3.is_finite()) {
            return Err(Error::Input(format!("top category value must be ≥ 3, got {c3}")));
        }
        Ok(MultinomialFit { components, c3 })
    }

    pub fn intercepts(&self) -> [f64; 3] {
        std::array::from_fn(|l| self.components[l].as_ref().map_or(f64::NEG_INFINITY, |f| f.intercept))
    }

    /// Coefficients of design column `j` in the three components.
    pub fn column_coefficients(&self, j: usize) -> [f64; 3] {
        std::array::from_fn(|l| self.components[l].as_ref().map_or(0.0, |f| f.coefficients[j]))
    }

    /// Per-row category probabilities.
    pub fn row_probabilities(&self, x: &DesignMatrix) -> Vec<[f64; 4]> {
        let mus: Vec<Vec<f64>> = self
            .components
            .iter()
            .map(|c| match c {
                Some(f) => predict_linear(f, x),
                None => vec![f64::NEG_INFINITY; x.n_rows()],
            })
            .collect();
        (0..x.n_rows())
            .map(|i| category_probs(mus[0][i], mus[1][i], mus[2][i]))
            .collect()
    }

    /// Per-row expected points `Σ value_ℓ π_iℓ`.
    pub fn expected_points(&self, x: &DesignMatrix) -> Vec<f64> {
        self.row_probabilities(x)
            .into_iter()
            .map(|p| p[1] + 2.0 * p[2] + self.c3 * p[3])
            .collect()
    }

    pub fn to_document(&self, x: &DesignMatrix) -> MultinomialDocument {
        MultinomialDocument {
            c3: self.c3,
            components: std::array::from_fn(|l| self.components[l].as_ref().map(|f| f.to_document(x))),
        }
    }
}

/// JSON form of a [`MultinomialFit`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultinomialDocument {
    pub c3: f64,
    pub components: [Option<FitDocument>; 3],
}

impl MultinomialDocument {
    pub fn to_fit(&self, x: &DesignMatrix) -> Result<MultinomialFit> {
        let mut components: [Option<FitResult>; 3] = Default::default();
        for (slot, doc) in components.iter_mut().zip(&self.components) {
            *slot = doc.as_ref().map(|d| d.to_fit(x)).transpose()?;
        }
        MultinomialFit::new(components, self.c3)
    }
}

/// Expected points of the all-reference lineup, from the intercepts alone.
pub fn epts_reference(mfit: &MultinomialFit) -> f64 {
    epts_from_predictors(mfit.intercepts(), mfit.c3)
}

/// Expected points with registry player `k` on court on `side` and every
/// other player from the reference group.
pub fn epts_player(
    mfit: &MultinomialFit,
    x: &DesignMatrix,
    k: usize,
    side: Side,
    convention: SignConvention,
) -> Result<f64> {
    let (o, d) = x
        .player_columns(k)
        .ok_or_else(|| Error::UnknownPlayer(format!("player index {k} is not in the design")))?;
    let (col, sign) = match side {
        Side::Offense => (o, 1.0),
        Side::Defense => (d, convention.defense_sign()),
    };
    let b0 = mfit.intercepts();
    let beta = mfit.column_coefficients(col);
    let mu = std::array::from_fn(|l| b0[l] + sign * beta[l]);
    Ok(epts_from_predictors(mu, mfit.c3))
}
