use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::path::LambdaPath;
use crate::error::{Error, Result};
use crate::glm::{logistic, Control, Family, GlmProblem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CvMetric {
    /// Root mean squared error of `y − ŷ` (ŷ a probability for binomial).
    Rmse,
    /// Mean deviance (squared error for Gaussian).
    Deviance,
}

impl std::str::FromStr for CvMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rmse" => Ok(CvMetric::Rmse),
            "deviance" => Ok(CvMetric::Deviance),
            other => Err(Error::Config(format!("unknown CV metric `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvConfig {
    pub folds: usize,
    pub seed: u64,
    pub metric: CvMetric,
    pub control: Control,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            folds: 10,
            seed: 0,
            metric: CvMetric::Rmse,
            control: Control::default(),
        }
    }
}

/// Assign each of `n` rows to one of `k` folds. Rows are shuffled with a
/// ChaCha8 generator seeded by `seed` and dealt round-robin, so fold sizes
/// differ by at most one.
pub fn kfold_split(n: usize, k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(Error::Config(format!("need at least 2 folds, got {k}")));
    }
    if n < k {
        return Err(Error::Input(format!("cannot split {n} rows into {k} folds")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut folds = vec![0; n];
    for (pos, &row) in order.iter().enumerate() {
        folds[row] = pos % k;
    }
    Ok(folds)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvPoint {
    pub lambda: f64,
    pub mean: f64,
    pub se: f64,
}

/// Cross-validation curve and the selected penalties.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub metric: CvMetric,
    pub seed: u64,
    #[serde(rename = "K")]
    pub folds: usize,
    pub path: Vec<CvPoint>,
    pub lambda_min: f64,
    pub lambda_1se: f64,
    /// Folds excluded at some λ, and why.
    #[serde(skip)]
    pub warnings: Vec<String>,
}

impl CvResult {
    pub fn index_min(&self) -> usize {
        self.path.iter().position(|p| p.lambda == self.lambda_min).unwrap_or(0)
    }

    /// Aligned text rendering of the curve.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let metric = match self.metric {
            CvMetric::Rmse => "rmse",
            CvMetric::Deviance => "deviance",
        };
        let _ = writeln!(out, "{:>14}  {:>14}  {:>14}  mark", "lambda", metric, "se");
        for p in &self.path {
            let mark = match (p.lambda == self.lambda_min, p.lambda == self.lambda_1se) {
                (true, true) => "min,1se",
                (true, false) => "min",
                (false, true) => "1se",
                _ => "",
            };
            let _ = writeln!(out, "{:>14.6e}  {:>14.8}  {:>14.8}  {mark}", p.lambda, p.mean, p.se);
        }
        out
    }
}

/// K-fold cross-validation of `problem` over `path`.
///
/// `fold_ids` assigns every design row to a fold in `0..config.folds`; rows
/// with zero weight in `problem` are ignored on both sides. Each fold fits
/// the whole path with warm starts on its training rows and scores the
/// held-out rows. Non-converged (fold, λ) fits are left out of that λ's
/// mean and reported in `warnings`.
pub fn cross_validate(
    problem: &GlmProblem<'_>,
    path: &LambdaPath,
    fold_ids: &[usize],
    config: &CvConfig,
) -> Result<CvResult> {
    let n = problem.design().n_rows();
    let k = config.folds;
    if fold_ids.len() != n {
        return Err(Error::Input("fold assignment length does not match the design".into()));
    }
    if k < 2 || fold_ids.iter().any(|&f| f >= k) {
        return Err(Error::Config(format!("fold ids must lie in 0..{k} with K ≥ 2")));
    }

    let per_fold: Vec<Result<FoldOutcome>> = (0..k)
        .into_par_iter()
        .map(|f| run_fold(problem, path, fold_ids, f, config))
        .collect();

    let mut warnings = Vec::new();
    let mut scores: Vec<Vec<f64>> = vec![Vec::new(); path.len()];
    for (f, outcome) in per_fold.into_iter().enumerate() {
        match outcome? {
            FoldOutcome::Skipped(why) => warnings.push(format!("fold {f} skipped: {why}")),
            FoldOutcome::Scored(list) => {
                for (li, score) in list.into_iter().enumerate() {
                    match score {
                        Some(s) => scores[li].push(s),
                        None => warnings.push(format!(
                            "fold {f} did not converge at lambda {:e}; excluded",
                            path.values()[li]
                        )),
                    }
                }
            }
        }
    }

    let points: Vec<CvPoint> = path
        .values()
        .iter()
        .zip(&scores)
        .map(|(&lambda, s)| {
            let m = s.len();
            if m == 0 {
                return CvPoint {
                    lambda,
                    mean: f64::NAN,
                    se: f64::NAN,
                };
            }
            let mean = s.iter().sum::<f64>() / m as f64;
            let se = if m > 1 {
                (s.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1) as f64).sqrt() / (m as f64).sqrt()
            } else {
                0.0
            };
            CvPoint { lambda, mean, se }
        })
        .collect();

    let imin = points
        .iter()
        .enumerate()
        .filter(|(_, p)| p.mean.is_finite())
        .fold(None::<usize>, |best, (i, p)| match best {
            Some(b) if points[b].mean <= p.mean => Some(b),
            _ => Some(i),
        })
        .ok_or_else(|| Error::Numerical("no λ produced a usable cross-validation score".into()))?;
    let bound = points[imin].mean + points[imin].se;
    let i1se = points
        .iter()
        .position(|p| p.mean.is_finite() && p.mean <= bound)
        .unwrap_or(imin);

    Ok(CvResult {
        metric: config.metric,
        seed: config.seed,
        folds: k,
        lambda_min: points[imin].lambda,
        lambda_1se: points[i1se].lambda,
        path: points,
        warnings,
    })
}

enum FoldOutcome {
    Skipped(String),
    Scored(Vec<Option<f64>>),
}

fn run_fold(
    problem: &GlmProblem<'_>,
    path: &LambdaPath,
    fold_ids: &[usize],
    fold: usize,
    config: &CvConfig,
) -> Result<FoldOutcome> {
    let base = problem.weights();
    let train: Vec<f64> = fold_ids.iter().map(|&f| f64::from(u8::from(f != fold))).collect();
    let test: Vec<usize> = (0..fold_ids.len())
        .filter(|&i| fold_ids[i] == fold && base[i] > 0.0)
        .collect();
    if test.is_empty() {
        return Ok(FoldOutcome::Skipped("no held-out rows".into()));
    }
    if !train.iter().zip(base).any(|(t, b)| t * b > 0.0) {
        return Ok(FoldOutcome::Skipped("no training rows".into()));
    }
    let sub = problem.reweighted(&train)?;
    let fits = sub.fit_path(path.values(), &config.control)?;
    let x = problem.design();
    let y = problem.response();
    let scored = fits
        .iter()
        .map(|fit| {
            if !fit.converged {
                return None;
            }
            let xb = x.mul_vec(&fit.coefficients);
            let (mut num, mut den) = (0.0, 0.0);
            for &i in &test {
                let eta = fit.intercept + xb[i];
                let w = base[i];
                let loss = match (problem.family(), config.metric) {
                    (Family::Gaussian, _) => (y[i] - eta).powi(2),
                    (Family::Binomial, CvMetric::Rmse) => (y[i] - logistic(eta)).powi(2),
                    (Family::Binomial, CvMetric::Deviance) => {
                        let p = logistic(eta).clamp(1e-15, 1.0 - 1e-15);
                        -2.0 * (y[i] * p.ln() + (1.0 - y[i]) * (1.0 - p).ln())
                    }
                };
                num += w * loss;
                den += w;
            }
            let mean = num / den;
            Some(match config.metric {
                CvMetric::Rmse => mean.sqrt(),
                CvMetric::Deviance => mean,
            })
        })
        .collect();
    Ok(FoldOutcome::Scored(scored))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::DesignMatrix;

    #[test]
    fn fold_sizes() {
        let f = kfold_split(10, 10, 3).unwrap();
        let mut counts = [0; 10];
        for &i in &f {
            counts[i] += 1;
        }
        assert!(counts.iter().all(|&c| c == 1));
        let f = kfold_split(322_852, 10, 7).unwrap();
        let mut counts = [0usize; 10];
        for &i in &f {
            counts[i] += 1;
        }
        assert!(counts.iter().all(|&c| c == 32_285 || c == 32_286));
        assert_eq!(kfold_split(50, 5, 11).unwrap(), kfold_split(50, 5, 11).unwrap());
        assert!(kfold_split(3, 5, 0).is_err());
        assert!(kfold_split(3, 1, 0).is_err());
    }

    #[test]
    fn two_fold_hand_check() {
        // Four rows; at λ ≥ λ_max every fold predicts its training mean.
        let x = DesignMatrix::from_dense(&[vec![1.0], vec![0.0], vec![1.0], vec![0.0]]).unwrap();
        let y = vec![1.0, 2.0, 4.0, 7.0];
        let problem = GlmProblem::new(&x, &y, None, Family::Gaussian, 1.0, false).unwrap();
        let folds = vec![0, 0, 1, 1];
        let path = LambdaPath::from_values(vec![100.0]).unwrap();
        let cfg = CvConfig {
            folds: 2,
            ..CvConfig::default()
        };
        let cv = cross_validate(&problem, &path, &folds, &cfg).unwrap();
        // fold 0 trains on {4, 7} → mean 5.5; errors on {1, 2}: 4.5, 3.5
        let f0 = ((4.5f64.powi(2) + 3.5f64.powi(2)) / 2.0).sqrt();
        // fold 1 trains on {1, 2} → mean 1.5; errors on {4, 7}: 2.5, 5.5
        let f1 = ((2.5f64.powi(2) + 5.5f64.powi(2)) / 2.0).sqrt();
        let mean = (f0 + f1) / 2.0;
        let se = ((f0 - mean).powi(2) + (f1 - mean).powi(2)).sqrt() / 2f64.sqrt();
        assert!((cv.path[0].mean - mean).abs() < 1e-12);
        assert!((cv.path[0].se - se).abs() < 1e-12);
        assert_eq!(cv.lambda_min, 100.0);
        assert_eq!(cv.lambda_1se, 100.0);
    }
}
