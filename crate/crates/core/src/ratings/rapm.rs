use nalgebra::{Cholesky, DMatrix};

use crate::data::{DesignMatrix, PlayerRegistry, Side};
use crate::error::{Error, Result};
use crate::glm::{Control, FitResult, GlmProblem};

/// Ridge penalty used when the after-lasso support is rank deficient.
const FALLBACK_RIDGE: f64 = 1e-8;

/// One player's coefficient on one side.
#[derive(Debug, Clone, PartialEq)]
pub struct RapmEntry {
    pub player: usize,
    pub key: String,
    pub side: Side,
    pub value: f64,
    /// Exact zero: the player belongs to the reference group.
    pub is_reference: bool,
}

/// Offensive and defensive coefficients for every registry player, offense
/// block first.
pub fn extract_rapm(fit: &FitResult, x: &DesignMatrix, registry: &PlayerRegistry) -> Result<Vec<RapmEntry>> {
    if x.n_players() != registry.len() || fit.coefficients.len() != x.n_cols() {
        return Err(Error::Input("fit, design and registry are not aligned".into()));
    }
    let mut out = Vec::with_capacity(2 * registry.len());
    for side in Side::BOTH {
        for (k, entry) in registry.players().iter().enumerate() {
            let (o, d) = x.player_columns(k).expect("aligned design");
            let value = fit.coefficients[if side == Side::Offense { o } else { d }];
            out.push(RapmEntry {
                player: k,
                key: entry.key.to_string(),
                side,
                value,
                is_reference: value == 0.0,
            });
        }
    }
    Ok(out)
}

/// Least-squares line `b = intercept + slope·a` with fit diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct LinearMap {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub residual_sd: f64,
}

/// OLS of binomial RAPM on normal RAPM.
pub fn binomial_normal_map(rapm_normal: &[f64], rapm_binomial: &[f64]) -> Result<LinearMap> {
    if rapm_normal.len() != rapm_binomial.len() {
        return Err(Error::Input("rating vectors differ in length".into()));
    }
    let n = rapm_normal.len();
    if n < 3 {
        return Err(Error::Input(format!("need at least 3 players, got {n}")));
    }
    let nf = n as f64;
    let ma = rapm_normal.iter().sum::<f64>() / nf;
    let mb = rapm_binomial.iter().sum::<f64>() / nf;
    let (mut saa, mut sab, mut sbb) = (0.0, 0.0, 0.0);
    for (a, b) in rapm_normal.iter().zip(rapm_binomial) {
        saa += (a - ma) * (a - ma);
        sab += (a - ma) * (b - mb);
        sbb += (b - mb) * (b - mb);
    }
    if saa == 0.0 {
        return Err(Error::Numerical("normal ratings have zero variance".into()));
    }
    let slope = sab / saa;
    let intercept = mb - slope * ma;
    let rss = (sbb - slope * sab).max(0.0);
    let r_squared = if sbb == 0.0 { 1.0 } else { 1.0 - rss / sbb };
    Ok(LinearMap {
        slope,
        intercept,
        r_squared,
        residual_sd: (rss / (nf - 2.0)).sqrt(),
    })
}

/// Unpenalized refit on the `support` columns of `problem`'s design; every
/// other coefficient is zero. Falls back to a tiny ridge penalty, with a
/// warning, when the support is rank deficient.
pub fn after_lasso_refit(
    problem: &GlmProblem<'_>,
    support: &[usize],
    control: &Control,
) -> Result<(FitResult, Vec<String>)> {
    let x = problem.design();
    let mut warnings = Vec::new();
    if support.is_empty() {
        let mut fit = problem.null_fit(control)?;
        fit.lambda = 0.0;
        return Ok((fit, warnings));
    }
    let sub = x.select_columns(support);
    let (alpha, lambda) = if full_rank(&sub, problem.weights()) {
        (1.0, 0.0)
    } else {
        warnings.push(format!(
            "after-lasso support of {} columns is rank deficient; using ridge penalty {FALLBACK_RIDGE}",
            support.len()
        ));
        (0.0, FALLBACK_RIDGE)
    };
    let mut sub = sub;
    for j in 0..sub.n_cols() {
        sub.set_penalized(j, true);
    }
    let sub_problem = GlmProblem::new(
        &sub,
        problem.response(),
        Some(problem.weights()),
        problem.family(),
        alpha,
        false,
    )?;
    let sub_fit = sub_problem.fit(lambda, control, None)?;
    if !sub_fit.converged {
        warnings.push("after-lasso refit did not converge".into());
    }
    let mut coefficients = vec![0.0; x.n_cols()];
    for (&j, &b) in support.iter().zip(&sub_fit.coefficients) {
        coefficients[j] = b;
    }
    let n_nonzero_penalized = support
        .iter()
        .filter(|&&j| x.is_penalized(j) && coefficients[j] != 0.0)
        .count();
    let fit = FitResult {
        coefficients,
        n_nonzero_penalized,
        ..sub_fit
    };
    Ok((fit, warnings))
}

/// Cholesky test on the weighted, intercept-centred Gram matrix.
fn full_rank(x: &DesignMatrix, w: &[f64]) -> bool {
    let p = x.n_cols();
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); x.n_rows()];
    let mut c = vec![0.0; p];
    for (j, cj) in c.iter_mut().enumerate() {
        let (idx, vals) = x.column(j);
        for (&i, &v) in idx.iter().zip(vals) {
            rows[i as usize].push((j, v));
            *cj += w[i as usize] * v;
        }
    }
    let total: f64 = w.iter().sum();
    if total <= 0.0 {
        return false;
    }
    let mut gram = DMatrix::<f64>::zeros(p, p);
    for (i, row) in rows.iter().enumerate() {
        if w[i] == 0.0 {
            continue;
        }
        for &(a, va) in row {
            for &(b, vb) in row {
                gram[(a, b)] += w[i] * va * vb;
            }
        }
    }
    for a in 0..p {
        for b in 0..p {
            gram[(a, b)] -= c[a] * c[b] / total;
        }
    }
    let scale = (0..p).map(|j| gram[(j, j)]).fold(0.0, f64::max);
    if scale <= 0.0 {
        return false;
    }
    match Cholesky::new(gram) {
        Some(ch) => {
            let l = ch.l();
            (0..p).all(|j| l[(j, j)] * l[(j, j)] > 1e-10 * scale)
        }
        None => false,
    }
}

/// Pearson correlation of two rating vectors. With `include_zeros` false,
/// pairs whose `lasso` value is exactly zero are dropped.
pub fn rating_correlation(a: &[f64], lasso: &[f64], include_zeros: bool) -> Result<f64> {
    if a.len() != lasso.len() {
        return Err(Error::Input("rating vectors differ in length".into()));
    }
    let pairs: Vec<(f64, f64)> = a
        .iter()
        .zip(lasso)
        .filter(|(_, &b)| include_zeros || b != 0.0)
        .map(|(&x, &y)| (x, y))
        .collect();
    if pairs.len() < 3 {
        return Err(Error::Input(format!("need at least 3 pairs, got {}", pairs.len())));
    }
    let n = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in &pairs {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Numerical("rating vector has zero variance".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}
