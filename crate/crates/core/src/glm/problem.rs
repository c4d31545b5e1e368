use super::result::FitResult;
use super::spec::{Control, Family, FitSpec};
use super::{logistic, softplus};
use crate::data::DesignMatrix;
use crate::error::{Error, Result};

/// Linear predictors are clamped to this magnitude inside the binomial fit.
pub const ETA_CAP: f64 = 30.0;
/// Lower bound on IRLS weights `p(1 − p)`.
pub const WEIGHT_FLOOR: f64 = 1e-5;

/// `sign(z) · max(|z| − γ, 0)`.
#[inline]
pub fn soft_threshold(z: f64, gamma: f64) -> f64 {
    debug_assert!(gamma >= 0.0);
    if z > gamma {
        z - gamma
    } else if z < -gamma {
        z + gamma
    } else {
        0.0
    }
}

/// A design, response and row weights with the per-column penalty factors
/// precomputed, ready to be fitted at any λ.
#[derive(Debug, Clone)]
pub struct GlmProblem<'a> {
    x: &'a DesignMatrix,
    y: &'a [f64],
    w: Vec<f64>,
    n_eff: f64,
    family: Family,
    alpha: f64,
    standardize: bool,
    /// L1 and L2 penalty factors per column; zero for unpenalized columns.
    pf1: Vec<f64>,
    pf2: Vec<f64>,
    /// Columns with positive weighted variance. Others stay at zero.
    usable: Vec<bool>,
    /// Weighted variance of the response; convergence thresholds are
    /// relative to it.
    scale: f64,
}

impl<'a> GlmProblem<'a> {
    pub fn new(
        x: &'a DesignMatrix,
        y: &'a [f64],
        weights: Option<&[f64]>,
        family: Family,
        alpha: f64,
        standardize: bool,
    ) -> Result<Self> {
        let n = x.n_rows();
        if y.len() != n {
            return Err(Error::Input(format!("response has {} rows, design has {n}", y.len())));
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::Config(format!("alpha must lie in [0, 1], got {alpha}")));
        }
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::Input(format!("non-finite response at row {i}")));
        }
        if family == Family::Binomial {
            if let Some(i) = y.iter().position(|&v| v != 0.0 && v != 1.0) {
                return Err(Error::Input(format!(
                    "binomial response must be 0/1; row {i} is {}",
                    y[i]
                )));
            }
        }
        let w = match weights {
            Some(w) => {
                if w.len() != n {
                    return Err(Error::Input("weight length does not match design rows".into()));
                }
                if w.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                    return Err(Error::Input("row weights must be finite and nonnegative".into()));
                }
                w.to_vec()
            }
            None => vec![1.0; n],
        };
        let n_eff: f64 = w.iter().sum();
        if !(n_eff > 0.0) {
            return Err(Error::Input("no rows with positive weight".into()));
        }

        let ybar = y.iter().zip(&w).map(|(y, w)| y * w).sum::<f64>() / n_eff;
        let yvar = y.iter().zip(&w).map(|(y, w)| w * (y - ybar).powi(2)).sum::<f64>() / n_eff;
        let scale = if yvar > 0.0 { yvar } else { 1.0 };

        let p = x.n_cols();
        let mut pf1 = vec![0.0; p];
        let mut pf2 = vec![0.0; p];
        let mut usable = vec![false; p];
        for j in 0..p {
            let (rows, vals) = x.column(j);
            let (mut s1, mut s2) = (0.0, 0.0);
            for (&i, &v) in rows.iter().zip(vals) {
                let wi = w[i as usize];
                s1 += wi * v;
                s2 += wi * v * v;
            }
            let var = ((s2 - s1 * s1 / n_eff) / n_eff).max(0.0);
            usable[j] = var > 1e-12 * (s2 / n_eff);
            if usable[j] && x.is_penalized(j) {
                if standardize {
                    pf1[j] = var.sqrt();
                    pf2[j] = var;
                } else {
                    pf1[j] = 1.0;
                    pf2[j] = 1.0;
                }
            }
        }
        Ok(GlmProblem {
            x,
            y,
            w,
            n_eff,
            family,
            alpha,
            standardize,
            pf1,
            pf2,
            usable,
            scale,
        })
    }

    pub fn from_spec(x: &'a DesignMatrix, y: &'a [f64], weights: Option<&[f64]>, spec: &FitSpec) -> Result<Self> {
        spec.validate()?;
        Self::new(x, y, weights, spec.family, spec.alpha, spec.standardize)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn standardize(&self) -> bool {
        self.standardize
    }

    pub fn response(&self) -> &[f64] {
        self.y
    }

    /// The same problem with a different elastic-net mixing parameter.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::Config(format!("alpha must lie in [0, 1], got {alpha}")));
        }
        Ok(GlmProblem { alpha, ..self.clone() })
    }

    /// The same problem restricted to rows with positive `weights`
    /// (multiplied into the current row weights).
    pub fn reweighted(&self, weights: &[f64]) -> Result<Self> {
        let w: Vec<f64> = self.w.iter().zip(weights).map(|(a, b)| a * b).collect();
        Self::new(self.x, self.y, Some(&w), self.family, self.alpha, self.standardize)
    }

    pub fn design(&self) -> &DesignMatrix {
        self.x
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    /// Penalty factors `(sⱼ, sⱼ²)` applied to column `j` (zero if unpenalized).
    pub fn penalty_factors(&self, j: usize) -> (f64, f64) {
        (self.pf1[j], self.pf2[j])
    }

    fn is_free(&self, j: usize) -> bool {
        self.pf1[j] == 0.0 && self.pf2[j] == 0.0
    }

    fn penalized_columns(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.x.n_cols()).filter(|&j| self.usable[j] && !self.is_free(j))
    }

    /// Penalized objective at `(b₀, β)`.
    pub fn objective(&self, intercept: f64, beta: &[f64], lambda: f64) -> f64 {
        let xb = self.x.mul_vec(beta);
        self.objective_from_xb(intercept, &xb, beta, lambda)
    }

    fn penalty(&self, beta: &[f64], lambda: f64) -> f64 {
        if lambda == 0.0 {
            return 0.0;
        }
        let mut pen = 0.0;
        for (j, &b) in beta.iter().enumerate() {
            if b != 0.0 {
                pen += 0.5 * (1.0 - self.alpha) * self.pf2[j] * b * b + self.alpha * self.pf1[j] * b.abs();
            }
        }
        lambda * pen
    }

    fn objective_from_xb(&self, intercept: f64, xb: &[f64], beta: &[f64], lambda: f64) -> f64 {
        let mut loss = 0.0;
        match self.family {
            Family::Gaussian => {
                for i in 0..xb.len() {
                    let r = self.y[i] - intercept - xb[i];
                    loss += self.w[i] * r * r;
                }
                loss *= 0.5;
            }
            Family::Binomial => {
                for i in 0..xb.len() {
                    if self.w[i] == 0.0 {
                        continue;
                    }
                    let eta = (intercept + xb[i]).clamp(-ETA_CAP, ETA_CAP);
                    loss += self.w[i] * (softplus(eta) - self.y[i] * eta);
                }
            }
        }
        loss / self.n_eff + self.penalty(beta, lambda)
    }

    /// Columns a solve may move: usable, and either all of them or only the
    /// unpenalized ones (for the null model).
    fn columns(&self, penalized_too: bool) -> Vec<usize> {
        (0..self.x.n_cols())
            .filter(|&j| self.usable[j] && (penalized_too || self.is_free(j)))
            .collect()
    }

    /// Fit with every penalized coefficient held at zero.
    pub fn null_fit(&self, control: &Control) -> Result<FitResult> {
        let cols = self.columns(false);
        let start = vec![0.0; self.x.n_cols()];
        let mut fit = match self.family {
            Family::Gaussian => self.solve_gaussian(0.0, &cols, start, control),
            Family::Binomial => {
                let ybar = self.y.iter().zip(&self.w).map(|(y, w)| y * w).sum::<f64>() / self.n_eff;
                let b0 = (ybar / (1.0 - ybar)).ln().clamp(-ETA_CAP, ETA_CAP);
                self.solve_binomial(0.0, &cols, start, b0, control)
            }
        }?;
        fit.lambda = f64::INFINITY;
        Ok(fit)
    }

    /// Smallest λ for which the fit has no nonzero penalized coefficient.
    pub fn lambda_max(&self) -> Result<f64> {
        self.lambda_max_at(&self.null_fit(&Control::default())?)
    }

    fn lambda_max_at(&self, null: &FitResult) -> Result<f64> {
        if self.alpha <= 0.0 {
            return Err(Error::Config("lambda_max is undefined for alpha = 0".into()));
        }
        let xb = self.x.mul_vec(&null.coefficients);
        let (v, q) = self.working_problem(null.intercept, &xb);
        let wls = Wls::new(
            self.x,
            &v,
            self.n_eff,
            0.0,
            self,
            self.penalized_columns().collect(),
            0.0,
        );
        let st = WlsState::new(&wls, null.coefficients.clone(), q);
        let mut lmax: f64 = 0.0;
        for &j in &wls.cols {
            lmax = lmax.max(wls.gradient(j, &st).abs() / (self.alpha * self.pf1[j]));
        }
        Ok(lmax)
    }

    /// Working weights and working response minus `Xβ` at the given linear
    /// predictor. For the Gaussian family these are the row weights and the
    /// raw partial residual.
    fn working_problem(&self, intercept: f64, xb: &[f64]) -> (Vec<f64>, Vec<f64>) {
        match self.family {
            Family::Gaussian => {
                let q = self.y.iter().zip(xb).map(|(y, xb)| y - xb).collect();
                (self.w.clone(), q)
            }
            Family::Binomial => {
                let n = xb.len();
                let mut v = vec![0.0; n];
                let mut q = vec![0.0; n];
                for i in 0..n {
                    let eta = intercept + xb[i];
                    let p = logistic(eta.clamp(-ETA_CAP, ETA_CAP));
                    let wt = (p * (1.0 - p)).max(WEIGHT_FLOOR);
                    v[i] = self.w[i] * wt;
                    q[i] = intercept + (self.y[i] - p) / wt;
                }
                (v, q)
            }
        }
    }

    /// Fit at `lambda`, warm-started from `warm` when given. Without a warm
    /// start the fit begins at the null model and returns it unchanged when
    /// `lambda ≥ lambda_max`.
    pub fn fit(&self, lambda: f64, control: &Control, warm: Option<&FitResult>) -> Result<FitResult> {
        if !(lambda >= 0.0) || lambda.is_infinite() {
            return Err(Error::Config(format!(
                "lambda must be finite and nonnegative, got {lambda}"
            )));
        }
        let start = match warm {
            Some(w) => {
                if w.coefficients.len() != self.x.n_cols() {
                    return Err(Error::Input("warm start has the wrong number of coefficients".into()));
                }
                w.clone()
            }
            None => {
                let null = self.null_fit(control)?;
                if self.alpha > 0.0 && lambda >= self.lambda_max_at(&null)? {
                    let mut out = null;
                    out.lambda = lambda;
                    out.alpha = self.alpha;
                    out.objective = self.objective(out.intercept, &out.coefficients, lambda);
                    return Ok(out);
                }
                null
            }
        };
        let cols = self.columns(true);
        let mut fit = match self.family {
            Family::Gaussian => self.solve_gaussian(lambda, &cols, start.coefficients, control),
            Family::Binomial => self.solve_binomial(lambda, &cols, start.coefficients, start.intercept, control),
        }?;
        fit.lambda = lambda;
        Ok(fit)
    }

    /// Fit along a λ sequence, each fit warm-started from the previous one.
    pub fn fit_path(&self, lambdas: &[f64], control: &Control) -> Result<Vec<FitResult>> {
        let mut out: Vec<FitResult> = Vec::with_capacity(lambdas.len());
        for &lambda in lambdas {
            let fit = self.fit(lambda, control, out.last())?;
            out.push(fit);
        }
        Ok(out)
    }

    fn finish(
        &self,
        lambda: f64,
        intercept: f64,
        beta: Vec<f64>,
        objective: f64,
        trace: Vec<f64>,
        sweeps: usize,
        outer: usize,
        converged: bool,
        separation: bool,
    ) -> FitResult {
        let n_nonzero_penalized = beta
            .iter()
            .enumerate()
            .filter(|(j, &b)| b != 0.0 && self.x.is_penalized(*j))
            .count();
        FitResult {
            family: self.family,
            alpha: self.alpha,
            lambda,
            intercept,
            coefficients: beta,
            n_nonzero_penalized,
            objective,
            converged,
            sweeps,
            outer_iterations: outer,
            objective_trace: trace,
            separation,
        }
    }

    fn solve_gaussian(&self, lambda: f64, cols: &[usize], beta: Vec<f64>, control: &Control) -> Result<FitResult> {
        let xb = self.x.mul_vec(&beta);
        let (v, q) = self.working_problem(0.0, &xb);
        let wls = Wls::new(self.x, &v, self.n_eff, lambda, self, cols.to_vec(), control.tol);
        let mut st = WlsState::new(&wls, beta, q);
        let mut trace = vec![wls.objective(&st)];
        let (sweeps, converged) = wls.solve(&mut st, control, &mut trace);
        let intercept = st.intercept(&wls);
        let objective = *trace.last().expect("trace is never empty");
        Ok(self.finish(
            lambda, intercept, st.beta, objective, trace, sweeps, 1, converged, false,
        ))
    }

    fn solve_binomial(
        &self,
        lambda: f64,
        cols: &[usize],
        mut beta: Vec<f64>,
        mut intercept: f64,
        control: &Control,
    ) -> Result<FitResult> {
        let n = self.x.n_rows();
        let mut xb = self.x.mul_vec(&beta);
        let mut obj = self.objective_from_xb(intercept, &xb, &beta, lambda);
        let mut trace = vec![obj];
        let mut sweeps = 0;
        let mut converged = false;
        let mut outer = 0;
        while outer < control.max_outer_iters {
            outer += 1;
            let (v, q) = self.working_problem(intercept, &xb);
            let z: Vec<f64> = q.iter().zip(&xb).map(|(q, xb)| q + xb).collect();
            let wls = Wls::new(self.x, &v, self.n_eff, lambda, self, cols.to_vec(), control.tol);
            let mut st = WlsState::new(&wls, beta.clone(), q);
            let mut inner_trace = Vec::new();
            let (sw, inner_converged) = wls.solve(&mut st, control, &mut inner_trace);
            sweeps += sw;

            let mut new_b0 = st.intercept(&wls);
            let mut new_beta = st.beta;
            let mut new_xb: Vec<f64> = (0..n).map(|i| z[i] - st.q[i]).collect();
            let mut new_obj = self.objective_from_xb(new_b0, &new_xb, &new_beta, lambda);
            let mut halvings = 0;
            while !(new_obj <= obj + 1e-12 * (1.0 + obj.abs())) && halvings < 30 {
                halvings += 1;
                new_b0 = 0.5 * (new_b0 + intercept);
                for (nb, b) in new_beta.iter_mut().zip(&beta) {
                    *nb = 0.5 * (*nb + b);
                }
                for (nx, x) in new_xb.iter_mut().zip(&xb) {
                    *nx = 0.5 * (*nx + x);
                }
                new_obj = self.objective_from_xb(new_b0, &new_xb, &new_beta, lambda);
            }
            if !new_obj.is_finite() {
                return Err(Error::Numerical("binomial objective became non-finite".into()));
            }
            let mut dmax = wls.vsum / wls.n * (new_b0 - intercept).powi(2);
            for &j in cols {
                dmax = dmax.max(wls.a[j] * (new_beta[j] - beta[j]).powi(2));
            }
            intercept = new_b0;
            beta = new_beta;
            xb = new_xb;
            obj = new_obj;
            trace.push(obj);
            if dmax < control.tol * self.scale {
                converged = inner_converged;
                break;
            }
        }
        let separation = xb
            .iter()
            .zip(&self.w)
            .any(|(xb, &w)| w > 0.0 && (intercept + xb).abs() >= ETA_CAP);
        Ok(self.finish(
            lambda, intercept, beta, obj, trace, sweeps, outer, converged, separation,
        ))
    }

    /// Largest violation of the stationarity conditions at `fit`, in
    /// gradient units. Zero coefficients need `|gⱼ| ≤ λα sⱼ`; nonzero ones
    /// need `gⱼ = λ(1−α) sⱼ² βⱼ + λα sⱼ sign(βⱼ)`, where `gⱼ` is the
    /// weighted inner product of column `j` with the residual over `N`.
    pub fn kkt_violation(&self, fit: &FitResult) -> f64 {
        let lambda = fit.lambda;
        let xb = self.x.mul_vec(&fit.coefficients);
        let resid: Vec<f64> = (0..self.x.n_rows())
            .map(|i| {
                let eta = fit.intercept + xb[i];
                let fitted = match self.family {
                    Family::Gaussian => eta,
                    Family::Binomial => logistic(eta.clamp(-ETA_CAP, ETA_CAP)),
                };
                self.w[i] * (self.y[i] - fitted)
            })
            .collect();
        let mut worst = (resid.iter().sum::<f64>() / self.n_eff).abs();
        for j in 0..self.x.n_cols() {
            let b = fit.coefficients[j];
            if !self.usable[j] {
                worst = worst.max(b.abs());
                continue;
            }
            let (rows, vals) = self.x.column(j);
            let g = rows.iter().zip(vals).map(|(&i, &v)| v * resid[i as usize]).sum::<f64>() / self.n_eff;
            let viol = if self.is_free(j) {
                g.abs()
            } else if b == 0.0 {
                (g.abs() - lambda * self.alpha * self.pf1[j]).max(0.0)
            } else {
                (g - lambda * (1.0 - self.alpha) * self.pf2[j] * b - lambda * self.alpha * self.pf1[j] * b.signum())
                    .abs()
            };
            worst = worst.max(viol);
        }
        worst
    }
}

/// Penalized weighted least squares `(1/2N) Σ vᵢ (zᵢ − b₀ − xᵢβ)² + penalty`
/// solved by cyclic coordinate descent with the intercept profiled out.
///
/// The state keeps `q = z − Xβ`; the optimal intercept is `Σ v q / Σ v`, so
/// every coordinate update touches only the nonzeros of its column.
struct Wls<'s> {
    x: &'s DesignMatrix,
    v: &'s [f64],
    n: f64,
    vsum: f64,
    cols: Vec<usize>,
    /// `Σ vᵢ xᵢⱼ`, `Σ vᵢ xᵢⱼ²` and the centered curvature `aⱼ`.
    c: Vec<f64>,
    dsq: Vec<f64>,
    a: Vec<f64>,
    l1: Vec<f64>,
    l2: Vec<f64>,
    /// Convergence threshold on `aⱼ Δβⱼ²`.
    threshold: f64,
}

struct WlsState {
    beta: Vec<f64>,
    q: Vec<f64>,
    svq: f64,
    svqq: f64,
}

impl WlsState {
    fn new(wls: &Wls<'_>, beta: Vec<f64>, q: Vec<f64>) -> Self {
        let mut st = WlsState {
            beta,
            q,
            svq: 0.0,
            svqq: 0.0,
        };
        st.refresh(wls);
        st
    }

    fn refresh(&mut self, wls: &Wls<'_>) {
        let (mut s1, mut s2) = (0.0, 0.0);
        for (&v, &q) in wls.v.iter().zip(&self.q) {
            s1 += v * q;
            s2 += v * q * q;
        }
        self.svq = s1;
        self.svqq = s2;
    }

    fn intercept(&self, wls: &Wls<'_>) -> f64 {
        self.svq / wls.vsum
    }
}

impl<'s> Wls<'s> {
    fn new(
        x: &'s DesignMatrix,
        v: &'s [f64],
        n: f64,
        lambda: f64,
        problem: &GlmProblem<'_>,
        cols: Vec<usize>,
        tol: f64,
    ) -> Self {
        let p = x.n_cols();
        let vsum: f64 = v.iter().sum();
        let mut c = vec![0.0; p];
        let mut dsq = vec![0.0; p];
        let mut a = vec![0.0; p];
        for &j in &cols {
            let (rows, vals) = x.column(j);
            let (mut s1, mut s2) = (0.0, 0.0);
            for (&i, &xv) in rows.iter().zip(vals) {
                let vi = v[i as usize];
                s1 += vi * xv;
                s2 += vi * xv * xv;
            }
            c[j] = s1;
            dsq[j] = s2;
            a[j] = if vsum > 0.0 {
                ((s2 - s1 * s1 / vsum) / n).max(0.0)
            } else {
                0.0
            };
        }
        let l1 = problem.pf1.iter().map(|f| lambda * problem.alpha * f).collect();
        let l2 = problem.pf2.iter().map(|f| lambda * (1.0 - problem.alpha) * f).collect();
        Wls {
            x,
            v,
            n,
            vsum,
            cols,
            c,
            dsq,
            a,
            l1,
            l2,
            threshold: tol * problem.scale,
        }
    }

    /// Negative partial derivative of the smooth part in coordinate `j`.
    #[inline]
    fn gradient_parts(&self, j: usize, st: &WlsState) -> (f64, f64) {
        let (rows, vals) = self.x.column(j);
        let mut s = 0.0;
        for (&i, &xv) in rows.iter().zip(vals) {
            let i = i as usize;
            s += self.v[i] * xv * st.q[i];
        }
        let b0 = st.svq / self.vsum;
        (s, (s - b0 * self.c[j]) / self.n)
    }

    fn gradient(&self, j: usize, st: &WlsState) -> f64 {
        self.gradient_parts(j, st).1
    }

    fn objective(&self, st: &WlsState) -> f64 {
        let rss = (st.svqq - st.svq * st.svq / self.vsum).max(0.0);
        let mut pen = 0.0;
        for &j in &self.cols {
            let b = st.beta[j];
            if b != 0.0 {
                pen += 0.5 * self.l2[j] * b * b + self.l1[j] * b.abs();
            }
        }
        0.5 * rss / self.n + pen
    }

    fn sweep(&self, cols: &[usize], st: &mut WlsState) -> f64 {
        let mut dmax: f64 = 0.0;
        for &j in cols {
            let aj = self.a[j];
            if aj <= 0.0 {
                continue;
            }
            let (s, grad) = self.gradient_parts(j, st);
            let old = st.beta[j];
            let new = soft_threshold(aj * old + grad, self.l1[j]) / (aj + self.l2[j]);
            let d = new - old;
            if d != 0.0 {
                let (rows, vals) = self.x.column(j);
                for (&i, &xv) in rows.iter().zip(vals) {
                    st.q[i as usize] -= d * xv;
                }
                st.svq -= d * self.c[j];
                st.svqq += d * (d * self.dsq[j] - 2.0 * s);
                st.beta[j] = new;
                dmax = dmax.max(aj * d * d);
            }
        }
        dmax
    }

    /// Full sweeps alternate with sweeps over the active set until a full
    /// sweep changes no coefficient by more than the threshold.
    fn solve(&self, st: &mut WlsState, control: &Control, trace: &mut Vec<f64>) -> (usize, bool) {
        let mut sweeps = 0;
        loop {
            st.refresh(self);
            let dmax = self.sweep(&self.cols, st);
            sweeps += 1;
            trace.push(self.objective(st));
            if dmax < self.threshold {
                return (sweeps, true);
            }
            if sweeps >= control.max_cd_sweeps {
                return (sweeps, false);
            }
            let active: Vec<usize> = self.cols.iter().copied().filter(|&j| st.beta[j] != 0.0).collect();
            loop {
                let dmax = self.sweep(&active, st);
                sweeps += 1;
                trace.push(self.objective(st));
                if dmax < self.threshold {
                    break;
                }
                if sweeps >= control.max_cd_sweeps {
                    return (sweeps, false);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn soft_threshold_cases() {
        assert_eq!(soft_threshold(3.0, 1.0), 2.0);
        assert_eq!(soft_threshold(-0.5, 1.0), 0.0);
        assert_eq!(soft_threshold(0.0, 0.0), 0.0);
        assert_eq!(soft_threshold(-3.0, 1.0), -2.0);
    }

    fn toy() -> (DesignMatrix, Vec<f64>) {
        let rows = vec![
            vec![1.0, 0.0, 2.0],
            vec![0.0, 1.0, -1.0],
            vec![1.0, 1.0, 0.5],
            vec![0.0, 0.0, 1.5],
            vec![1.0, -1.0, 0.0],
            vec![2.0, 0.5, -0.5],
        ];
        let y = vec![1.0, 0.3, 2.2, 0.9, -0.4, 1.7];
        (DesignMatrix::from_dense(&rows).unwrap(), y)
    }

    #[test]
    fn at_lambda_max_everything_is_zero() {
        let (x, y) = toy();
        let prob = GlmProblem::new(&x, &y, None, Family::Gaussian, 1.0, true).unwrap();
        let lmax = prob.lambda_max().unwrap();
        let fit = prob.fit(lmax, &Control::default(), None).unwrap();
        assert_eq!(fit.n_nonzero_penalized, 0);
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        assert!((fit.intercept - mean).abs() < 1e-15);
        let fit = prob.fit(0.99 * lmax, &Control::default(), None).unwrap();
        assert!(fit.n_nonzero_penalized >= 1);
    }

    #[test]
    fn constant_response_has_zero_lambda_max() {
        let (x, _) = toy();
        let y = vec![2.0; 6];
        let prob = GlmProblem::new(&x, &y, None, Family::Gaussian, 1.0, false).unwrap();
        assert_eq!(prob.lambda_max().unwrap(), 0.0);
    }

    #[test]
    fn ridge_lambda_max_is_an_error() {
        let (x, y) = toy();
        let prob = GlmProblem::new(&x, &y, None, Family::Gaussian, 0.0, false).unwrap();
        assert!(matches!(prob.lambda_max(), Err(Error::Config(_))));
    }

    #[test]
    fn single_orthonormal_column() {
        // x has mean zero and unit 1/n variance; <x, y>/n = 0.4
        let x = DesignMatrix::from_dense(&[vec![1.0], vec![-1.0], vec![1.0], vec![-1.0]]).unwrap();
        let y = vec![0.5, -0.3, 0.5, -0.3];
        let prob = GlmProblem::new(&x, &y, None, Family::Gaussian, 1.0, true).unwrap();
        assert!((prob.lambda_max().unwrap() - 0.4).abs() < 1e-15);
    }

    #[test]
    fn objective_trace_is_monotone() {
        let (x, y) = toy();
        let prob = GlmProblem::new(&x, &y, None, Family::Gaussian, 0.5, true).unwrap();
        let fit = prob.fit(0.05, &Control::default(), None).unwrap();
        assert!(fit.converged);
        for w in fit.objective_trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-12 * w[0].abs().max(1.0), "{:?}", fit.objective_trace);
        }
        assert!((fit.objective - prob.objective(fit.intercept, &fit.coefficients, 0.05)).abs() < 1e-10);
        assert!(prob.kkt_violation(&fit) < 1e-6);
    }

    #[test]
    fn zero_design_gives_intercept_only() {
        let x = DesignMatrix::from_dense(&vec![vec![0.0, 0.0]; 4]).unwrap();
        let y = vec![1.0, 0.0, 1.0, 1.0];
        let g = GlmProblem::new(&x, &y, None, Family::Gaussian, 1.0, true).unwrap();
        let fit = g.fit(0.1, &Control::default(), None).unwrap();
        assert_eq!(fit.coefficients, vec![0.0, 0.0]);
        assert_eq!(fit.intercept, 0.75);
        let b = GlmProblem::new(&x, &y, None, Family::Binomial, 1.0, true).unwrap();
        let fit = b.fit(0.1, &Control::default(), None).unwrap();
        assert!((fit.intercept - 3f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn all_ones_binomial_is_capped_and_flagged() {
        let (x, _) = toy();
        let y = vec![1.0; 6];
        let fit = super::super::fit_binomial(
            &x,
            &y,
            &FitSpec {
                lambda: 0.1,
                ..FitSpec::default()
            },
        )
        .unwrap();
        assert!(fit.separation);
        assert!(fit.intercept >= ETA_CAP - 1e-6);
        assert!(fit.intercept.is_finite());
    }

    #[test]
    fn binomial_rejects_non_binary_response() {
        let (x, y) = toy();
        assert!(GlmProblem::new(&x, &y, None, Family::Binomial, 1.0, true).is_err());
    }

    #[test]
    fn zero_weight_rows_are_ignored() {
        let (x, y) = toy();
        let w = vec![1.0, 1.0, 1.0, 1.0, 0.0, 0.0];
        let weighted = GlmProblem::new(&x, &y, Some(&w), Family::Gaussian, 0.5, true).unwrap();
        let fit_w = weighted
            .fit(
                0.02,
                &Control {
                    tol: 1e-12,
                    ..Control::default()
                },
                None,
            )
            .unwrap();
        let sub = DesignMatrix::from_dense(&x.to_dense()[..4]).unwrap();
        let ysub = &y[..4];
        let direct = GlmProblem::new(&sub, ysub, None, Family::Gaussian, 0.5, true).unwrap();
        let fit_d = direct
            .fit(
                0.02,
                &Control {
                    tol: 1e-12,
                    ..Control::default()
                },
                None,
            )
            .unwrap();
        for (a, b) in fit_w.coefficients.iter().zip(&fit_d.coefficients) {
            assert!((a - b).abs() < 1e-9);
        }
        assert!((fit_w.intercept - fit_d.intercept).abs() < 1e-9);
    }
}
