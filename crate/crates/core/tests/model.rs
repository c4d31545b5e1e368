use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rapm::data::{build_registry, encode_design, CovariateSpec, DesignMatrix, Side};
use rapm::glm::{logistic, soft_threshold, Control, Family, GlmProblem};
use rapm::ratings::{
    category_probs, epts_from_predictors, epts_player, epts_reference, wepts, MultinomialFit, SignConvention,
};
use rapm::selection::{cross_validate, kfold_split, CvConfig, CvMetric, LambdaPath};
use rapm::synth::{generate, SynthConfig};

fn tight() -> Control {
    Control {
        tol: 1e-24,
        max_outer_iters: 200,
        max_cd_sweeps: 100_000,
    }
}

fn random_rows(seed: u64, n: usize, p: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..p).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let y = rows
        .iter()
        .map(|r| 1.0 + 2.0 * r[0] - r[1] + rng.random_range(-0.5..0.5))
        .collect();
    (rows, y)
}

#[test]
fn row_weight_two_equals_a_duplicated_row() {
    let (rows, y) = random_rows(1, 30, 4);
    let mut dup_rows = rows.clone();
    let mut dup_y = y.clone();
    dup_rows.push(rows[3].clone());
    dup_y.push(y[3]);
    let mut w = vec![1.0; 30];
    w[3] = 2.0;
    let x = DesignMatrix::from_dense(&rows).unwrap();
    let xd = DesignMatrix::from_dense(&dup_rows).unwrap();
    for family in [Family::Gaussian, Family::Binomial] {
        let (yy, yd): (Vec<f64>, Vec<f64>) = match family {
            Family::Gaussian => (y.clone(), dup_y.clone()),
            Family::Binomial => (
                y.iter().map(|v| f64::from(u8::from(*v > 1.0))).collect(),
                dup_y.iter().map(|v| f64::from(u8::from(*v > 1.0))).collect(),
            ),
        };
        let a = GlmProblem::new(&x, &yy, Some(&w), family, 0.7, true).unwrap();
        let b = GlmProblem::new(&xd, &yd, None, family, 0.7, true).unwrap();
        let lambda = 0.2 * a.lambda_max().unwrap();
        let fa = a.fit(lambda, &tight(), None).unwrap();
        let fb = b.fit(lambda, &tight(), None).unwrap();
        assert!((fa.intercept - fb.intercept).abs() < 1e-9);
        for (u, v) in fa.coefficients.iter().zip(&fb.coefficients) {
            assert!((u - v).abs() < 1e-9, "{family:?}: {u} vs {v}");
        }
    }
}

#[test]
fn warm_path_matches_cold_fits() {
    let (rows, y) = random_rows(2, 60, 6);
    let x = DesignMatrix::from_dense(&rows).unwrap();
    let problem = GlmProblem::new(&x, &y, None, Family::Gaussian, 1.0, true).unwrap();
    let path = LambdaPath::for_problem(&problem, 12, 1e-3).unwrap();
    let warm = problem.fit_path(path.values(), &tight()).unwrap();
    for (l, fw) in path.values().iter().zip(&warm) {
        let fc = problem.fit(*l, &tight(), None).unwrap();
        for (u, v) in fw.coefficients.iter().zip(&fc.coefficients) {
            assert!((u - v).abs() < 1e-8);
        }
        assert!(problem.kkt_violation(fw) < 1e-8);
    }
    assert_eq!(warm[0].n_nonzero_penalized, 0);
    assert_eq!(warm.last().unwrap().n_nonzero_penalized, 6);
}

#[test]
fn null_binomial_fit_is_the_logit_of_the_mean() {
    let (rows, y) = random_rows(3, 80, 3);
    let y01: Vec<f64> = y.iter().map(|v| f64::from(u8::from(*v > 1.5))).collect();
    let x = DesignMatrix::from_dense(&rows).unwrap();
    let problem = GlmProblem::new(&x, &y01, None, Family::Binomial, 1.0, true).unwrap();
    let fit = problem
        .fit(problem.lambda_max().unwrap() * 1.5, &tight(), None)
        .unwrap();
    let m = y01.iter().sum::<f64>() / y01.len() as f64;
    assert!((logistic(fit.intercept) - m).abs() < 1e-12);
    assert!(fit.coefficients.iter().all(|b| *b == 0.0));
}

#[test]
fn cross_validation_is_reproducible_and_brackets_the_minimum() {
    let (rows, y) = random_rows(4, 120, 5);
    let x = DesignMatrix::from_dense(&rows).unwrap();
    let problem = GlmProblem::new(&x, &y, None, Family::Gaussian, 1.0, true).unwrap();
    let path = LambdaPath::for_problem(&problem, 30, 1e-3).unwrap();
    let folds = kfold_split(120, 5, 8).unwrap();
    let cfg = CvConfig {
        folds: 5,
        seed: 8,
        metric: CvMetric::Rmse,
        control: Control::default(),
    };
    let a = cross_validate(&problem, &path, &folds, &cfg).unwrap();
    let b = cross_validate(&problem, &path, &folds, &cfg).unwrap();
    assert_eq!(a.path, b.path);
    assert!(a.lambda_1se >= a.lambda_min);
    let best = a.path.iter().map(|p| p.mean).fold(f64::INFINITY, f64::min);
    assert_eq!(a.path[a.index_min()].mean, best);
}

#[test]
fn sign_conventions_mirror_defense() {
    let season = generate(&SynthConfig {
        n_teams: 4,
        players_per_team: 8,
        n_possessions: 1500,
        seed: 6,
        ..SynthConfig::default()
    })
    .unwrap();
    let (reg, _) = build_registry(&season.possessions, None).unwrap();
    let (x, resp) = encode_design(&season.possessions, &reg, CovariateSpec::default());
    let mut comps: [Option<rapm::glm::FitResult>; 3] = Default::default();
    for (l, slot) in comps.iter_mut().enumerate() {
        let (ind, w) = resp.category_problem(l + 1);
        let p = GlmProblem::new(&x, &ind, Some(&w), Family::Binomial, 1.0, true).unwrap();
        *slot = Some(p.fit(0.3 * p.lambda_max().unwrap(), &Control::default(), None).unwrap());
    }
    let m = MultinomialFit::new(comps, resp.top_category_value()).unwrap();
    let e0 = epts_reference(&m);
    for row in m.row_probabilities(&x).iter().take(50) {
        assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
    for k in 0..reg.len() {
        let model = epts_player(&m, &x, k, Side::Defense, SignConvention::Model).unwrap();
        let paper = epts_player(&m, &x, k, Side::Defense, SignConvention::Paper).unwrap();
        let (o, d) = x.player_columns(k).unwrap();
        let b0 = m.intercepts();
        let bd = m.column_coefficients(d);
        let expect_model = epts_from_predictors(std::array::from_fn(|l| b0[l] - bd[l]), m.c3);
        let expect_paper = epts_from_predictors(std::array::from_fn(|l| b0[l] + bd[l]), m.c3);
        assert_eq!(model, expect_model);
        assert_eq!(paper, expect_paper);
        if bd.iter().all(|b| *b == 0.0) {
            assert_eq!(model, e0);
        }
        let off = epts_player(&m, &x, k, Side::Offense, SignConvention::Paper).unwrap();
        let bo = m.column_coefficients(o);
        assert_eq!(off, epts_from_predictors(std::array::from_fn(|l| b0[l] + bo[l]), m.c3));
    }
}

proptest! {
    #[test]
    fn probabilities_form_a_distribution(a in -700.0f64..700.0, b in -700.0f64..700.0, c in -700.0f64..700.0) {
        let p = category_probs(a, b, c);
        prop_assert!(p.iter().all(|v| (0.0..=1.0).contains(v)));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        let e = epts_from_predictors([a, b, c], 3.2);
        prop_assert!((0.0..=3.2).contains(&e));
    }

    #[test]
    fn wepts_is_a_convex_combination(w in 0.0f64..=1.0, e in 0.0f64..3.5, e0 in 0.0f64..3.5) {
        let v = wepts(w, e, e0);
        prop_assert!(v >= e.min(e0) && v <= e.max(e0));
        prop_assert_eq!(wepts(1.0, e, e0), e);
        prop_assert_eq!(wepts(0.0, e, e0), e0);
        prop_assert!((v - (w * e + (1.0 - w) * e0)).abs() < 1e-12);
    }

    #[test]
    fn soft_threshold_shrinks_toward_zero(z in -10.0f64..10.0, g in 0.0f64..5.0) {
        let s = soft_threshold(z, g);
        prop_assert!((s.abs() - (z.abs() - g).max(0.0)).abs() < 1e-12);
        prop_assert!(s == 0.0 || s.signum() == z.signum());
    }

    #[test]
    fn lasso_fits_satisfy_kkt(seed in 0u64..1000, frac in 0.01f64..1.0, alpha in 0.05f64..=1.0) {
        let (rows, y) = random_rows(seed, 40, 5);
        let x = DesignMatrix::from_dense(&rows).unwrap();
        let problem = GlmProblem::new(&x, &y, None, Family::Gaussian, alpha, seed % 2 == 0).unwrap();
        let fit = problem.fit(frac * problem.lambda_max().unwrap(), &tight(), None).unwrap();
        prop_assert!(fit.converged);
        prop_assert!(problem.kkt_violation(&fit) < 1e-7);
    }
}
