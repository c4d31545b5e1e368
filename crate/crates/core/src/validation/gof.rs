use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::data::category_of;
use crate::error::{Error, Result};

/// Parametric-bootstrap chi-square check of the marginal outcome counts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GofResult {
    pub n_sims: usize,
    pub seed: u64,
    /// Observed counts of 0, 1, 2 and 3+ point possessions.
    pub observed: [u64; 4],
    /// Mean simulated counts.
    pub expected: [f64; 4],
    /// Relative frequencies of each simulated sample.
    #[serde(skip)]
    pub simulated_freqs: Vec<[f64; 4]>,
    pub chi2_observed: f64,
    pub p_value: f64,
}

fn chi2(counts: &[f64; 4], expected: &[f64; 4]) -> f64 {
    let mut s = 0.0;
    for (o, e) in counts.iter().zip(expected) {
        if *e > 0.0 {
            s += (o - e) * (o - e) / e;
        } else if *o > 0.0 {
            return f64::INFINITY;
        }
    }
    s
}

/// Draw one category per row from `probs`.
fn simulate(probs: &[[f64; 4]], rng: &mut ChaCha8Rng) -> [u64; 4] {
    let mut counts = [0u64; 4];
    for p in probs {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut cat = 3;
        for (c, pc) in p.iter().enumerate().take(3) {
            acc += pc;
            if u < acc {
                cat = c;
                break;
            }
        }
        counts[cat] += 1;
    }
    counts
}

/// Simulate `n_sims` samples of categories from per-row probabilities and
/// compare the observed marginal counts with the simulated ones. Replicate
/// `r` draws from its own generator seeded with `seed + r`.
pub fn goodness_of_fit(probs: &[[f64; 4]], observed_pts: &[u8], n_sims: usize, seed: u64) -> Result<GofResult> {
    if probs.len() != observed_pts.len() {
        return Err(Error::Input(format!(
            "{} probability rows for {} observations",
            probs.len(),
            observed_pts.len()
        )));
    }
    if n_sims == 0 {
        return Err(Error::Config("goodness of fit needs at least one simulation".into()));
    }
    let mut observed = [0u64; 4];
    for &pts in observed_pts {
        observed[category_of(pts)] += 1;
    }
    let sims: Vec<[u64; 4]> = (0..n_sims as u64)
        .into_par_iter()
        .map(|r| simulate(probs, &mut ChaCha8Rng::seed_from_u64(seed.wrapping_add(r))))
        .collect();
    let mut expected = [0.0; 4];
    for s in &sims {
        for c in 0..4 {
            expected[c] += s[c] as f64;
        }
    }
    for e in &mut expected {
        *e /= n_sims as f64;
    }
    let as_f64 = |c: &[u64; 4]| c.map(|v| v as f64);
    let chi2_observed = chi2(&as_f64(&observed), &expected);
    let exceed = sims
        .iter()
        .filter(|s| chi2(&as_f64(s), &expected) >= chi2_observed)
        .count();
    let n = probs.len().max(1) as f64;
    Ok(GofResult {
        n_sims,
        seed,
        observed,
        expected,
        simulated_freqs: sims.iter().map(|s| s.map(|v| v as f64 / n)).collect(),
        chi2_observed,
        p_value: exceed as f64 / n_sims as f64,
    })
}

/// Root mean squared error of predicted expected points.
pub fn model_rmse(predicted: &[f64], observed: &[f64]) -> Result<f64> {
    if predicted.len() != observed.len() || predicted.is_empty() {
        return Err(Error::Input(
            "prediction and observation lengths differ or are zero".into(),
        ));
    }
    let sse: f64 = predicted.iter().zip(observed).map(|(p, o)| (p - o) * (p - o)).sum();
    Ok((sse / predicted.len() as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_model_rejects_scores() {
        let probs = vec![[1.0, 0.0, 0.0, 0.0]; 20];
        let mut pts = vec![0u8; 20];
        pts[3] = 2;
        let g = goodness_of_fit(&probs, &pts, 50, 1).unwrap();
        assert_eq!(g.p_value, 0.0);
        assert_eq!(g.expected, [20.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn reproducible_and_normalized() {
        let probs = vec![[0.6, 0.03, 0.26, 0.11]; 200];
        let pts: Vec<u8> = (0..200).map(|i| [0, 2, 0, 3, 0][i % 5]).collect();
        let a = goodness_of_fit(&probs, &pts, 100, 9).unwrap();
        let b = goodness_of_fit(&probs, &pts, 100, 9).unwrap();
        assert_eq!(a, b);
        for f in &a.simulated_freqs {
            assert!((f.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rmse_cases() {
        let obs = [0.0, 2.0, 0.0, 3.0];
        assert_eq!(model_rmse(&obs, &obs).unwrap(), 0.0);
        let mean = 1.25;
        let sd = (obs.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / 4.0).sqrt();
        assert!((model_rmse(&[mean; 4], &obs).unwrap() - sd).abs() < 1e-15);
    }
}
