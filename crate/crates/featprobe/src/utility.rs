//! The feature utility test: least-squares fit of the candidate onto the
//! standardized descent direction, the √n-covariance statistic, and the
//! marginal-bootstrap null that calibrates it.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{mean, population_std, standardize};
use crate::error::{Error, Result};
use crate::gbrt::{self, BoostLoss, BoostParams, BoostedModel};
use crate::gradients::GradientVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestConfig {
    pub n_bootstrap: usize,
    pub alpha: f64,
    pub regressor: BoostParams,
    pub seed: u64,
}

impl Default for TestConfig {
    fn default() -> Self {
        TestConfig {
            n_bootstrap: 100,
            alpha: 0.05,
            regressor: BoostParams {
                loss: BoostLoss::Squared,
                ..BoostParams::default()
            },
            seed: 0,
        }
    }
}

/// Outcome of one relevance test. Field order is the serialization
/// order; identical inputs and seed give byte-identical JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub candidate_names: Vec<String>,
    pub n: usize,
    pub loss: Option<String>,
    pub statistic_v: f64,
    pub p_value: f64,
    pub p_smoothed: f64,
    pub utility_score: f64,
    pub null_mean: f64,
    pub null_std: f64,
    pub null_sample: Vec<f64>,
    pub config: TestConfig,
}

impl TestResult {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn rejects_at(&self, alpha: f64) -> bool {
        self.p_value <= alpha
    }
}

/// Least-squares boosted fit of the candidate columns onto the
/// standardized descent direction.
pub fn fit_g_star(
    candidate: &[&[f64]],
    grad: &GradientVector,
    params: &BoostParams,
) -> Result<BoostedModel> {
    let params = BoostParams {
        loss: BoostLoss::Squared,
        ..*params
    };
    gbrt::fit(candidate, &grad.standardized, &params)
}

/// √n times the empirical covariance of the fitted transform and the
/// descent direction.
pub fn k_statistic(g_pred: &[f64], lambda_std: &[f64]) -> Result<f64> {
    let n = g_pred.len();
    if n == 0 || n != lambda_std.len() {
        return Err(Error::argument(format!(
            "length mismatch: {} predictions vs {} gradient values",
            n,
            lambda_std.len()
        )));
    }
    let cross = g_pred
        .iter()
        .zip(lambda_std)
        .map(|(g, l)| g * l)
        .sum::<f64>()
        / n as f64;
    Ok((n as f64).sqrt() * (cross - mean(g_pred) * mean(lambda_std)))
}

/// Sample the null: per trial, permute the candidate rows and the
/// gradient values through *independent* random orderings (breaking
/// their joint distribution while preserving both marginals exactly),
/// restandardize the permuted gradient, refit the regressor, and record
/// the statistic.
///
/// Permutations, rather than with-replacement draws, keep the trial
/// data's distinct-value structure identical to the observed data's, so
/// the refit regressor has the same overfitting capacity in every trial
/// and the observed statistic is exchangeable with the null draws under
/// independence — the test holds its level exactly, not just
/// asymptotically.
///
/// Trial `i` draws from an RNG stream derived from `(config.seed, i)`,
/// so the returned vector is identical for any parallel schedule.
pub fn bootstrap_null(
    candidate: &[&[f64]],
    lambda_hat: &[f64],
    config: &TestConfig,
) -> Result<Vec<f64>> {
    let n = lambda_hat.len();
    if n < 2 {
        return Err(Error::argument(format!("need n >= 2 rows, got {n}")));
    }
    if config.n_bootstrap == 0 {
        return Err(Error::argument("n_bootstrap must be >= 1"));
    }
    (0..config.n_bootstrap)
        .into_par_iter()
        .map(|trial| bootstrap_trial(candidate, lambda_hat, config, trial))
        .collect()
}

fn bootstrap_trial(
    candidate: &[&[f64]],
    lambda_hat: &[f64],
    config: &TestConfig,
    trial: usize,
) -> Result<f64> {
    let n = lambda_hat.len();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(trial as u64 + 1);

    let mut x_idx: Vec<usize> = (0..n).collect();
    let mut l_idx: Vec<usize> = (0..n).collect();
    x_idx.shuffle(&mut rng);
    l_idx.shuffle(&mut rng);

    let resampled_cols: Vec<Vec<f64>> = candidate
        .iter()
        .map(|col| x_idx.iter().map(|&i| col[i]).collect())
        .collect();
    let lambda_resampled: Vec<f64> = l_idx.iter().map(|&i| lambda_hat[i]).collect();
    let (lambda_tilde, st) = standardize(&lambda_resampled);
    if st.std == 0.0 {
        return Ok(0.0);
    }

    let refs: Vec<&[f64]> = resampled_cols.iter().map(|c| c.as_slice()).collect();
    let model = gbrt::fit(&refs, &lambda_tilde, &config.regressor)?;
    let pred = model.predict(&refs)?;
    k_statistic(&pred, &lambda_tilde)
}

/// The full feature relevance test: observed statistic against the
/// bootstrap null, reporting p-value and utility (z) score.
///
/// A perfectly fit predictor (`grad.sigma == 0`) short-circuits to
/// p = 1 and utility 0: no improvement is possible.
pub fn relevance_test(
    candidate: &[&[f64]],
    candidate_names: &[String],
    grad: &GradientVector,
    config: &TestConfig,
) -> Result<TestResult> {
    if config.n_bootstrap == 0 {
        return Err(Error::argument("n_bootstrap must be >= 1"));
    }
    let n = grad.standardized.len();
    for col in candidate {
        if col.len() != n {
            return Err(Error::argument(format!(
                "candidate column has {} rows, gradient has {n}",
                col.len()
            )));
        }
    }

    if grad.sigma == 0.0 {
        return Ok(TestResult {
            candidate_names: candidate_names.to_vec(),
            n,
            loss: Some(grad.loss_id.as_str().to_string()),
            statistic_v: 0.0,
            p_value: 1.0,
            p_smoothed: 1.0,
            utility_score: 0.0,
            null_mean: 0.0,
            null_std: 0.0,
            null_sample: vec![0.0; config.n_bootstrap],
            config: *config,
        });
    }

    let model = fit_g_star(candidate, grad, &config.regressor)?;
    let pred = model.predict(candidate)?;
    let v = k_statistic(&pred, &grad.standardized)?;

    let null = bootstrap_null(candidate, &grad.standardized, config)?;
    Ok(summarize(candidate_names, n, Some(grad.loss_id.as_str()), v, null, config))
}

fn summarize(
    candidate_names: &[String],
    n: usize,
    loss: Option<&str>,
    v: f64,
    null: Vec<f64>,
    config: &TestConfig,
) -> TestResult {
    let nb = null.len() as f64;
    let greater = null.iter().filter(|&&t| t > v).count();
    let geq = null.iter().filter(|&&t| t >= v).count();
    let null_mean = mean(&null);
    let null_std = population_std(&null);
    let utility_score = if null_std > 0.0 {
        (v - null_mean) / null_std
    } else {
        0.0
    };
    TestResult {
        candidate_names: candidate_names.to_vec(),
        n,
        loss: loss.map(|s| s.to_string()),
        statistic_v: v,
        p_value: greater as f64 / nb,
        p_smoothed: (1.0 + geq as f64) / (nb + 1.0),
        utility_score,
        null_mean,
        null_std,
        null_sample: null,
        config: *config,
    }
}
