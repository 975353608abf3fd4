//! Evaluation harness: actual feature utility by ablation re-training
//! under cross-validation, predicted utility via the relevance test, and
//! the comparison report that puts both on one percentage scale.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::dataset::{mean, Dataset, FoldAssignment};
use crate::error::{Error, Result};
use crate::gbrt::{self, BoostLoss, BoostParams};
use crate::gradients::{
    descent_direction, grad_cross_entropy, grad_squared, lambda_ndcg, ndcg_of_query,
    GradientVector, LossId,
};
use crate::utility::{relevance_test, TestConfig, TestResult};

/// Per-feature comparison of actual ablation utility against the
/// re-training-free prediction.
#[derive(Debug, Clone, Serialize)]
pub struct AblationRecord {
    pub feature: String,
    pub actual_delta_loss: f64,
    pub actual_significant: bool,
    pub predicted_p: f64,
    pub predicted_score: f64,
    pub actual_pct: f64,
    pub predicted_pct: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RecallSummary {
    pub threshold_pct: f64,
    /// Features the test called irrelevant (p > 0.05) whose actual
    /// utility percentage exceeds the threshold.
    pub missed: usize,
    pub missed_features: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub dataset: String,
    pub loss: String,
    pub records: Vec<AblationRecord>,
    pub recall_summary: RecallSummary,
}

fn learner_loss(loss: LossId) -> BoostLoss {
    match loss {
        LossId::CrossEntropy => BoostLoss::Logistic,
        // Ranking uses a squared-loss regression on relevance as the
        // black-box scorer; evaluation is still NDCG.
        LossId::Squared | LossId::Ndcg => BoostLoss::Squared,
    }
}

fn subset(col: &[f64], rows: &[usize]) -> Vec<f64> {
    rows.iter().map(|&r| col[r]).collect()
}

/// Mean task loss over the given rows.
fn task_loss(
    loss: LossId,
    pred: &[f64],
    label: &[f64],
    groups: Option<&[usize]>,
    rows: &[usize],
) -> f64 {
    match loss {
        LossId::Squared => {
            rows.iter()
                .map(|&r| (pred[r] - label[r]).powi(2))
                .sum::<f64>()
                / rows.len() as f64
        }
        LossId::CrossEntropy => {
            rows.iter()
                .map(|&r| {
                    let p = pred[r].clamp(1e-12, 1.0 - 1e-12);
                    -(label[r] * p.ln() + (1.0 - label[r]) * (1.0 - p).ln())
                })
                .sum::<f64>()
                / rows.len() as f64
        }
        LossId::Ndcg => {
            let gids = groups.expect("ndcg loss requires group ids");
            let mut by_group: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
            for &r in rows {
                by_group.entry(gids[r]).or_default().push(r);
            }
            let mut total = 0.0;
            for docs in by_group.values() {
                let s: Vec<f64> = docs.iter().map(|&r| pred[r]).collect();
                let rel: Vec<i64> = docs.iter().map(|&r| label[r].round() as i64).collect();
                total += ndcg_of_query(&s, &rel);
            }
            1.0 - total / by_group.len() as f64
        }
    }
}

/// Train one model per fold on the out-of-fold rows and collect
/// predictions for every row from the fold that held it out, plus the
/// per-fold task losses.
pub fn cv_predictions(
    ds: &Dataset,
    feature_names: &[String],
    learner: &BoostParams,
    folds: &FoldAssignment,
    loss: LossId,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let cols = ds.feature_matrix(feature_names)?;
    let label = ds.label()?;
    let groups = ds.group_ids();
    let params = BoostParams {
        loss: learner_loss(loss),
        ..*learner
    };

    let per_fold: Vec<(Vec<usize>, Vec<f64>)> = (0..folds.k)
        .into_par_iter()
        .map(|fold| -> Result<(Vec<usize>, Vec<f64>)> {
            let train = folds.train_rows(fold);
            let test = folds.test_rows(fold);
            let train_cols: Vec<Vec<f64>> = cols.iter().map(|c| subset(c, &train)).collect();
            let train_refs: Vec<&[f64]> = train_cols.iter().map(|c| c.as_slice()).collect();
            let target = subset(label, &train);
            let model = gbrt::fit(&train_refs, &target, &params)?;
            let test_cols: Vec<Vec<f64>> = cols.iter().map(|c| subset(c, &test)).collect();
            let test_refs: Vec<&[f64]> = test_cols.iter().map(|c| c.as_slice()).collect();
            let pred = model.predict(&test_refs)?;
            Ok((test, pred))
        })
        .collect::<Result<_>>()?;

    let mut oof = vec![0.0; ds.n_rows()];
    for (rows, preds) in &per_fold {
        for (&r, &p) in rows.iter().zip(preds) {
            oof[r] = p;
        }
    }
    let fold_losses: Vec<f64> = (0..folds.k)
        .map(|fold| task_loss(loss, &oof, label, groups.as_deref(), &folds.test_rows(fold)))
        .collect();
    Ok((oof, fold_losses))
}

/// Two-sided paired t-test p-value over per-fold loss differences.
fn paired_t_p(diffs: &[f64]) -> f64 {
    let k = diffs.len();
    if k < 2 {
        return 1.0;
    }
    let m = mean(diffs);
    let var = diffs.iter().map(|d| (d - m) * (d - m)).sum::<f64>() / (k - 1) as f64;
    if var == 0.0 {
        return if m == 0.0 { 1.0 } else { 0.0 };
    }
    let t = m / (var / k as f64).sqrt();
    let dist = StudentsT::new(0.0, 1.0, (k - 1) as f64).expect("valid dof");
    2.0 * (1.0 - dist.cdf(t.abs()))
}

#[derive(Debug, Clone)]
pub struct ActualUtility {
    pub delta_loss: f64,
    pub fold_losses_full: Vec<f64>,
    pub fold_losses_ablated: Vec<f64>,
    pub p_value: f64,
    pub significant: bool,
}

/// Actual utility of one feature: re-train without it per fold and
/// compare fold losses against the full model's (`full_fold_losses`,
/// computed once per run and reused across features).
pub fn actual_utility(
    ds: &Dataset,
    feature: &str,
    learner: &BoostParams,
    folds: &FoldAssignment,
    loss: LossId,
    full_fold_losses: &[f64],
) -> Result<ActualUtility> {
    let names: Vec<String> = ds
        .feature_names()
        .into_iter()
        .filter(|n| n != feature)
        .collect();
    if names.len() == ds.feature_names().len() {
        return Err(Error::argument(format!(
            "feature '{feature}' is not an ablatable feature column"
        )));
    }
    let (_, ablated) = cv_predictions(ds, &names, learner, folds, loss)?;
    let diffs: Vec<f64> = ablated
        .iter()
        .zip(full_fold_losses)
        .map(|(a, f)| a - f)
        .collect();
    let p = paired_t_p(&diffs);
    Ok(ActualUtility {
        delta_loss: mean(&diffs),
        fold_losses_full: full_fold_losses.to_vec(),
        fold_losses_ablated: ablated,
        p_value: p,
        significant: p < 0.05,
    })
}

/// Gradient of the task loss at given predictions.
pub fn task_gradient(
    ds: &Dataset,
    pred: &[f64],
    loss: LossId,
) -> Result<GradientVector> {
    let label = ds.label()?;
    let raw = match loss {
        LossId::Squared => grad_squared(pred, label)?,
        LossId::CrossEntropy => grad_cross_entropy(pred, label)?,
        LossId::Ndcg => {
            let groups = ds.group_ids().ok_or_else(|| {
                Error::argument("ndcg loss requires a group role")
            })?;
            let rel: Vec<i64> = label.iter().map(|y| y.round() as i64).collect();
            lambda_ndcg(pred, &rel, &groups)?
        }
    };
    Ok(descent_direction(raw, loss))
}

/// Predicted utility of one feature: train the ablated model per fold,
/// collect out-of-fold predictions, take the task-loss gradient, and
/// run the relevance test with the held-out feature as candidate.
pub fn predicted_utility(
    ds: &Dataset,
    feature: &str,
    learner: &BoostParams,
    test: &TestConfig,
    folds: &FoldAssignment,
    loss: LossId,
    training_set_gradients: bool,
) -> Result<TestResult> {
    let names: Vec<String> = ds
        .feature_names()
        .into_iter()
        .filter(|n| n != feature)
        .collect();
    let pred = if training_set_gradients {
        let cols = ds.feature_matrix(&names)?;
        let params = BoostParams {
            loss: learner_loss(loss),
            ..*learner
        };
        let model = gbrt::fit(&cols, ds.label()?, &params)?;
        model.predict(&cols)?
    } else {
        cv_predictions(ds, &names, learner, folds, loss)?.0
    };
    let grad = task_gradient(ds, &pred, loss)?;
    let candidate = ds.block(feature)?;
    if candidate.is_empty() {
        return Err(Error::argument(format!(
            "feature '{feature}' has no numeric columns to test"
        )));
    }
    relevance_test(&candidate, &ds.block_names(feature), &grad, test)
}

/// Min-max normalize to [0, 100]; a zero range maps everything to 0.
fn range_pct(values: &[f64]) -> Vec<f64> {
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo <= 0.0 {
        return vec![0.0; values.len()];
    }
    values.iter().map(|v| 100.0 * (v - lo) / (hi - lo)).collect()
}

pub struct RawRecord {
    pub feature: String,
    pub actual: ActualUtility,
    pub predicted: TestResult,
}

/// Assemble the comparison report from per-feature outcomes.
pub fn compare_report(
    dataset_name: &str,
    loss: LossId,
    raw: &[RawRecord],
    recall_threshold_pct: f64,
) -> Result<Report> {
    if raw.len() < 2 {
        return Err(Error::argument(format!(
            "comparison report needs at least 2 features, got {}",
            raw.len()
        )));
    }
    let actual: Vec<f64> = raw.iter().map(|r| r.actual.delta_loss).collect();
    let predicted: Vec<f64> = raw.iter().map(|r| r.predicted.utility_score).collect();
    let actual_pct = range_pct(&actual);
    let predicted_pct = range_pct(&predicted);

    let records: Vec<AblationRecord> = raw
        .iter()
        .enumerate()
        .map(|(i, r)| AblationRecord {
            feature: r.feature.clone(),
            actual_delta_loss: r.actual.delta_loss,
            actual_significant: r.actual.significant,
            predicted_p: r.predicted.p_value,
            predicted_score: r.predicted.utility_score,
            actual_pct: actual_pct[i],
            predicted_pct: predicted_pct[i],
        })
        .collect();

    let missed_features: Vec<String> = records
        .iter()
        .filter(|r| r.predicted_p > 0.05 && r.actual_pct > recall_threshold_pct)
        .map(|r| r.feature.clone())
        .collect();
    Ok(Report {
        dataset: dataset_name.to_string(),
        loss: loss.as_str().to_string(),
        recall_summary: RecallSummary {
            threshold_pct: recall_threshold_pct,
            missed: missed_features.len(),
            missed_features,
        },
        records,
    })
}

impl Report {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Plot-ready CSV: feature, actual_pct, predicted_pct, p_value,
    /// significant.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("feature,actual_pct,predicted_pct,p_value,significant\n");
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.feature, r.actual_pct, r.predicted_pct, r.predicted_p, r.actual_significant
            ));
        }
        out
    }

    pub fn to_table(&self) -> String {
        let mut out = format!(
            "{:<24} {:>12} {:>8} {:>8} {:>10} {:>10}  sig\n",
            "feature", "actual ΔL", "act %", "pred %", "p-value", "score"
        );
        for r in &self.records {
            out.push_str(&format!(
                "{:<24} {:>12.5} {:>8.1} {:>8.1} {:>10.4} {:>10.3}  {}\n",
                r.feature,
                r.actual_delta_loss,
                r.actual_pct,
                r.predicted_pct,
                r.predicted_p,
                r.predicted_score,
                if r.actual_significant { "*" } else { "" }
            ));
        }
        out
    }
}

/// Run the full ablation protocol over every feature of the dataset.
pub fn ablation_study(
    ds: &Dataset,
    loss: LossId,
    learner: &BoostParams,
    test: &TestConfig,
    folds: &FoldAssignment,
    training_set_gradients: bool,
) -> Result<Vec<RawRecord>> {
    let all_names = ds.feature_names();
    let (_, full_losses) = cv_predictions(ds, &all_names, learner, folds, loss)?;
    all_names
        .par_iter()
        .map(|feature| -> Result<RawRecord> {
            let actual = actual_utility(ds, feature, learner, folds, loss, &full_losses)?;
            let predicted = predicted_utility(
                ds,
                feature,
                learner,
                test,
                folds,
                loss,
                training_set_gradients,
            )?;
            Ok(RawRecord {
                feature: feature.clone(),
                actual,
                predicted,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct CalibrationSummary {
    pub n: usize,
    pub reps: usize,
    pub alpha: f64,
    pub rejections: usize,
    pub rejection_rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub warning: Option<String>,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D049BB133111EB);
    x ^ (x >> 31)
}

/// Per-rep deterministic seed derivation for simulation loops.
pub fn rep_seed(base: u64, rep: usize) -> u64 {
    splitmix64(base ^ splitmix64(rep as u64 + 1))
}

/// Wilson score interval for a binomial proportion at ~95% confidence.
fn wilson_ci(successes: usize, trials: usize) -> (f64, f64) {
    let z = 1.959964;
    let n = trials as f64;
    let p = successes as f64 / n;
    let denom = 1.0 + z * z / n;
    let center = (p + z * z / (2.0 * n)) / denom;
    let half = z * ((p * (1.0 - p) + z * z / (4.0 * n)) / n).sqrt() / denom;
    (center - half, center + half)
}

/// Empirical level check: simulate a fitted predictor and an
/// independent candidate per rep, and report the rejection fraction at
/// `test.alpha` with a binomial confidence interval.
pub fn null_calibration(n: usize, reps: usize, test: &TestConfig) -> Result<CalibrationSummary> {
    if reps < 50 {
        return Err(Error::argument(format!("reps {reps} must be >= 50")));
    }
    let rejections = (0..reps)
        .into_par_iter()
        .map(|rep| -> Result<usize> {
            let mut rng = ChaCha8Rng::seed_from_u64(rep_seed(test.seed, rep));
            let x: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let y: Vec<f64> = x
                .iter()
                .map(|v| v + rng.sample::<f64, _>(StandardNormal))
                .collect();
            let candidate: Vec<f64> =
                (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let f0 = gbrt::fit(&[&x], &y, &BoostParams::default())?;
            let pred = f0.predict(&[&x])?;
            let raw = grad_squared(&pred, &y)?;
            let grad = descent_direction(raw, LossId::Squared);
            let cfg = TestConfig {
                seed: rep_seed(test.seed, rep).wrapping_add(1),
                ..*test
            };
            let res = relevance_test(&[&candidate], &["candidate".into()], &grad, &cfg)?;
            Ok(usize::from(res.rejects_at(test.alpha)))
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;

    let rate = rejections as f64 / reps as f64;
    let (lo, hi) = wilson_ci(rejections, reps);
    let warning = if test.n_bootstrap < 20 {
        Some(format!(
            "n_bootstrap = {} gives p-value granularity {:.2}; rates at alpha {} are degenerate",
            test.n_bootstrap,
            1.0 / test.n_bootstrap as f64,
            test.alpha
        ))
    } else {
        None
    };
    Ok(CalibrationSummary {
        n,
        reps,
        alpha: test.alpha,
        rejections,
        rejection_rate: rate,
        ci_low: lo,
        ci_high: hi,
        warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{split_folds, Roles};

    fn synth_regression(n: usize, seed: u64) -> Dataset {
        // y = x1 + noise, with an irrelevant x2 and a duplicated x1
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x1: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let x2: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let y: Vec<f64> = x1
            .iter()
            .map(|v| v + 0.3 * rng.sample::<f64, _>(StandardNormal))
            .collect();
        Dataset::from_numeric_columns(
            vec![
                ("x1".into(), x1.clone()),
                ("x1_twin".into(), x1),
                ("x2".into(), x2),
                ("y".into(), y),
            ],
            Roles {
                label: "y".into(),
                prediction: None,
                group: None,
                candidates: vec![],
            },
        )
        .unwrap()
    }

    fn quick_learner() -> BoostParams {
        BoostParams {
            n_rounds: 30,
            ..BoostParams::default()
        }
    }

    #[test]
    fn ablation_actual_utilities_behave() {
        let ds = synth_regression(600, 31);
        let folds = split_folds(&ds, 5, 1).unwrap();
        let learner = quick_learner();
        let all = ds.feature_names();
        let (_, full) = cv_predictions(&ds, &all, &learner, &folds, LossId::Squared).unwrap();

        // irrelevant feature: |ΔL| within noise
        let noise = actual_utility(&ds, "x2", &learner, &folds, LossId::Squared, &full).unwrap();
        assert!(!noise.significant, "x2 ΔL {} p {}", noise.delta_loss, noise.p_value);

        // duplicated column substitutes, so ablating one copy costs ~nothing
        let twin = actual_utility(&ds, "x1_twin", &learner, &folds, LossId::Squared, &full).unwrap();
        assert!(
            twin.delta_loss.abs() < 0.1,
            "twin ΔL {} should be near zero",
            twin.delta_loss
        );
    }

    #[test]
    fn ablation_detects_the_informative_feature() {
        // no twin here, so removing x1 must hurt
        let n = 600;
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let x1: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let x2: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let y: Vec<f64> = x1
            .iter()
            .map(|v| v + 0.3 * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let ds = Dataset::from_numeric_columns(
            vec![("x1".into(), x1), ("x2".into(), x2), ("y".into(), y)],
            Roles {
                label: "y".into(),
                prediction: None,
                group: None,
                candidates: vec![],
            },
        )
        .unwrap();
        let folds = split_folds(&ds, 5, 2).unwrap();
        let learner = quick_learner();
        let all = ds.feature_names();
        let (_, full) = cv_predictions(&ds, &all, &learner, &folds, LossId::Squared).unwrap();
        let a = actual_utility(&ds, "x1", &learner, &folds, LossId::Squared, &full).unwrap();
        assert!(a.delta_loss > 0.0 && a.significant, "ΔL {} p {}", a.delta_loss, a.p_value);

        let pred = predicted_utility(
            &ds,
            "x1",
            &learner,
            &TestConfig {
                n_bootstrap: 50,
                seed: 3,
                regressor: BoostParams {
                    n_rounds: 30,
                    ..BoostParams::default()
                },
                ..TestConfig::default()
            },
            &folds,
            LossId::Squared,
            false,
        )
        .unwrap();
        assert!(pred.p_value <= 0.01, "p {}", pred.p_value);
    }

    #[test]
    fn report_normalization_and_degenerate_range() {
        assert_eq!(range_pct(&[1.0, 1.0, 1.0]), vec![0.0, 0.0, 0.0]);
        let pct = range_pct(&[2.0, 4.0, 3.0]);
        assert_eq!(pct, vec![0.0, 100.0, 50.0]);
    }

    #[test]
    fn report_requires_two_features() {
        assert!(compare_report("d", LossId::Squared, &[], 20.0).is_err());
    }

    #[test]
    fn ranking_predicted_utility_runs_end_to_end() {
        // synthetic ranking task with a useless candidate
        let n_queries = 40;
        let per_q = 5;
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        let mut x1 = Vec::new();
        let mut junk = Vec::new();
        let mut rel = Vec::new();
        let mut q = Vec::new();
        for qi in 0..n_queries {
            for _ in 0..per_q {
                let v: f64 = rng.sample(StandardNormal);
                x1.push(v);
                junk.push(rng.sample::<f64, _>(StandardNormal));
                rel.push(if v > 0.5 { 2.0 } else if v > -0.5 { 1.0 } else { 0.0 });
                q.push(qi as f64);
            }
        }
        let ds = Dataset::from_numeric_columns(
            vec![
                ("x1".into(), x1),
                ("junk".into(), junk),
                ("rel".into(), rel),
                ("q".into(), q),
            ],
            Roles {
                label: "rel".into(),
                prediction: None,
                group: Some("q".into()),
                candidates: vec![],
            },
        )
        .unwrap();
        let folds = split_folds(&ds, 4, 5).unwrap();
        let res = predicted_utility(
            &ds,
            "junk",
            &quick_learner(),
            &TestConfig {
                n_bootstrap: 50,
                seed: 6,
                regressor: BoostParams {
                    n_rounds: 20,
                    ..BoostParams::default()
                },
                ..TestConfig::default()
            },
            &folds,
            LossId::Ndcg,
            false,
        )
        .unwrap();
        assert!(res.p_value > 0.05, "useless ranking candidate p {}", res.p_value);
    }

    #[test]
    fn paired_t_edge_cases() {
        assert_eq!(paired_t_p(&[0.0, 0.0, 0.0]), 1.0);
        assert_eq!(paired_t_p(&[1.0, 1.0, 1.0]), 0.0);
        assert!(paired_t_p(&[0.1, -0.2, 0.05, 0.02]) > 0.05);
    }

    #[test]
    fn wilson_interval_is_sane() {
        let (lo, hi) = wilson_ci(10, 200);
        assert!(lo > 0.0 && lo < 0.05 && hi > 0.05 && hi < 0.12, "({lo}, {hi})");
    }
}
