//! Per-instance loss gradients at the current predictions, and their
//! transformation into the standardized descent direction.
//!
//! Supported losses: squared error `½(f−y)²`, cross-entropy
//! `−(y ln f + (1−y) ln(1−f))`, and NDCG via pairwise λ-estimates.

use serde::{Deserialize, Serialize};

use crate::dataset::{mean, population_std};
use crate::error::{Error, Result};

/// Clipping bound keeping cross-entropy gradients finite for hard labels.
const PROB_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossId {
    Squared,
    CrossEntropy,
    Ndcg,
}

impl LossId {
    pub fn as_str(&self) -> &'static str {
        match self {
            LossId::Squared => "squared",
            LossId::CrossEntropy => "cross_entropy",
            LossId::Ndcg => "ndcg",
        }
    }
}

impl std::str::FromStr for LossId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "squared" => Ok(LossId::Squared),
            "cross_entropy" => Ok(LossId::CrossEntropy),
            "ndcg" => Ok(LossId::Ndcg),
            other => Err(Error::argument(format!(
                "unknown loss '{other}' (expected squared, cross_entropy, or ndcg)"
            ))),
        }
    }
}

/// Raw per-instance gradients together with the standardized descent
/// direction: the centered, negated, unit-std rescaling of the raw
/// gradient.
#[derive(Debug, Clone)]
pub struct GradientVector {
    pub raw: Vec<f64>,
    pub standardized: Vec<f64>,
    pub sigma: f64,
    pub loss_id: LossId,
}

/// ∂/∂f of ½(f−y)²: element-wise `f − y`.
pub fn grad_squared(pred: &[f64], label: &[f64]) -> Result<Vec<f64>> {
    if pred.len() != label.len() {
        return Err(Error::argument(format!(
            "length mismatch: {} predictions vs {} labels",
            pred.len(),
            label.len()
        )));
    }
    Ok(pred.iter().zip(label).map(|(f, y)| f - y).collect())
}

/// ∂/∂f of −(y ln f + (1−y) ln(1−f)): element-wise `(f−y)/(f(1−f))`,
/// with probabilities clipped away from {0, 1}.
pub fn grad_cross_entropy(prob: &[f64], label: &[f64]) -> Result<Vec<f64>> {
    if prob.len() != label.len() {
        return Err(Error::argument(format!(
            "length mismatch: {} probabilities vs {} labels",
            prob.len(),
            label.len()
        )));
    }
    if let Some(y) = label.iter().find(|y| !(0.0..=1.0).contains(*y)) {
        return Err(Error::argument(format!(
            "cross-entropy label {y} outside [0, 1]"
        )));
    }
    Ok(prob
        .iter()
        .zip(label)
        .map(|(f, y)| {
            let f = f.clamp(PROB_EPS, 1.0 - PROB_EPS);
            (f - y) / (f * (1.0 - f))
        })
        .collect())
}

/// NDCG λ-estimates: per-query aggregation of pairwise swap deltas
/// weighted by a sigmoid of the score difference.
///
/// For each ordered pair (i, j) in a query with `rel_i > rel_j`,
/// `w_ij = |ΔNDCG_ij| / (1 + exp(s_i − s_j))` where the swap delta uses
/// gain `2^rel` differences, discount `1/log2(1 + rank)` at the current
/// ranks, and the query's ideal DCG as normalizer. λ_i loses w_ij,
/// λ_j gains it, so λ behaves like a loss gradient (negative for
/// documents that should rise). Queries with no mis-orderable pairs or
/// zero ideal DCG contribute zeros.
pub fn lambda_ndcg(scores: &[f64], relevance: &[i64], groups: &[usize]) -> Result<Vec<f64>> {
    let n = scores.len();
    if relevance.len() != n || groups.len() != n {
        return Err(Error::argument(format!(
            "length mismatch: {} scores, {} relevances, {} group ids",
            n,
            relevance.len(),
            groups.len()
        )));
    }
    if let Some(r) = relevance.iter().find(|&&r| r < 0) {
        return Err(Error::argument(format!("negative relevance {r}")));
    }

    let n_groups = groups.iter().copied().max().map(|m| m + 1).unwrap_or(0);
    let mut by_group: Vec<Vec<usize>> = vec![Vec::new(); n_groups];
    for (i, &g) in groups.iter().enumerate() {
        by_group[g].push(i);
    }

    let mut lambda = vec![0.0; n];
    for docs in &by_group {
        if docs.len() < 2 {
            continue;
        }
        // ranks from sorting by score descending, stable by original index
        let mut order = docs.clone();
        order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap().then(a.cmp(&b)));
        let mut rank_of = vec![0usize; docs.len()];
        let pos_in_docs: std::collections::HashMap<usize, usize> =
            docs.iter().enumerate().map(|(p, &d)| (d, p)).collect();
        for (r, &d) in order.iter().enumerate() {
            rank_of[pos_in_docs[&d]] = r + 1;
        }
        let idcg = ideal_dcg(docs.iter().map(|&d| relevance[d]));
        if idcg <= 0.0 {
            continue;
        }
        for (pi, &i) in docs.iter().enumerate() {
            for (pj, &j) in docs.iter().enumerate() {
                if relevance[i] <= relevance[j] {
                    continue;
                }
                let gain_diff =
                    ((1u64 << relevance[i]) as f64) - ((1u64 << relevance[j]) as f64);
                let disc_i = 1.0 / ((1 + rank_of[pi]) as f64).log2();
                let disc_j = 1.0 / ((1 + rank_of[pj]) as f64).log2();
                let delta = gain_diff * (disc_i - disc_j).abs() / idcg;
                let w = delta / (1.0 + (scores[i] - scores[j]).exp());
                lambda[i] -= w;
                lambda[j] += w;
            }
        }
    }
    Ok(lambda)
}

fn ideal_dcg(rels: impl Iterator<Item = i64>) -> f64 {
    let mut sorted: Vec<i64> = rels.collect();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    sorted
        .iter()
        .enumerate()
        .map(|(r, &rel)| ((1u64 << rel) as f64 - 1.0) / ((r + 2) as f64).log2())
        .sum()
}

/// NDCG of a query given current scores (used by the evaluation
/// harness's task loss). Ties broken stably by original index.
pub fn ndcg_of_query(scores: &[f64], relevance: &[i64]) -> f64 {
    let idcg = ideal_dcg(relevance.iter().copied());
    if idcg <= 0.0 {
        return 1.0;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap().then(a.cmp(&b)));
    let dcg: f64 = order
        .iter()
        .enumerate()
        .map(|(r, &d)| ((1u64 << relevance[d]) as f64 - 1.0) / ((r + 2) as f64).log2())
        .sum();
    dcg / idcg
}

/// Standardized descent direction: `−(raw − mean)/std` with population
/// std. A zero-variance gradient yields all zeros with `sigma = 0`.
pub fn descent_direction(raw: Vec<f64>, loss_id: LossId) -> GradientVector {
    assert!(!raw.is_empty(), "descent_direction requires a non-empty gradient");
    let m = mean(&raw);
    let sigma = population_std(&raw);
    let standardized = if sigma > 0.0 {
        raw.iter().map(|x| -(x - m) / sigma).collect()
    } else {
        vec![0.0; raw.len()]
    };
    GradientVector {
        raw,
        standardized,
        sigma,
        loss_id,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng as _, SeedableRng as _};
    use rand_chacha::ChaCha8Rng;

    /// Central finite difference of a scalar loss in its first argument.
    pub(crate) fn finite_diff(loss: impl Fn(f64) -> f64, f: f64) -> f64 {
        let h = 1e-6 * f.abs().max(1.0);
        (loss(f + h) - loss(f - h)) / (2.0 * h)
    }

    /// Brute-force λ oracle: swap the pair in the current ranking,
    /// recompute NDCG from scratch, weight by the sigmoid.
    pub(crate) fn lambda_oracle(scores: &[f64], relevance: &[i64]) -> Vec<f64> {
        let n = scores.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap().then(a.cmp(&b)));
        let idcg = ideal_dcg(relevance.iter().copied());
        let mut lambda = vec![0.0; n];
        if idcg <= 0.0 {
            return lambda;
        }
        let dcg_at = |perm: &[usize]| -> f64 {
            perm.iter()
                .enumerate()
                .map(|(r, &d)| ((1u64 << relevance[d]) as f64 - 1.0) / ((r + 2) as f64).log2())
                .sum::<f64>()
        };
        let base = dcg_at(&order) / idcg;
        for i in 0..n {
            for j in 0..n {
                if relevance[i] <= relevance[j] {
                    continue;
                }
                let pi = order.iter().position(|&d| d == i).unwrap();
                let pj = order.iter().position(|&d| d == j).unwrap();
                let mut swapped = order.clone();
                swapped.swap(pi, pj);
                let delta = (dcg_at(&swapped) / idcg - base).abs();
                let w = delta / (1.0 + (scores[i] - scores[j]).exp());
                lambda[i] -= w;
                lambda[j] += w;
            }
        }
        lambda
    }

    #[test]
    fn squared_gradient_values() {
        assert_eq!(grad_squared(&[2.0], &[1.5]).unwrap(), vec![0.5]);
        assert_eq!(grad_squared(&[3.0, -1.0], &[3.0, -1.0]).unwrap(), vec![0.0, 0.0]);
        assert!(grad_squared(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn squared_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let f: f64 = rng.gen_range(-10.0..10.0);
            let y: f64 = rng.gen_range(-10.0..10.0);
            let g = grad_squared(&[f], &[y]).unwrap()[0];
            let fd = finite_diff(|u| 0.5 * (u - y) * (u - y), f);
            assert!((g - fd).abs() <= 1e-6 * fd.abs().max(1.0), "f={f} y={y}");
        }
    }

    #[test]
    fn cross_entropy_gradient_values() {
        let g = grad_cross_entropy(&[0.8], &[1.0]).unwrap()[0];
        assert!((g - (-1.25)).abs() < 1e-12);
        let g = grad_cross_entropy(&[0.5], &[0.5]).unwrap()[0];
        assert_eq!(g, 0.0);
        let g = grad_cross_entropy(&[0.5], &[0.0]).unwrap()[0];
        assert!((g - 2.0).abs() < 1e-12);
        assert!(grad_cross_entropy(&[0.5], &[1.5]).is_err());
    }

    #[test]
    fn cross_entropy_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let f: f64 = rng.gen_range(0.05..0.95);
            let y: f64 = rng.gen_range(0.0..=1.0);
            let g = grad_cross_entropy(&[f], &[y]).unwrap()[0];
            let fd = finite_diff(|u| -(y * u.ln() + (1.0 - y) * (1.0 - u).ln()), f);
            assert!((g - fd).abs() <= 1e-6 * fd.abs().max(1.0), "f={f} y={y}");
        }
    }

    #[test]
    fn ndcg_two_doc_query() {
        let l = lambda_ndcg(&[0.0, 0.0], &[1, 0], &[0, 0]).unwrap();
        let expected = 0.5 * (1.0 - 1.0 / 3f64.log2());
        assert!((l[0] + expected).abs() < 1e-10, "{l:?}");
        assert!((l[1] - expected).abs() < 1e-10);
        assert!((expected - 0.18455).abs() < 1e-4);
    }

    #[test]
    fn ndcg_all_equal_relevance_is_zero() {
        let l = lambda_ndcg(&[3.0, 1.0, 2.0], &[1, 1, 1], &[0, 0, 0]).unwrap();
        assert_eq!(l, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn ndcg_singleton_group_and_errors() {
        let l = lambda_ndcg(&[1.0], &[3], &[0]).unwrap();
        assert_eq!(l, vec![0.0]);
        assert!(lambda_ndcg(&[1.0], &[-1], &[0]).is_err());
        assert!(lambda_ndcg(&[1.0], &[1, 2], &[0]).is_err());
    }

    #[test]
    fn ndcg_matches_swap_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let m = rng.gen_range(2..=8);
            let scores: Vec<f64> = (0..m).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let rels: Vec<i64> = (0..m).map(|_| rng.gen_range(0..4)).collect();
            let groups = vec![0usize; m];
            let got = lambda_ndcg(&scores, &rels, &groups).unwrap();
            let want = lambda_oracle(&scores, &rels);
            for (g, w) in got.iter().zip(&want) {
                assert!((g - w).abs() < 1e-10, "{got:?} vs {want:?}");
            }
        }
    }

    #[test]
    fn descent_direction_values() {
        let gv = descent_direction(vec![1.0, 3.0], LossId::Squared);
        assert_eq!(gv.standardized, vec![1.0, -1.0]);
        assert_eq!(gv.sigma, 1.0);

        let gv = descent_direction(vec![2.0, 2.0, 2.0], LossId::Squared);
        assert_eq!(gv.standardized, vec![0.0, 0.0, 0.0]);
        assert_eq!(gv.sigma, 0.0);
    }

    proptest! {
        #[test]
        fn descent_direction_contract(raw in proptest::collection::vec(-1e3f64..1e3, 2..64)) {
            let gv = descent_direction(raw.clone(), LossId::Squared);
            if gv.sigma > 0.0 {
                prop_assert!(crate::dataset::mean(&gv.standardized).abs() < 1e-10);
                prop_assert!((crate::dataset::population_std(&gv.standardized) - 1.0).abs() < 1e-10);
            }
        }

        #[test]
        fn descent_direction_scale_shift_invariant(
            raw in proptest::collection::vec(-100f64..100.0, 3..32),
            c in 0.01f64..100.0,
            d in -100f64..100.0,
        ) {
            let base = descent_direction(raw.clone(), LossId::Squared);
            let scaled = descent_direction(raw.iter().map(|x| c * x + d).collect(), LossId::Squared);
            if base.sigma > 0.0 {
                for (a, b) in base.standardized.iter().zip(&scaled.standardized) {
                    prop_assert!((a - b).abs() < 1e-8);
                }
            }
        }

        #[test]
        fn ndcg_shift_invariance_and_zero_sum(
            m in 2usize..8,
            shift in -5f64..5.0,
            seed: u64,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let scores: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let rels: Vec<i64> = (0..m).map(|_| rng.gen_range(0..3)).collect();
            let groups = vec![0usize; m];
            let a = lambda_ndcg(&scores, &rels, &groups).unwrap();
            let shifted: Vec<f64> = scores.iter().map(|s| s + shift).collect();
            let b = lambda_ndcg(&shifted, &rels, &groups).unwrap();
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() < 1e-9);
            }
            prop_assert!(a.iter().sum::<f64>().abs() < 1e-12);
        }
    }
}
