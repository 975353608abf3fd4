//! Re-training-free feature-scoring baselines: Pearson χ², information
//! gain ratio, and CFS merit.
//!
//! Continuous columns are discretized by equal-frequency binning before
//! the contingency-table scores; columns with few distinct values keep
//! those values as categories.

use serde::{Deserialize, Serialize};

use crate::dataset::{mean, Column, ColumnData};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinningSpec {
    pub n_bins: usize,
}

impl Default for BinningSpec {
    fn default() -> Self {
        BinningSpec { n_bins: 10 }
    }
}

impl BinningSpec {
    fn validate(&self) -> Result<()> {
        if self.n_bins < 2 {
            return Err(Error::argument(format!(
                "n_bins {} must be >= 2",
                self.n_bins
            )));
        }
        Ok(())
    }
}

/// Equal-frequency discretization into at most `n_bins` categories.
/// Inputs with `<= n_bins` distinct values map each value to its own
/// category.
pub fn discretize(values: &[f64], bins: &BinningSpec) -> Result<Vec<usize>> {
    bins.validate()?;
    let mut distinct: Vec<f64> = values.to_vec();
    distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
    distinct.dedup();
    if distinct.len() <= bins.n_bins {
        return Ok(values
            .iter()
            .map(|v| distinct.partition_point(|d| d < v))
            .collect());
    }
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    // upper edges at the quantiles, deduplicated so heavy ties collapse
    let mut edges: Vec<f64> = (1..bins.n_bins)
        .map(|b| sorted[(b * n / bins.n_bins - 1).min(n - 1)])
        .collect();
    edges.dedup_by(|a, b| a == b);
    Ok(values
        .iter()
        .map(|v| edges.partition_point(|e| e < v))
        .collect())
}

/// Category codes for any column: categorical columns use their codes,
/// numeric columns are discretized.
pub fn categories(col: &Column, bins: &BinningSpec) -> Result<Vec<usize>> {
    match &col.data {
        ColumnData::Numeric(v) => discretize(v, bins),
        ColumnData::Categorical { codes, .. } => Ok(codes.iter().map(|&c| c as usize).collect()),
    }
}

fn contingency(x: &[usize], y: &[usize]) -> (Vec<Vec<f64>>, usize, usize) {
    let nx = x.iter().copied().max().map(|m| m + 1).unwrap_or(0);
    let ny = y.iter().copied().max().map(|m| m + 1).unwrap_or(0);
    let mut table = vec![vec![0.0; ny]; nx];
    for (&a, &b) in x.iter().zip(y) {
        table[a][b] += 1.0;
    }
    (table, nx, ny)
}

/// Pearson χ² over the (binned feature × label) contingency table.
/// Cells with zero expected count are skipped; a single label class
/// scores 0.
pub fn chi_squared_score(feature: &[usize], label: &[usize]) -> f64 {
    let n = feature.len() as f64;
    let (table, nx, ny) = contingency(feature, label);
    let row_sums: Vec<f64> = table.iter().map(|r| r.iter().sum()).collect();
    let col_sums: Vec<f64> = (0..ny).map(|c| table.iter().map(|r| r[c]).sum()).collect();
    if col_sums.iter().filter(|&&s| s > 0.0).count() < 2 {
        return 0.0;
    }
    let mut chi2 = 0.0;
    for r in 0..nx {
        for c in 0..ny {
            let expected = row_sums[r] * col_sums[c] / n;
            if expected > 0.0 {
                let d = table[r][c] - expected;
                chi2 += d * d / expected;
            }
        }
    }
    chi2
}

fn entropy_bits(counts: &[f64], total: f64) -> f64 {
    counts
        .iter()
        .filter(|&&c| c > 0.0)
        .map(|&c| {
            let p = c / total;
            -p * p.log2()
        })
        .sum()
}

/// Information gain ratio IG(Y; X) / H(X), entropies in bits.
/// H(X) = 0 scores 0.
pub fn gain_ratio_score(feature: &[usize], label: &[usize]) -> f64 {
    let n = feature.len() as f64;
    let (table, nx, ny) = contingency(feature, label);
    let row_sums: Vec<f64> = table.iter().map(|r| r.iter().sum()).collect();
    let col_sums: Vec<f64> = (0..ny).map(|c| table.iter().map(|r| r[c]).sum()).collect();
    let h_x = entropy_bits(&row_sums, n);
    if h_x == 0.0 {
        return 0.0;
    }
    let h_y = entropy_bits(&col_sums, n);
    let mut h_y_given_x = 0.0;
    for r in 0..nx {
        if row_sums[r] > 0.0 {
            h_y_given_x += row_sums[r] / n * entropy_bits(&table[r], row_sums[r]);
        }
    }
    (h_y - h_y_given_x) / h_x
}

/// Absolute Pearson correlation; zero-variance columns correlate at 0.
pub fn abs_pearson(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (x, y) in a.iter().zip(b) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    if va == 0.0 || vb == 0.0 {
        return 0.0;
    }
    (cov / (va.sqrt() * vb.sqrt())).abs()
}

/// CFS merit of a feature set: `k·r̄_cf / √(k + k(k−1)·r̄_ff)` with
/// mean absolute feature–label and feature–feature correlations.
pub fn cfs_merit_of_set(features: &[&[f64]], label: &[f64]) -> f64 {
    let k = features.len();
    if k == 0 {
        return 0.0;
    }
    let r_cf = features.iter().map(|f| abs_pearson(f, label)).sum::<f64>() / k as f64;
    let mut r_ff = 0.0;
    if k > 1 {
        let mut pairs = 0.0;
        for i in 0..k {
            for j in (i + 1)..k {
                r_ff += abs_pearson(features[i], features[j]);
                pairs += 1.0;
            }
        }
        r_ff /= pairs;
    }
    let denom = (k as f64 + k as f64 * (k as f64 - 1.0) * r_ff).sqrt();
    if denom == 0.0 {
        0.0
    } else {
        k as f64 * r_cf / denom
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CfsMerit {
    /// Merit of `selected ∪ {candidate}`.
    pub merit: f64,
    /// Merit change from adding the candidate to `selected`.
    pub delta: f64,
}

/// Merit of the selected set including the candidate, plus the delta
/// against the set without it.
pub fn cfs_merit(candidate: &[f64], selected: &[&[f64]], label: &[f64]) -> CfsMerit {
    let without = cfs_merit_of_set(selected, label);
    let mut with: Vec<&[f64]> = selected.to_vec();
    with.push(candidate);
    let merit = cfs_merit_of_set(&with, label);
    CfsMerit {
        merit,
        delta: merit - without,
    }
}

/// One scored feature for the baselines report.
#[derive(Debug, Clone, Serialize)]
pub struct BaselineScore {
    pub feature: String,
    pub method: String,
    pub score: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn chi_squared_perfect_binary_association() {
        let x: Vec<usize> = (0..100).map(|i| i % 2).collect();
        assert_eq!(chi_squared_score(&x, &x), 100.0);
    }

    #[test]
    fn chi_squared_constant_feature_is_zero() {
        let x = vec![0usize; 50];
        let y: Vec<usize> = (0..50).map(|i| i % 2).collect();
        assert_eq!(chi_squared_score(&x, &y), 0.0);
    }

    #[test]
    fn chi_squared_single_label_class_is_zero() {
        let x: Vec<usize> = (0..50).map(|i| i % 3).collect();
        assert_eq!(chi_squared_score(&x, &vec![0usize; 50]), 0.0);
    }

    #[test]
    fn chi_squared_independent_matches_dof() {
        // mean χ² over repeated independent draws ≈ degrees of freedom
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let (nx, ny, n, reps) = (4usize, 3usize, 2000usize, 60usize);
        let dof = ((nx - 1) * (ny - 1)) as f64;
        let mut total = 0.0;
        for _ in 0..reps {
            let x: Vec<usize> = (0..n).map(|_| rng.gen_range(0..nx)).collect();
            let y: Vec<usize> = (0..n).map(|_| rng.gen_range(0..ny)).collect();
            total += chi_squared_score(&x, &y);
        }
        let avg = total / reps as f64;
        assert!((avg - dof).abs() < 1.0, "avg χ² {avg} vs dof {dof}");
    }

    #[test]
    fn gain_ratio_identical_balanced_binary_is_one() {
        let x: Vec<usize> = (0..100).map(|i| i % 2).collect();
        assert!((gain_ratio_score(&x, &x) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gain_ratio_constant_feature_is_zero() {
        let y: Vec<usize> = (0..40).map(|i| i % 2).collect();
        assert_eq!(gain_ratio_score(&vec![0usize; 40], &y), 0.0);
    }

    #[test]
    fn gain_ratio_independent_vanishes() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let n = 10000;
        let x: Vec<usize> = (0..n).map(|_| rng.gen_range(0..5)).collect();
        let y: Vec<usize> = (0..n).map(|_| rng.gen_range(0..2)).collect();
        let s = gain_ratio_score(&x, &y);
        assert!(s <= 0.05, "gain ratio {s}");
    }

    #[test]
    fn cfs_merit_formula_values() {
        // k=1 reduces to r_cf
        let label: Vec<f64> = (0..200).map(|i| i as f64).collect();
        let feat: Vec<f64> = label.iter().map(|v| 0.7 * v).collect();
        let m = cfs_merit(&feat, &[], &label);
        assert!((m.merit - 1.0).abs() < 1e-12); // exact linear: |r| = 1
        // direct formula checks
        let merit = |k: f64, rcf: f64, rff: f64| k * rcf / (k + k * (k - 1.0) * rff).sqrt();
        assert!((merit(1.0, 0.7, 0.0) - 0.7).abs() < 1e-12);
        assert!((merit(2.0, 0.5, 1.0) - 0.5).abs() < 1e-12);
        assert!((merit(2.0, 0.5, 0.0) - 1.0 / 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn cfs_zero_variance_column_correlates_zero() {
        let label: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let flat = vec![2.0; 10];
        assert_eq!(abs_pearson(&flat, &label), 0.0);
        let m = cfs_merit(&flat, &[], &label);
        assert_eq!(m.merit, 0.0);
    }

    #[test]
    fn cfs_invariant_to_sign_flip() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let n = 100;
        let label: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0f64..1.0)).collect();
        let a: Vec<f64> = label.iter().map(|v| v + rng.gen_range(-0.5..0.5)).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0f64..1.0)).collect();
        let neg_a: Vec<f64> = a.iter().map(|v| -v).collect();
        let m1 = cfs_merit(&a, &[&b], &label);
        let m2 = cfs_merit(&neg_a, &[&b], &label);
        assert!((m1.merit - m2.merit).abs() < 1e-12);
    }

    #[test]
    fn scores_invariant_to_bin_relabeling() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let n = 400;
        let x: Vec<usize> = (0..n).map(|_| rng.gen_range(0..4)).collect();
        let y: Vec<usize> = x.iter().map(|&v| usize::from(v >= 2)).collect();
        // strictly monotone relabeling of bin identities
        let relabeled: Vec<usize> = x.iter().map(|&v| v * 3 + 1).collect();
        // compact to dense codes
        let mut seen: Vec<usize> = relabeled.clone();
        seen.sort_unstable();
        seen.dedup();
        let dense: Vec<usize> = relabeled
            .iter()
            .map(|v| seen.binary_search(v).unwrap())
            .collect();
        assert_eq!(chi_squared_score(&x, &y), chi_squared_score(&dense, &y));
        assert_eq!(gain_ratio_score(&x, &y), gain_ratio_score(&dense, &y));
    }

    #[test]
    fn discretize_equal_frequency() {
        let v: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let bins = discretize(&v, &BinningSpec::default()).unwrap();
        let mut counts = vec![0usize; 10];
        for &b in &bins {
            counts[b] += 1;
        }
        assert!(counts.iter().all(|&c| c == 10), "{counts:?}");
        // few distinct values keep their own categories
        let v2 = vec![1.0, 5.0, 1.0, 5.0];
        assert_eq!(discretize(&v2, &BinningSpec::default()).unwrap(), vec![0, 1, 0, 1]);
        assert!(discretize(&v, &BinningSpec { n_bins: 1 }).is_err());
    }
}
