//! Gradient-boosted regression trees with squared and logistic losses.
//!
//! Trees use exhaustive variance-reduction split search over axis-aligned
//! thresholds (midpoints between consecutive distinct sorted values).
//! Fitting is deterministic: no row or column subsampling, ties in split
//! gain broken by (lowest column index, lowest threshold).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoostLoss {
    Squared,
    Logistic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoostParams {
    pub n_rounds: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub min_leaf: usize,
    pub loss: BoostLoss,
    pub seed: u64,
}

impl Default for BoostParams {
    fn default() -> Self {
        BoostParams {
            n_rounds: 50,
            max_depth: 2,
            learning_rate: 0.1,
            min_leaf: 5,
            loss: BoostLoss::Squared,
            seed: 0,
        }
    }
}

impl BoostParams {
    fn validate(&self) -> Result<()> {
        if self.n_rounds < 1 || self.max_depth < 1 || self.min_leaf < 1 {
            return Err(Error::argument(
                "n_rounds, max_depth, and min_leaf must all be >= 1",
            ));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::argument(format!(
                "learning_rate {} outside (0, 1]",
                self.learning_rate
            )));
        }
        Ok(())
    }
}

/// One node of a regression tree, stored in an arena.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    Leaf { value: f64 },
    Split {
        col: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    /// Unscaled leaf value for one row of a column-major feature set.
    pub fn eval(&self, cols: &[&[f64]], row: usize) -> f64 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { value } => return *value,
                Node::Split {
                    col,
                    threshold,
                    left,
                    right,
                } => {
                    i = if cols[*col][row] <= *threshold { *left } else { *right };
                }
            }
        }
    }
}

/// A fitted boosted ensemble. Immutable and shareable after `fit`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostedModel {
    pub version: u32,
    pub base_score: f64,
    pub trees: Vec<Tree>,
    pub params: BoostParams,
    pub n_features: usize,
}

impl BoostedModel {
    /// Raw additive score: `base_score + Σ learning_rate · tree(x)`.
    pub fn predict_raw(&self, cols: &[&[f64]]) -> Result<Vec<f64>> {
        if cols.len() != self.n_features {
            return Err(Error::argument(format!(
                "feature count mismatch: model expects {}, got {}",
                self.n_features,
                cols.len()
            )));
        }
        let n = cols.first().map(|c| c.len()).unwrap_or(0);
        let mut out = vec![self.base_score; n];
        for tree in &self.trees {
            for (row, o) in out.iter_mut().enumerate() {
                *o += self.params.learning_rate * tree.eval(cols, row);
            }
        }
        Ok(out)
    }

    /// Task-scale predictions: identity for squared loss, logistic link
    /// for logistic loss (values in (0, 1)).
    pub fn predict(&self, cols: &[&[f64]]) -> Result<Vec<f64>> {
        let mut out = self.predict_raw(cols)?;
        if self.params.loss == BoostLoss::Logistic {
            for o in out.iter_mut() {
                *o = sigmoid(*o);
            }
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<BoostedModel> {
        Ok(serde_json::from_str(s)?)
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Fit a boosted ensemble on column-major numeric features.
pub fn fit(cols: &[&[f64]], target: &[f64], params: &BoostParams) -> Result<BoostedModel> {
    params.validate()?;
    let n = target.len();
    if n < 2 * params.min_leaf {
        return Err(Error::argument(format!(
            "need at least {} rows (2·min_leaf), got {n}",
            2 * params.min_leaf
        )));
    }
    if target.iter().any(|t| !t.is_finite()) {
        return Err(Error::argument("target contains non-finite values"));
    }
    for c in cols {
        if c.len() != n {
            return Err(Error::argument(format!(
                "feature column has {} rows, target has {n}",
                c.len()
            )));
        }
    }

    // Columns argsorted once; node searches walk the presorted order.
    let sorted_idx: Vec<Vec<u32>> = cols
        .iter()
        .map(|c| {
            let mut idx: Vec<u32> = (0..n as u32).collect();
            idx.sort_by(|&a, &b| {
                c[a as usize]
                    .partial_cmp(&c[b as usize])
                    .unwrap()
                    .then(a.cmp(&b))
            });
            idx
        })
        .collect();

    match params.loss {
        BoostLoss::Squared => {
            let base = crate::dataset::mean(target);
            let mut pred = vec![base; n];
            let mut trees = Vec::with_capacity(params.n_rounds);
            let mut residual = vec![0.0; n];
            for _ in 0..params.n_rounds {
                for i in 0..n {
                    residual[i] = target[i] - pred[i];
                }
                let tree = grow_tree(cols, &sorted_idx, &residual, None, params);
                for (row, p) in pred.iter_mut().enumerate() {
                    *p += params.learning_rate * tree.eval(cols, row);
                }
                trees.push(tree);
            }
            Ok(BoostedModel {
                version: 1,
                base_score: base,
                trees,
                params: *params,
                n_features: cols.len(),
            })
        }
        BoostLoss::Logistic => {
            let p_bar = crate::dataset::mean(target).clamp(1e-12, 1.0 - 1e-12);
            let base = (p_bar / (1.0 - p_bar)).ln();
            let mut score = vec![base; n];
            let mut trees = Vec::with_capacity(params.n_rounds);
            let mut grad = vec![0.0; n];
            let mut hess = vec![0.0; n];
            for _ in 0..params.n_rounds {
                for i in 0..n {
                    let p = sigmoid(score[i]);
                    grad[i] = target[i] - p; // negative log-loss gradient
                    hess[i] = p * (1.0 - p);
                }
                let tree = grow_tree(cols, &sorted_idx, &grad, Some(&hess), params);
                for (row, s) in score.iter_mut().enumerate() {
                    *s += params.learning_rate * tree.eval(cols, row);
                }
                trees.push(tree);
            }
            Ok(BoostedModel {
                version: 1,
                base_score: base,
                trees,
                params: *params,
                n_features: cols.len(),
            })
        }
    }
}

/// Grow one tree on `targets` (residuals or gradients). Splits minimize
/// the sum of squared residuals; with hessians given, leaf values take
/// one Newton step `Σ grad / Σ hess` instead of the mean.
fn grow_tree(
    cols: &[&[f64]],
    sorted_idx: &[Vec<u32>],
    targets: &[f64],
    hessians: Option<&[f64]>,
    params: &BoostParams,
) -> Tree {
    let n = targets.len();
    let mut in_node = vec![true; n];
    let mut nodes = Vec::new();
    grow_rec(
        cols,
        sorted_idx,
        targets,
        hessians,
        params,
        &mut in_node,
        n,
        0,
        &mut nodes,
    );
    Tree { nodes }
}

fn leaf_value(rows: &[usize], targets: &[f64], hessians: Option<&[f64]>) -> f64 {
    match hessians {
        None => rows.iter().map(|&r| targets[r]).sum::<f64>() / rows.len() as f64,
        Some(h) => {
            let g: f64 = rows.iter().map(|&r| targets[r]).sum();
            let hsum: f64 = rows.iter().map(|&r| h[r]).sum();
            if hsum > 0.0 {
                g / hsum
            } else {
                0.0
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn grow_rec(
    cols: &[&[f64]],
    sorted_idx: &[Vec<u32>],
    targets: &[f64],
    hessians: Option<&[f64]>,
    params: &BoostParams,
    in_node: &mut [bool],
    node_size: usize,
    depth: usize,
    nodes: &mut Vec<Node>,
) -> usize {
    let rows: Vec<usize> = (0..in_node.len()).filter(|&r| in_node[r]).collect();
    let make_leaf = |nodes: &mut Vec<Node>| {
        nodes.push(Node::Leaf {
            value: leaf_value(&rows, targets, hessians),
        });
        nodes.len() - 1
    };
    if depth >= params.max_depth || node_size < 2 * params.min_leaf {
        return make_leaf(nodes);
    }
    let Some(split) = best_split(cols, sorted_idx, targets, in_node, node_size, params) else {
        return make_leaf(nodes);
    };

    let id = nodes.len();
    nodes.push(Node::Leaf { value: 0.0 }); // placeholder

    let col = cols[split.col];
    let left_rows: Vec<usize> = rows
        .iter()
        .copied()
        .filter(|&r| col[r] <= split.threshold)
        .collect();
    for &r in &rows {
        in_node[r] = col[r] <= split.threshold;
    }
    let left = grow_rec(
        cols,
        sorted_idx,
        targets,
        hessians,
        params,
        in_node,
        left_rows.len(),
        depth + 1,
        nodes,
    );
    for &r in &rows {
        in_node[r] = col[r] > split.threshold;
    }
    let right = grow_rec(
        cols,
        sorted_idx,
        targets,
        hessians,
        params,
        in_node,
        rows.len() - left_rows.len(),
        depth + 1,
        nodes,
    );
    for &r in &rows {
        in_node[r] = true;
    }
    nodes[id] = Node::Split {
        col: split.col,
        threshold: split.threshold,
        left,
        right,
    };
    id
}

struct SplitChoice {
    col: usize,
    threshold: f64,
    gain: f64,
}

/// Exhaustive scan over (column, threshold) candidates; maximizes the
/// reduction in sum of squared residuals. Returns `None` when no split
/// respects min_leaf or improves on the parent.
fn best_split(
    cols: &[&[f64]],
    sorted_idx: &[Vec<u32>],
    targets: &[f64],
    in_node: &[bool],
    node_size: usize,
    params: &BoostParams,
) -> Option<SplitChoice> {
    let total_sum: f64 = (0..targets.len())
        .filter(|&r| in_node[r])
        .map(|r| targets[r])
        .sum();
    let n = node_size as f64;
    let parent_score = total_sum * total_sum / n;

    let mut best: Option<SplitChoice> = None;
    for (c, order) in sorted_idx.iter().enumerate() {
        let col = cols[c];
        let mut left_sum = 0.0;
        let mut left_cnt = 0usize;
        let mut prev_val: Option<f64> = None;
        for &ri in order.iter() {
            let r = ri as usize;
            if !in_node[r] {
                continue;
            }
            let v = col[r];
            if let Some(pv) = prev_val {
                if v > pv
                    && left_cnt >= params.min_leaf
                    && node_size - left_cnt >= params.min_leaf
                {
                    let threshold = pv + (v - pv) / 2.0;
                    let right_sum = total_sum - left_sum;
                    let right_cnt = node_size - left_cnt;
                    let gain = left_sum * left_sum / left_cnt as f64
                        + right_sum * right_sum / right_cnt as f64
                        - parent_score;
                    // strict > keeps the (lowest col, lowest threshold) tie-break
                    if gain > 1e-12 && best.as_ref().map_or(true, |b| gain > b.gain) {
                        best = Some(SplitChoice {
                            col: c,
                            threshold,
                            gain,
                        });
                    }
                }
            }
            left_sum += targets[r];
            left_cnt += 1;
            prev_val = Some(v);
        }
    }
    best
}
