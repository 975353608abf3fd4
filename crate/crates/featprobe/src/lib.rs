//! Re-training-free prediction of new feature utility.
//!
//! Given a trained predictor's outputs on labeled data, this crate
//! statistically tests whether a candidate feature (or block of
//! features) could reduce the predictor's expected loss if it were
//! re-trained with the feature added. The test fits a squared-loss
//! boosted regressor of the candidate onto the standardized negative
//! loss gradient, measures the √n-scaled covariance of the fit with the
//! gradient, and calibrates it against a bootstrap null that resamples
//! the candidate and the gradient independently.
//!
//! Entry points:
//! - [`utility::relevance_test`] — the test itself.
//! - [`gradients`] — loss gradients for squared, cross-entropy, and
//!   NDCG (pairwise λ-estimates) losses.
//! - [`gbrt`] — the deterministic boosted-tree learner used both as the
//!   regressor inside the test and as a black-box predictor.
//! - [`harness`] — ablation studies comparing predicted utility against
//!   actual re-training deltas, and level calibration.
//! - [`baselines`] — χ², information gain ratio, and CFS comparators.
//!
//! See the `examples/` directory for one runnable example per
//! capability, and the `featprobe` binary for the command-line
//! interface.

pub mod baselines;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod gbrt;
pub mod gradients;
pub mod harness;
pub mod utility;

pub use dataset::{load_csv, split_folds, standardize, Dataset, FoldAssignment, Schema};
pub use error::{Error, Result};
pub use gbrt::{BoostLoss, BoostParams, BoostedModel};
pub use gradients::{
    descent_direction, grad_cross_entropy, grad_squared, lambda_ndcg, GradientVector, LossId,
};
pub use utility::{bootstrap_null, fit_g_star, k_statistic, relevance_test, TestConfig, TestResult};
