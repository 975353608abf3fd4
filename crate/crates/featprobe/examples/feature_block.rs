//! Interaction features must be tested as a block.
//!
//! With y = x1 XOR x2, neither feature carries marginal signal, so a
//! single-feature test finds nothing. Passing both columns as one
//! candidate block lets the regressor express the interaction and the
//! test fires.
//!
//! Run with: cargo run --release --example feature_block

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use featprobe::dataset::mean;
use featprobe::gradients::{descent_direction, grad_squared, LossId};
use featprobe::utility::{relevance_test, TestConfig};

fn main() -> featprobe::Result<()> {
    let n = 1000;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let x1: Vec<f64> = (0..n).map(|_| f64::from(rng.gen_range(0..2))).collect();
    let x2: Vec<f64> = (0..n).map(|_| f64::from(rng.gen_range(0..2))).collect();
    let y: Vec<f64> = x1
        .iter()
        .zip(&x2)
        .map(|(&a, &b)| f64::from((a != b) as u8))
        .collect();

    // the current predictor knows nothing: it predicts the label mean
    let pred = vec![mean(&y); n];
    let grad = descent_direction(grad_squared(&pred, &y)?, LossId::Squared);
    let config = TestConfig::default();

    let single = relevance_test(&[&x2], &["x2".into()], &grad, &config)?;
    let block = relevance_test(
        &[&x1, &x2],
        &["x1".into(), "x2".into()],
        &grad,
        &config,
    )?;

    println!(
        "x2 alone      : p = {:.3}, utility = {:6.2}",
        single.p_value, single.utility_score
    );
    println!(
        "(x1, x2) block: p = {:.3}, utility = {:6.2}",
        block.p_value, block.utility_score
    );
    Ok(())
}
