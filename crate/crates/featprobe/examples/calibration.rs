//! Empirical level check: how often does the test reject a truly
//! useless candidate?
//!
//! Each repetition simulates a fitted predictor and an independent
//! candidate; the reported rejection rate should sit near alpha.
//!
//! Run with: cargo run --release --example calibration

use featprobe::harness::null_calibration;
use featprobe::utility::TestConfig;

fn main() -> featprobe::Result<()> {
    let config = TestConfig {
        seed: 5,
        ..TestConfig::default()
    };
    let summary = null_calibration(200, 100, &config)?;
    println!(
        "n = {}, reps = {}: rejected {} times -> rate {:.3} at alpha {} (95% CI [{:.3}, {:.3}])",
        summary.n,
        summary.reps,
        summary.rejections,
        summary.rejection_rate,
        summary.alpha,
        summary.ci_low,
        summary.ci_high
    );
    Ok(())
}
