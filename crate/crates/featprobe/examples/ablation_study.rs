//! Predicted vs actual feature utility over a whole dataset.
//!
//! For every feature: re-train without it per fold to measure the
//! actual loss increase, and in parallel predict its utility with the
//! relevance test on the ablated model's gradient. The report compares
//! both as range percentages and summarizes recall.
//!
//! Run with: cargo run --release --example ablation_study

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use featprobe::dataset::{split_folds, Dataset, Roles};
use featprobe::gbrt::BoostParams;
use featprobe::gradients::LossId;
use featprobe::harness::{ablation_study, compare_report};
use featprobe::utility::TestConfig;

fn main() -> featprobe::Result<()> {
    let n = 500;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let norm = |rng: &mut ChaCha8Rng| rng.sample::<f64, _>(StandardNormal);

    let strong: Vec<f64> = (0..n).map(|_| norm(&mut rng)).collect();
    let weak: Vec<f64> = (0..n).map(|_| norm(&mut rng)).collect();
    let noise: Vec<f64> = (0..n).map(|_| norm(&mut rng)).collect();
    let y: Vec<f64> = (0..n)
        .map(|i| 2.0 * strong[i] + 0.7 * weak[i] + 0.4 * norm(&mut rng))
        .collect();

    let ds = Dataset::from_numeric_columns(
        vec![
            ("strong".into(), strong),
            ("weak".into(), weak),
            ("noise".into(), noise),
            ("y".into(), y),
        ],
        Roles {
            label: "y".into(),
            prediction: None,
            group: None,
            candidates: Vec::new(),
        },
    )?;

    let folds = split_folds(&ds, 10, 3)?;
    let raw = ablation_study(
        &ds,
        LossId::Squared,
        &BoostParams::default(),
        &TestConfig::default(),
        &folds,
        false,
    )?;
    let report = compare_report("synthetic", LossId::Squared, &raw, 20.0)?;
    print!("{}", report.to_table());
    println!(
        "recall: {} feature(s) called irrelevant despite > {}% actual utility",
        report.recall_summary.missed, report.recall_summary.threshold_pct
    );
    Ok(())
}
