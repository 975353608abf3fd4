//! Why re-training-free heuristics mislead: redundancy.
//!
//! u_copy is a near-duplicate of a feature the predictor already uses,
//! while v carries genuinely new signal. Chi-squared and gain ratio
//! score each column against the label in isolation, so the duplicate
//! wins; CFS partially corrects by penalizing inter-feature
//! correlation.
//!
//! Run with: cargo run --release --example baselines

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use featprobe::baselines::{
    cfs_merit, chi_squared_score, discretize, gain_ratio_score, BinningSpec,
};

fn main() -> featprobe::Result<()> {
    let n = 2000;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let norm = |rng: &mut ChaCha8Rng| rng.sample::<f64, _>(StandardNormal);

    let u: Vec<f64> = (0..n).map(|_| norm(&mut rng)).collect();
    let u_copy: Vec<f64> = u.iter().map(|&x| x + 0.01 * norm(&mut rng)).collect();
    let v: Vec<f64> = (0..n).map(|_| norm(&mut rng)).collect();
    let y: Vec<f64> = (0..n)
        .map(|i| u[i] + 0.35 * v[i] + 0.3 * norm(&mut rng))
        .collect();

    let bins = BinningSpec::default();
    let y_cats = discretize(&y, &bins)?;

    println!(
        "{:>8} {:>12} {:>12} {:>10} {:>10}",
        "feature", "chi_squared", "gain_ratio", "cfs_merit", "cfs_delta"
    );
    let cols: [(&str, &[f64]); 3] = [("u", &u), ("u_copy", &u_copy), ("v", &v)];
    for (name, col) in cols {
        let cats = discretize(col, &bins)?;
        let others: Vec<&[f64]> = cols
            .iter()
            .filter(|(n, _)| *n != name)
            .map(|(_, c)| *c)
            .collect();
        let merit = cfs_merit(col, &others, &y);
        println!(
            "{:>8} {:>12.1} {:>12.4} {:>10.4} {:>10.4}",
            name,
            chi_squared_score(&cats, &y_cats),
            gain_ratio_score(&cats, &y_cats),
            merit.merit,
            merit.delta,
        );
    }
    Ok(())
}
