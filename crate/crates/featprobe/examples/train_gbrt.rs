//! The built-in boosted-tree regressor: fit, predict, serialize.
//!
//! Run with: cargo run --release --example train_gbrt

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use featprobe::gbrt::{fit, BoostParams, BoostedModel};

fn main() -> featprobe::Result<()> {
    let n = 400;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
    let y: Vec<f64> = x.iter().map(|&v| v.sin() + 0.1 * rng.gen_range(-1.0..1.0)).collect();

    let params = BoostParams {
        n_rounds: 200,
        ..BoostParams::default()
    };
    let model = fit(&[&x], &y, &params)?;

    let grid: Vec<f64> = (0..7).map(|i| -3.0 + i as f64).collect();
    let pred = model.predict(&[&grid])?;
    println!("{:>6} {:>9} {:>9}", "x", "sin(x)", "model");
    for (g, p) in grid.iter().zip(&pred) {
        println!("{g:>6.1} {:>9.4} {p:>9.4}", g.sin());
    }

    let json = model.to_json()?;
    let restored = BoostedModel::from_json(&json)?;
    assert_eq!(model, restored);
    println!(
        "\nserialized to {} bytes of JSON; round trip is exact",
        json.len()
    );
    Ok(())
}
