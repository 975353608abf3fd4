//! Lambda gradients for ranking: per-document NDCG pressure.
//!
//! Each document's lambda aggregates pairwise swap deltas; negative
//! values push a document up the ranking, positive values push it down.
//!
//! Run with: cargo run --release --example ndcg_gradients

use featprobe::gradients::{descent_direction, lambda_ndcg, ndcg_of_query, LossId};

fn main() -> featprobe::Result<()> {
    // one query, four documents; the scorer has the top pair inverted
    let scores = vec![2.1, 2.6, 0.4, -0.3];
    let relevance = vec![3i64, 1, 2, 0];
    let groups = vec![0usize; 4];

    let lambda = lambda_ndcg(&scores, &relevance, &groups)?;
    println!("current NDCG: {:.4}", ndcg_of_query(&scores, &relevance));
    println!("{:>4} {:>7} {:>5} {:>9}", "doc", "score", "rel", "lambda");
    for i in 0..scores.len() {
        println!(
            "{:>4} {:>7.2} {:>5} {:>9.4}",
            i, scores[i], relevance[i], lambda[i]
        );
    }

    // the descent direction feeds the relevance test: standardized,
    // negated gradient with unit standard deviation
    let grad = descent_direction(lambda, LossId::Ndcg);
    println!(
        "\ndescent direction (sigma = {:.4}): {:?}",
        grad.sigma,
        grad.standardized
            .iter()
            .map(|v| (v * 100.0).round() / 100.0)
            .collect::<Vec<_>>()
    );
    Ok(())
}
