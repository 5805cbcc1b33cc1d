//! Which external coupling weight does validation pick as the two tasks
//! drift apart?
//!
//! `cargo run --release --example lambda_sweep`

use dcsvm::harness::{sweep_optimal_lambda, LambdaSweepConfig};
use dcsvm::streams::Ds1Spec;

fn main() -> dcsvm::Result<()> {
    let mut cfg = LambdaSweepConfig::new(vec![0.05, 0.3, 0.6], 1);
    cfg.runs = 3;
    cfg.base = Ds1Spec {
        n: 200,
        m: 10,
        ..Default::default()
    };
    let report = sweep_optimal_lambda(&cfg)?;
    println!("{:>5}  {:>12}  {:>10}  picks", "r", "mean lambda", "mean log2");
    for row in &report.rows {
        println!(
            "{:>5}  {:>12.1}  {:>10}  {:?}",
            row.r,
            row.mean_lambda,
            row.mean_log2_lambda.map_or("-".into(), |v| format!("{v:.2}")),
            row.best_lambda
        );
    }
    Ok(())
}
