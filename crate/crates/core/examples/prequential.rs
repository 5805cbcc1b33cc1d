//! Sliding train / validate / predict-next-batch evaluation on a batched
//! rotating-hyperplane stream.
//!
//! `cargo run --release --example prequential`

use dcsvm::harness::{run_prequential, Grid, KernelFamily, Method, PrequentialConfig};
use dcsvm::streams::{gen_rotating_hyperplane, HyperplaneSpec};

fn main() -> dcsvm::Result<()> {
    let batches = 12;
    let stream = gen_rotating_hyperplane(&HyperplaneSpec {
        n: batches * 20,
        m: batches,
        offset_deg: 5.0,
        seed: 3,
        ..Default::default()
    })?;
    let cfg = PrequentialConfig {
        grid: Grid {
            c_values: vec![1.0, 10.0],
            sigma_values: vec![1.0],
            gamma_values: vec![1.0, 16.0, 256.0],
            lambda_values: vec![1.0, 16.0, 256.0],
        },
        methods: vec![Method::Dc, Method::SingleChain],
        ..PrequentialConfig::new(3, KernelFamily::Linear)
    };
    let report = run_prequential(&stream, &cfg)?;
    for run in &report.runs {
        println!("{} (mean accuracy {:.4})", run.method, run.mean_accuracy);
        for step in &run.steps {
            println!(
                "  batch {:>2}: accuracy {:.3}  C = {:<4} gamma = {:<5} lambda = {}",
                step.target_batch, step.mean_accuracy, step.hyper.c, step.hyper.gamma, step.hyper.lambda
            );
        }
    }
    Ok(())
}
