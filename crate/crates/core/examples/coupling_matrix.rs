//! Window indexing, the two coupling graphs, and the coupling matrix.
//!
//! `cargo run --release --example coupling_matrix`

use dcsvm::coupling::{
    build_coupling_matrix, build_external_adjacency, build_internal_adjacency, invert_spd, window_of,
};

fn main() -> dcsvm::Result<()> {
    let (k, m) = (2, 3);
    println!("windows for k = {k} tasks, m = {m} times:");
    for time in 1..=m {
        let row: Vec<String> = (1..=k)
            .map(|task| format!("(task {task}, time {time}) -> {}", window_of(task, time, k).unwrap()))
            .collect();
        println!("  {}", row.join("   "));
    }

    let internal = build_internal_adjacency(k, m);
    let external = build_external_adjacency(k, m);
    println!("\ninternal coupling (same task, consecutive times):\n{internal}");
    println!("\nexternal coupling (same time, different tasks):\n{external}");

    let (gamma, lambda) = (4.0, 16.0);
    let mat = build_coupling_matrix(gamma, lambda, &internal, &external, m)?;
    let inv = invert_spd(&mat)?;
    println!("\nM for gamma = {gamma}, lambda = {lambda}:\n{mat:.3}");
    println!("\nM^-1:\n{inv:.3}");
    let residual = (&mat.dot(&inv) - &ndarray::Array2::<f64>::eye(k * m))
        .iter()
        .fold(0.0f64, |a, v| a.max(v.abs()));
    println!("\nmax |M M^-1 - I| = {residual:.2e}");
    Ok(())
}
