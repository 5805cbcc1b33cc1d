//! The simplex-constrained QP solver on a small dense problem.
//!
//! `cargo run --release --example simplex_qp`

use dcsvm::{solve_simplex_qp, SolverOptions};
use ndarray::arr2;

fn main() -> dcsvm::Result<()> {
    // minimize ½ αᵀQα  subject to  α ≥ 0, Σα = 1
    let q = arr2(&[
        [4.0, 1.0, 0.5, 0.0],
        [1.0, 3.0, 0.2, 0.1],
        [0.5, 0.2, 2.0, 0.3],
        [0.0, 0.1, 0.3, 5.0],
    ]);
    let opts = SolverOptions {
        record_trace: true,
        ..SolverOptions::absolute(1e-12)
    };
    let sol = solve_simplex_qp(&q, &opts)?;
    println!("alpha      = {:.6?}", sol.alpha);
    println!("sum alpha  = {:.15}", sol.alpha.iter().sum::<f64>());
    println!("objective  = {:.12}", sol.objective);
    println!("KKT gap    = {:.2e} after {} iterations", sol.kkt_gap, sol.iterations);
    // At the optimum every gradient entry on the support is equal.
    let grad = q.dot(&ndarray::arr1(&sol.alpha));
    println!("Q alpha    = {:.6}", grad);
    println!("objective trace (first 5): {:.6?}", &sol.trace[..sol.trace.len().min(5)]);
    Ok(())
}
