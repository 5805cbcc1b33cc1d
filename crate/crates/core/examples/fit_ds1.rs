//! Fit a coupled model on a two-task sliding-sine stream and compare it
//! with independent per-task chains on fresh test data.
//!
//! `cargo run --release --example fit_ds1`

use dcsvm::harness::{eval_windowed, mean_accuracy, Method, MethodModel};
use dcsvm::streams::{gen_ds1, Ds1Spec};
use dcsvm::{HyperParams, KernelSpec, SolverOptions};

fn main() -> dcsvm::Result<()> {
    let spec = Ds1Spec {
        n: 500,
        m: 25,
        r: 0.05,
        ..Default::default()
    };
    let train = gen_ds1(&Ds1Spec { seed: 1, ..spec })?;
    let test = gen_ds1(&Ds1Spec { seed: 2, ..spec })?;
    println!("{} training samples, {} tasks x {} windows", train.len(), train.k(), train.m());

    let hyper = HyperParams::new(10.0, KernelSpec::Linear, 4096.0, 4096.0)?;
    let opts = SolverOptions::default();
    for method in [Method::Dc, Method::SingleChain, Method::Merged] {
        let model = MethodModel::fit(method, &train, &hyper, None, &opts)?;
        let acc = eval_windowed(&model, &test)?;
        let fit = &model.diagnostics()[0];
        println!(
            "{method:>12}: test accuracy {:.4} (per task {:.4?}), KKT gap {:.1e}, {} iterations",
            mean_accuracy(&acc),
            acc,
            fit.kkt_gap,
            fit.iterations
        );
    }

    let model = dcsvm::fit(&train, &hyper)?;
    println!("\n{} support vectors, rho = {:.4}", model.support().len(), model.rho());
    let x = [0.5, 0.6];
    for time in [1, 13, 25] {
        let p = model.predict(2, time, &x)?;
        println!("task 2, time {time:>2}: f({x:?}) = {:+.4} -> {:?}", p.score, p.label);
    }
    Ok(())
}
