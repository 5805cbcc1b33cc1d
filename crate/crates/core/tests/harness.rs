use dcsvm::harness::{
    eval_windowed, grid_search, mean_std, run_synthetic_protocol, Grid, KernelFamily, Method, MethodModel, SyntheticProtocol,
};
use dcsvm::streams::{gen_ds1, Ds1Spec, SyntheticSpec};
use dcsvm::{HyperParams, KernelSpec, SolverOptions};

fn small_protocol(seed: u64) -> SyntheticProtocol {
    let mut spec = SyntheticSpec::ds1(0.1);
    spec.set_samples_per_task(60);
    spec.set_windows(5);
    SyntheticProtocol {
        runs: 3,
        grid: Grid {
            c_values: vec![1.0, 10.0],
            sigma_values: vec![1.0],
            gamma_values: vec![1.0, 16.0],
            lambda_values: vec![1.0, 256.0],
        },
        methods: vec![Method::Dc, Method::SingleChain, Method::Merged],
        ..SyntheticProtocol::new(spec, KernelFamily::Gaussian, seed)
    }
}

#[test]
fn protocol_is_deterministic() {
    let a = run_synthetic_protocol(&small_protocol(4)).unwrap();
    let b = run_synthetic_protocol(&small_protocol(4)).unwrap();
    assert_eq!(a.per_run, b.per_run);
    assert_eq!(a.config_hash, b.config_hash);
    let c = run_synthetic_protocol(&small_protocol(5)).unwrap();
    assert_ne!(a.per_run[0].seed_train, c.per_run[0].seed_train);
}

#[test]
fn summaries_recompute_from_per_run_rows() {
    let rep = run_synthetic_protocol(&small_protocol(6)).unwrap();
    assert_eq!(rep.per_run.len(), 3 * 3);
    for s in &rep.summary {
        let rows = rep.rows_for(s.method);
        assert_eq!(rows.len(), 3);
        let means: Vec<f64> = rows.iter().map(|r| (r.test_accuracy[0] + r.test_accuracy[1]) / 2.0).collect();
        let n = means.len() as f64;
        let mean = means.iter().sum::<f64>() / n;
        let std = (means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        assert!((s.mean - mean).abs() < 1e-12);
        assert!((s.std - std).abs() < 1e-12);
        for t in 0..2 {
            let col: Vec<f64> = rows.iter().map(|r| r.test_accuracy[t]).collect();
            let (m, sd) = mean_std(&col);
            assert!((s.mean_per_task[t] - m).abs() < 1e-12 && (s.std_per_task[t] - sd).abs() < 1e-12);
        }
    }
    let gap = rep.gap(Method::Dc, Method::SingleChain).unwrap();
    assert!((gap - (rep.summary_for(Method::Dc).unwrap().mean - rep.summary_for(Method::SingleChain).unwrap().mean)).abs() < 1e-15);
    for r in rep.rows_for(Method::SingleChain) {
        assert_eq!(r.hyper.lambda, 0.0);
    }
}

#[test]
fn csv_export_has_one_row_per_record() {
    let rep = run_synthetic_protocol(&small_protocol(7)).unwrap();
    let mut out = Vec::new();
    rep.write_csv(&mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert_eq!(text.lines().count(), 1 + rep.per_run.len());
    assert!(text.lines().next().unwrap().ends_with("test_task1,test_task2,test_mean"));
}

#[test]
fn single_chain_ignores_lambda_and_tasks_are_independent() {
    let train = gen_ds1(&Ds1Spec { n: 60, m: 4, seed: 3, ..Default::default() }).unwrap();
    let opts = SolverOptions::default();
    let fit = |lambda: f64| {
        let h = HyperParams::new(10.0, KernelSpec::Linear, 16.0, lambda).unwrap();
        MethodModel::fit(Method::SingleChain, &train, &h, None, &opts).unwrap()
    };
    let (a, b) = (fit(1.0), fit(4096.0));
    for (ma, mb) in a.models().iter().zip(b.models()) {
        assert_eq!(ma.alpha(), mb.alpha());
    }
    // Each chain equals a coupled fit on that task alone.
    let h = HyperParams::new(10.0, KernelSpec::Linear, 16.0, 0.0).unwrap();
    for (t, chain) in a.models().iter().enumerate() {
        let alone = dcsvm::fit_with(&train.task(t + 1).unwrap(), &h, None, &opts).unwrap();
        assert_eq!(chain.alpha(), alone.alpha());
    }
}

#[test]
fn grid_search_picks_a_cell_from_the_grid() {
    let train = gen_ds1(&Ds1Spec { n: 60, m: 4, seed: 1, ..Default::default() }).unwrap();
    let val = gen_ds1(&Ds1Spec { n: 60, m: 4, seed: 2, ..Default::default() }).unwrap();
    let grid = Grid {
        c_values: vec![1.0, 10.0],
        sigma_values: vec![0.5, 1.0],
        gamma_values: vec![1.0, 64.0],
        lambda_values: vec![1.0, 64.0],
    };
    let best = grid_search(&train, &val, &grid, KernelFamily::Gaussian, Method::Dc, &SolverOptions::default()).unwrap();
    assert_eq!(best.evaluated, 16);
    assert_eq!(best.failed, 0);
    assert!(grid.c_values.contains(&best.hyper.c) && grid.lambda_values.contains(&best.hyper.lambda));
    let model = MethodModel::fit(Method::Dc, &train, &best.hyper, None, &SolverOptions::default()).unwrap();
    let acc = eval_windowed(&model, &val).unwrap();
    assert_eq!(acc, best.val_per_task);
}
