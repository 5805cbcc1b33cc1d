//! The `dcsvm` command-line tool.
//!
//! Every parameter can come from a flag or from the JSON object given with
//! `--config`; flags win, and built-in defaults fill the rest. The fully
//! resolved parameter set is echoed to stderr and stored with every artifact
//! (inside model and report JSON, or as a `<file>.config.json` sidecar next
//! to CSV outputs).
//!
//! Exit codes: 0 on success, 2 for input or configuration errors, 3 for
//! numerical failures such as solver non-convergence.

use std::collections::BTreeSet;
use std::fs::{self, File};
use std::io::{self, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::harness::{
    eval_windowed, mean_accuracy, run_prequential, run_synthetic_protocol_with, sweep_optimal_lambda,
    write_plot_csv, Grid, KernelFamily, LambdaSweepConfig, Method, PlotPoint, PrequentialConfig, SyntheticProtocol,
};
use crate::kernelcore::{read_stream_csv, write_stream_csv, HyperParams, KernelSpec, MultiTaskStream};
use crate::model::{fit_with, TrainedModel};
use crate::qp_solver::SolverOptions;
use crate::streams::loaders::{
    load_air_quality, load_gsadd, load_water_quality, read_gas_records, read_water_records, GasConfig,
    DEFAULT_WATER_THRESHOLD,
};
use crate::streams::synthetic::{gen_rotating_hyperplane, Ds1Spec, HyperplaneSpec, SyntheticSpec};

/// Environment variable naming the directory that holds real datasets.
pub const DATA_DIR_ENV: &str = "DCSVM_DATA_DIR";

#[derive(Parser, Debug)]
#[command(name = "dcsvm", version, about = "Double-coupling SVMs for multi-task drifting streams")]
pub struct Cli {
    /// Master random seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for grid search (results do not depend on it).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// JSON object of parameter values; flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory to write generated streams into, for inspection.
    #[arg(long, global = true)]
    dump: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic stream as CSV.
    Gen(GenArgs),
    /// Fit a coupled model on a stream CSV and save it as JSON.
    Fit(FitArgs),
    /// Score every row of a stream CSV with a saved model.
    Predict(PredictArgs),
    /// Window-matched accuracy of a saved model on a stream CSV.
    Eval(EvalArgs),
    /// Run an experiment protocol and write its report.
    Bench(BenchArgs),
}

#[derive(clap::ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum Generator {
    Ds1,
    Ds2,
    Ds3,
    Ds4,
    Ds5,
    Hyperplane,
}

#[derive(Args, Debug, Default)]
struct StreamArgs {
    /// Samples per task.
    #[arg(long)]
    n: Option<usize>,
    /// Number of time windows.
    #[arg(long = "windows", short = 'm')]
    windows: Option<usize>,
    /// Sliding-sine deviation of task 2 (ds1, ds4).
    #[arg(long)]
    r: Option<f64>,
    /// Noise standard deviation of the sliding-sine stream.
    #[arg(long)]
    noise_sd: Option<f64>,
    /// Angle between the tasks' hyperplanes, degrees (ds2, ds3, ds5, hyperplane).
    #[arg(long)]
    offset_deg: Option<f64>,
    /// Hyperplane dimension.
    #[arg(long)]
    dim: Option<usize>,
    /// Hyperplane rotation over the whole stream, radians.
    #[arg(long)]
    total_rotation: Option<f64>,
    /// Redraw points closer than this to a hyperplane.
    #[arg(long)]
    margin_exclusion: Option<f64>,
    /// Label flip probability (overrides the preset).
    #[arg(long)]
    label_noise: Option<f64>,
}

#[derive(Args, Debug)]
struct GenArgs {
    generator: Generator,
    #[command(flatten)]
    stream: StreamArgs,
    /// Output CSV (stdout when omitted).
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
struct HyperArgs {
    #[arg(long)]
    c: Option<f64>,
    /// linear or gaussian.
    #[arg(long)]
    kernel: Option<String>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
}

#[derive(Args, Debug, Default)]
struct SolverArgs {
    /// KKT gap tolerance (relative to 1 + |objective|).
    #[arg(long)]
    tol: Option<f64>,
    /// Iteration cap of the QP solver.
    #[arg(long)]
    max_iter: Option<usize>,
}

#[derive(Args, Debug)]
struct FitArgs {
    /// Training stream CSV.
    #[arg(long)]
    train: PathBuf,
    /// Model JSON to write.
    #[arg(long, short)]
    out: PathBuf,
    #[command(flatten)]
    hyper: HyperArgs,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args, Debug)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    /// Stream CSV to score.
    #[arg(long)]
    data: PathBuf,
    /// Prediction CSV (stdout when omitted).
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[command(subcommand)]
    protocol: Protocol,
}

#[derive(Subcommand, Debug)]
enum Protocol {
    Ds1(SyntheticBench),
    Ds2(SyntheticBench),
    Ds3(SyntheticBench),
    Ds4(SyntheticBench),
    Ds5(SyntheticBench),
    /// Sliding train/validate/predict-next-batch protocol.
    Prequential(PrequentialBench),
    /// Best coupling weights per deviation with C and sigma fixed.
    LambdaSweep(SweepBench),
}

#[derive(Args, Debug, Default)]
struct GridArgs {
    /// Base grid: desk or full.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long, value_delimiter = ',')]
    c_values: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    sigma_values: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    gamma_values: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    lambda_values: Option<Vec<f64>>,
}

#[derive(Args, Debug, Default)]
struct OutputArgs {
    /// Report JSON (stdout when omitted).
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Flat per-run CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Plot-ready CSV (series, x, y, yerr).
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SyntheticBench {
    /// Deviation values for sliding-sine streams, comma separated.
    #[arg(long, value_delimiter = ',')]
    r: Option<Vec<f64>>,
    /// Offset angles for hyperplane streams, comma separated.
    #[arg(long, value_delimiter = ',')]
    offset_deg: Option<Vec<f64>>,
    #[arg(long)]
    kernel: Option<String>,
    #[arg(long)]
    runs: Option<usize>,
    /// Methods to compare: dc, single_chain, merged.
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<String>>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long = "windows", short = 'm')]
    windows: Option<usize>,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct PrequentialBench {
    /// synthetic, gsadd, water or air.
    #[arg(long)]
    source: Option<String>,
    /// Batches used for training at each step.
    #[arg(long = "N", alias = "n-train")]
    n_train: Option<usize>,
    /// Number of batches (synthetic source).
    #[arg(long)]
    batches: Option<usize>,
    /// Samples per batch and task.
    #[arg(long)]
    batch_size: Option<usize>,
    /// Directory holding the real datasets.
    #[arg(long, env = DATA_DIR_ENV)]
    data_dir: Option<PathBuf>,
    /// Water-quality stations to pair, e.g. 1,2.
    #[arg(long, value_delimiter = ',')]
    tasks: Option<Vec<usize>>,
    /// Grade cut for water quality: label +1 iff grade <= threshold.
    #[arg(long)]
    water_threshold: Option<u8>,
    /// Z-score features with the training batches of each step.
    #[arg(long)]
    standardize: Option<bool>,
    #[arg(long)]
    kernel: Option<String>,
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<String>>,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct SweepBench {
    #[arg(long, value_delimiter = ',')]
    r: Option<Vec<f64>>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long = "windows", short = 'm')]
    windows: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    gamma_values: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    lambda_values: Option<Vec<f64>>,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    output: OutputArgs,
}

/// Merges flag values, config-file values, and defaults, recording the
/// outcome.
struct Resolver {
    file: Map<String, Value>,
    used: BTreeSet<String>,
    resolved: Map<String, Value>,
}

fn normalize_key(k: &str) -> String {
    k.trim_start_matches('-').replace('-', "_")
}

impl Resolver {
    fn load(path: Option<&Path>) -> Result<Self> {
        let file = match path {
            None => Map::new(),
            Some(p) => {
                let text = fs::read_to_string(p)
                    .map_err(|e| Error::input(format!("cannot read config {}: {e}", p.display())))?;
                match serde_json::from_str::<Value>(&text) {
                    Ok(Value::Object(m)) => m.into_iter().map(|(k, v)| (normalize_key(&k), v)).collect(),
                    Ok(_) => return Err(Error::input("config file must hold a JSON object")),
                    Err(e) => return Err(Error::input(format!("config {}: {e}", p.display()))),
                }
            }
        };
        Ok(Resolver {
            file,
            used: BTreeSet::new(),
            resolved: Map::new(),
        })
    }

    fn from_file<T: DeserializeOwned>(&mut self, key: &str) -> Result<Option<T>> {
        self.used.insert(key.to_string());
        let Some(v) = self.file.get(key).cloned() else {
            return Ok(None);
        };
        let parsed = serde_json::from_value::<T>(v.clone()).or_else(|e| {
            // allow a bare scalar where a list is expected, and "a,b" strings
            let alt = match &v {
                Value::String(s) if s.contains(',') => {
                    Value::Array(s.split(',').map(|p| Value::String(p.trim().to_string())).collect())
                }
                Value::Array(_) => return Err(e),
                other => Value::Array(vec![other.clone()]),
            };
            serde_json::from_value::<T>(alt).or(Err(e))
        });
        parsed
            .map(Some)
            .map_err(|e| Error::input(format!("config key {key:?}: {e}")))
    }

    fn opt<T: DeserializeOwned + Serialize>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>> {
        let from_file = self.from_file::<T>(key)?;
        let v = flag.or(from_file);
        if let Some(v) = &v {
            self.resolved.insert(key.to_string(), serde_json::to_value(v)?);
        }
        Ok(v)
    }

    fn get<T: DeserializeOwned + Serialize>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T> {
        let v = self.opt(key, flag)?.unwrap_or(default);
        self.resolved.insert(key.to_string(), serde_json::to_value(&v)?);
        Ok(v)
    }

    fn record<T: Serialize>(&mut self, key: &str, v: &T) -> Result<()> {
        self.resolved.insert(key.to_string(), serde_json::to_value(v)?);
        Ok(())
    }

    /// Fails on config keys nothing consumed.
    fn finish(&mut self) -> Result<Value> {
        if let Some(k) = self.file.keys().find(|k| !self.used.contains(*k)) {
            return Err(Error::input(format!("unknown config key {k:?}")));
        }
        Ok(Value::Object(self.resolved.clone()))
    }
}

/// Entry point; returns the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numeric() {
                3
            } else {
                2
            }
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    let mut res = Resolver::load(cli.config.as_deref())?;
    let seed = res.get("seed", cli.seed, 0u64)?;
    let jobs = res.opt("jobs", cli.jobs)?;
    if let Some(j) = jobs {
        if j == 0 {
            return Err(Error::input("--jobs must be at least 1"));
        }
        // a second initialisation in the same process is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j).build_global();
    }
    let dump = cli.dump.clone();
    match cli.command {
        Command::Gen(a) => cmd_gen(a, seed, &mut res),
        Command::Fit(a) => cmd_fit(a, &mut res),
        Command::Predict(a) => cmd_predict(a, &mut res),
        Command::Eval(a) => cmd_eval(a, &mut res),
        Command::Bench(a) => cmd_bench(a, seed, dump.as_deref(), &mut res),
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::input(format!("cannot open {}: {e}", path.display())))
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| Error::input(format!("cannot create {}: {e}", path.display())))
}

fn read_stream(path: &Path) -> Result<MultiTaskStream> {
    read_stream_csv(BufReader::new(open(path)?))
        .map_err(|e| Error::input(format!("{}: {e}", path.display())))
}

fn read_model(path: &Path) -> Result<TrainedModel> {
    TrainedModel::from_json_reader(BufReader::new(open(path)?)).map_err(|e| match e {
        // serde_json reports the line and column itself
        Error::Json(j) => Error::input(format!("{}: parse error: {j}", path.display())),
        other => Error::input(format!("{}: {other}", path.display())),
    })
}

fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".config.json");
    PathBuf::from(s)
}

/// Writes the resolved config next to a CSV artifact, or to stderr when the
/// artifact goes to stdout.
fn write_provenance(out: Option<&Path>, config: &Value) -> Result<()> {
    match out {
        Some(p) => {
            let mut f = create(&sidecar(p))?;
            serde_json::to_writer_pretty(&mut f, config)?;
            writeln!(f)?;
        }
        None => eprintln!("config: {config}"),
    }
    Ok(())
}

fn with_output<F>(out: Option<&Path>, body: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    match out {
        Some(p) => {
            let mut w = io::BufWriter::new(create(p)?);
            body(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            body(&mut lock)?;
            lock.flush()?;
        }
    }
    Ok(())
}

fn synthetic_spec(generator: Generator, a: &StreamArgs, res: &mut Resolver) -> Result<SyntheticSpec> {
    let mut spec = match generator {
        Generator::Ds1 => SyntheticSpec::ds1(res.get("r", a.r, 0.05)?),
        Generator::Ds4 => SyntheticSpec::ds4(res.get("r", a.r, 0.05)?),
        Generator::Ds2 | Generator::Hyperplane => SyntheticSpec::ds2(res.get("offset_deg", a.offset_deg, 2.0)?),
        Generator::Ds3 => SyntheticSpec::ds3(res.get("offset_deg", a.offset_deg, 2.0)?),
        Generator::Ds5 => SyntheticSpec::ds5(res.get("offset_deg", a.offset_deg, 2.0)?),
    };
    apply_stream_args(&mut spec, a, res)?;
    Ok(spec)
}

fn apply_stream_args(spec: &mut SyntheticSpec, a: &StreamArgs, res: &mut Resolver) -> Result<()> {
    use crate::streams::synthetic::BaseGenerator;
    match &mut spec.base {
        BaseGenerator::SlidingSine(s) => {
            s.n = res.get("n", a.n, s.n)?;
            s.m = res.get("windows", a.windows, s.m)?;
            s.noise_sd = res.get("noise_sd", a.noise_sd, s.noise_sd)?;
        }
        BaseGenerator::RotatingHyperplane(s) => {
            s.n = res.get("n", a.n, s.n)?;
            s.m = res.get("windows", a.windows, s.m)?;
            s.d = res.get("dim", a.dim, s.d)?;
            s.total_rotation = res.get("total_rotation", a.total_rotation, s.total_rotation)?;
            s.margin_exclusion = res.get("margin_exclusion", a.margin_exclusion, s.margin_exclusion)?;
        }
    }
    spec.label_noise = res.get("label_noise", a.label_noise, spec.label_noise)?;
    spec.validate()
}

fn cmd_gen(a: GenArgs, seed: u64, res: &mut Resolver) -> Result<()> {
    res.record("command", &"gen")?;
    res.record("generator", &a.generator)?;
    let spec = synthetic_spec(a.generator, &a.stream, res)?;
    let config = res.finish()?;
    let stream = spec.generate(seed, true)?;
    with_output(a.out.as_deref(), |w| write_stream_csv(&stream, w))?;
    write_provenance(a.out.as_deref(), &config)?;
    eprintln!("wrote {} rows ({} tasks, {} windows)", stream.len(), stream.k(), stream.m());
    Ok(())
}

fn hyper_from(a: &HyperArgs, res: &mut Resolver) -> Result<HyperParams> {
    let family: KernelFamily = res.get("kernel", a.kernel.clone(), "linear".to_string())?.parse()?;
    let kernel = match family {
        KernelFamily::Linear => KernelSpec::Linear,
        KernelFamily::Gaussian => KernelSpec::gaussian(res.get("sigma", a.sigma, 1.0)?)?,
    };
    HyperParams::new(
        res.get("c", a.c, 10.0)?,
        kernel,
        res.get("gamma", a.gamma, 1.0)?,
        res.get("lambda", a.lambda, 1.0)?,
    )
}

fn solver_from(a: &SolverArgs, res: &mut Resolver) -> Result<SolverOptions> {
    let d = SolverOptions::default();
    Ok(SolverOptions {
        tol: res.get("tol", a.tol, d.tol)?,
        max_iter: res.opt("max_iter", a.max_iter)?,
        ..d
    })
}

fn cmd_fit(a: FitArgs, res: &mut Resolver) -> Result<()> {
    res.record("command", &"fit")?;
    res.record("train", &a.train)?;
    let hyper = hyper_from(&a.hyper, res)?;
    let opts = solver_from(&a.solver, res)?;
    let config = res.finish()?;
    let stream = read_stream(&a.train)?;
    let start = Instant::now();
    let model = fit_with(&stream, &hyper, None, &opts)?;
    for w in model.warnings() {
        eprintln!("warning: {w}");
    }
    let acc = eval_windowed(&model, &stream)?;
    eprintln!(
        "fit {} samples in {:.2?}: {} iterations, KKT gap {:.3e}, objective {:.6e}, training accuracy {:.4}",
        stream.len(),
        start.elapsed(),
        model.iterations(),
        model.kkt_gap(),
        model.objective(),
        mean_accuracy(&acc)
    );
    let mut w = io::BufWriter::new(create(&a.out)?);
    model.to_json_writer(&mut w, Some(config))?;
    w.flush()?;
    Ok(())
}

fn cmd_predict(a: PredictArgs, res: &mut Resolver) -> Result<()> {
    res.record("command", &"predict")?;
    res.record("model", &a.model)?;
    res.record("data", &a.data)?;
    let config = res.finish()?;
    let model = read_model(&a.model)?;
    let data = read_stream(&a.data)?;
    if data.k() > model.k() {
        return Err(Error::input(format!(
            "data has {} tasks, model has {}",
            data.k(),
            model.k()
        )));
    }
    let preds = model.predict_stream(&data)?;
    let correct = preds
        .iter()
        .zip(data.samples())
        .filter(|(p, s)| p.label == s.label)
        .count();
    with_output(a.out.as_deref(), |w| {
        let mut c = csv::Writer::from_writer(w);
        c.write_record(["task", "time", "label", "score", "predicted"])?;
        for (p, s) in preds.iter().zip(data.samples()) {
            c.write_record([
                s.task.to_string(),
                s.time.to_string(),
                i8::from(s.label).to_string(),
                p.score.to_string(),
                i8::from(p.label).to_string(),
            ])?;
        }
        c.flush()?;
        Ok(())
    })?;
    write_provenance(a.out.as_deref(), &config)?;
    eprintln!(
        "accuracy {:.4} ({correct} of {})",
        correct as f64 / data.len() as f64,
        data.len()
    );
    Ok(())
}

fn cmd_eval(a: EvalArgs, res: &mut Resolver) -> Result<()> {
    res.record("command", &"eval")?;
    res.record("model", &a.model)?;
    res.record("data", &a.data)?;
    let config = res.finish()?;
    let model = read_model(&a.model)?;
    let data = read_stream(&a.data)?;
    let acc = eval_windowed(&model, &data)?;
    let out = serde_json::json!({
        "config": config,
        "accuracy_per_task": acc,
        "mean_accuracy": mean_accuracy(&acc),
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

fn grid_from(a: &GridArgs, res: &mut Resolver) -> Result<Grid> {
    let base = res.get("grid", a.grid.clone(), "desk".to_string())?;
    let mut g = match base.as_str() {
        "desk" => Grid::desk(),
        "full" => Grid::full(),
        other => return Err(Error::input(format!("unknown grid {other:?} (desk or full)"))),
    };
    g.c_values = res.get("c_values", a.c_values.clone(), g.c_values)?;
    g.sigma_values = res.get("sigma_values", a.sigma_values.clone(), g.sigma_values)?;
    g.gamma_values = res.get("gamma_values", a.gamma_values.clone(), g.gamma_values)?;
    g.lambda_values = res.get("lambda_values", a.lambda_values.clone(), g.lambda_values)?;
    Ok(g)
}

fn methods_from(flag: Option<Vec<String>>, res: &mut Resolver) -> Result<Vec<Method>> {
    let names = res.get(
        "methods",
        flag,
        vec!["dc".to_string(), "single_chain".to_string()],
    )?;
    names.iter().map(|s| s.parse()).collect()
}

fn write_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<()> {
    with_output(out, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        writeln!(w)?;
        Ok(())
    })
}

fn cmd_bench(a: BenchArgs, seed: u64, dump: Option<&Path>, res: &mut Resolver) -> Result<()> {
    res.record("command", &"bench")?;
    match a.protocol {
        Protocol::Ds1(b) => bench_synthetic(Generator::Ds1, b, seed, dump, res),
        Protocol::Ds2(b) => bench_synthetic(Generator::Ds2, b, seed, dump, res),
        Protocol::Ds3(b) => bench_synthetic(Generator::Ds3, b, seed, dump, res),
        Protocol::Ds4(b) => bench_synthetic(Generator::Ds4, b, seed, dump, res),
        Protocol::Ds5(b) => bench_synthetic(Generator::Ds5, b, seed, dump, res),
        Protocol::Prequential(b) => bench_prequential(b, seed, dump, res),
        Protocol::LambdaSweep(b) => bench_sweep(b, seed, res),
    }
}

fn dump_stream(dir: &Path, name: &str, stream: &MultiTaskStream) -> Result<()> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    write_stream_csv(stream, io::BufWriter::new(create(&path)?))?;
    eprintln!("dumped {}", path.display());
    Ok(())
}

fn bench_synthetic(
    generator: Generator,
    b: SyntheticBench,
    seed: u64,
    dump: Option<&Path>,
    res: &mut Resolver,
) -> Result<()> {
    res.record("protocol", &generator)?;
    let sliding = matches!(generator, Generator::Ds1 | Generator::Ds4);
    let values = if sliding {
        res.get("r", b.r.clone(), vec![0.05])?
    } else {
        res.get("offset_deg", b.offset_deg.clone(), vec![2.0])?
    };
    let kernel: KernelFamily = res.get("kernel", b.kernel.clone(), "linear".to_string())?.parse()?;
    let runs = res.get("runs", b.runs, 10usize)?;
    let methods = methods_from(b.methods.clone(), res)?;
    let grid = grid_from(&b.grid, res)?;
    let solver = solver_from(&b.solver, res)?;
    let stream_args = StreamArgs {
        n: b.n,
        windows: b.windows,
        ..Default::default()
    };
    let mut specs = Vec::new();
    for &v in &values {
        let mut spec = match generator {
            Generator::Ds1 => SyntheticSpec::ds1(v),
            Generator::Ds4 => SyntheticSpec::ds4(v),
            Generator::Ds3 => SyntheticSpec::ds3(v),
            Generator::Ds5 => SyntheticSpec::ds5(v),
            Generator::Ds2 | Generator::Hyperplane => SyntheticSpec::ds2(v),
        };
        apply_stream_args(&mut spec, &stream_args, res)?;
        specs.push(spec);
    }
    let resolved = res.finish()?;
    eprintln!("config: {resolved}");

    let mut reports = Vec::new();
    let mut points = Vec::new();
    for (spec, &v) in specs.iter().zip(&values) {
        let cfg = SyntheticProtocol {
            spec: *spec,
            kernel,
            grid: grid.clone(),
            runs,
            methods: methods.clone(),
            seed,
            solver,
        };
        let start = Instant::now();
        let report = run_synthetic_protocol_with(&cfg, |r| {
            eprintln!(
                "[{:>7.1}s] value {v} run {} {:<12} test {:.4}  C={} {:?} gamma={} lambda={}",
                start.elapsed().as_secs_f64(),
                r.run + 1,
                r.method.name(),
                r.test_mean(),
                r.hyper.c,
                r.hyper.kernel,
                r.hyper.gamma,
                r.hyper.lambda
            );
            for w in &r.warnings {
                eprintln!("warning: {w}");
            }
        })?;
        if let Some(dir) = dump {
            for row in report.rows_for(methods[0]) {
                let tag = format!("v{v}_run{}", row.run + 1);
                dump_stream(dir, &format!("{tag}_train.csv"), &spec.generate(row.seed_train, true)?)?;
                dump_stream(dir, &format!("{tag}_val.csv"), &spec.generate(row.seed_val, true)?)?;
                dump_stream(dir, &format!("{tag}_test.csv"), &spec.generate(row.seed_test, false)?)?;
            }
        }
        for s in &report.summary {
            eprintln!(
                "value {v}: {:<12} {:.2} ± {:.2} %",
                s.method.name(),
                100.0 * s.mean,
                100.0 * s.std
            );
            points.push(PlotPoint {
                series: s.method.name().to_string(),
                x: v,
                y: s.mean,
                yerr: s.std,
            });
        }
        reports.push((v, report));
    }

    if let Some(p) = &b.output.csv {
        let mut f = io::BufWriter::new(create(p)?);
        let mut first = true;
        for (_, report) in &reports {
            let mut buf = Vec::new();
            report.write_csv(&mut buf)?;
            let text = String::from_utf8_lossy(&buf);
            let body = if first { &text[..] } else { text.split_once('\n').map_or("", |x| x.1) };
            f.write_all(body.as_bytes())?;
            first = false;
        }
        f.flush()?;
        write_provenance(Some(p), &resolved)?;
    }
    if let Some(p) = &b.output.plot {
        write_plot_csv(&points, io::BufWriter::new(create(p)?))?;
        write_provenance(Some(p), &resolved)?;
    }
    let reports: Vec<Value> = reports
        .iter()
        .map(|(v, r)| serde_json::json!({ "value": v, "report": r }))
        .collect();
    write_json(
        b.output.out.as_deref(),
        &serde_json::json!({ "resolved_config": resolved, "reports": reports }),
    )
}

fn read_dir_sorted(dir: &Path, ext: &str) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::input(format!("cannot list {}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == ext))
        .collect();
    // batch2 before batch10
    files.sort_by_key(|p| {
        let stem = p.file_stem().map(|s| s.to_string_lossy().to_string()).unwrap_or_default();
        let digits: String = stem.chars().filter(|c| c.is_ascii_digit()).collect();
        (digits.parse::<u64>().unwrap_or(u64::MAX), stem)
    });
    Ok(files)
}

fn bench_prequential(b: PrequentialBench, seed: u64, dump: Option<&Path>, res: &mut Resolver) -> Result<()> {
    res.record("protocol", &"prequential")?;
    let source = res.get("source", b.source.clone(), "synthetic".to_string())?;
    let n_train = res.get("n_train", b.n_train, 3usize)?;
    let kernel: KernelFamily = res.get("kernel", b.kernel.clone(), "linear".to_string())?.parse()?;
    let methods = methods_from(b.methods.clone(), res)?;
    let grid = grid_from(&b.grid, res)?;
    let solver = solver_from(&b.solver, res)?;
    let real = source != "synthetic";
    let standardize = res.get("standardize", b.standardize, real)?;

    let data_dir = || -> Result<PathBuf> {
        b.data_dir.clone().ok_or_else(|| {
            Error::input(format!("source {source:?} needs --data-dir or ${DATA_DIR_ENV}"))
        })
    };
    let stream = match source.as_str() {
        "synthetic" => {
            let batches = res.get("batches", b.batches, 25usize)?;
            let batch_size = res.get("batch_size", b.batch_size, 20usize)?;
            gen_rotating_hyperplane(&HyperplaneSpec {
                n: batches * batch_size,
                m: batches,
                seed,
                ..Default::default()
            })?
        }
        "gsadd" => {
            let dir = data_dir()?;
            res.record("data_dir", &dir)?;
            let files = read_dir_sorted(&dir.join("gsadd"), "dat")?;
            if files.is_empty() {
                return Err(Error::input(format!("no .dat files in {}", dir.join("gsadd").display())));
            }
            let readers = files
                .iter()
                .map(|p| open(p).map(BufReader::new))
                .collect::<Result<Vec<_>>>()?;
            let records = read_gas_records(readers)?;
            let t1 = load_gsadd(&records, &GasConfig::task1())?;
            let t2 = load_gsadd(&records, &GasConfig::task2())?;
            MultiTaskStream::combine_tasks(&[t1, t2])?
        }
        "water" => {
            let dir = data_dir()?;
            res.record("data_dir", &dir)?;
            let tasks = res.get("tasks", b.tasks.clone(), vec![1usize, 2])?;
            let threshold = res.get("water_threshold", b.water_threshold, DEFAULT_WATER_THRESHOLD)?;
            let batch_size = res.get("batch_size", b.batch_size, 4usize)?;
            let streams = tasks
                .iter()
                .map(|t| {
                    let p = dir.join("water").join(format!("task{t}.csv"));
                    let records = read_water_records(open(&p)?)?;
                    load_water_quality(&records, threshold, batch_size)
                })
                .collect::<Result<Vec<_>>>()?;
            MultiTaskStream::combine_tasks(&streams)?
        }
        "air" => {
            let dir = data_dir()?;
            res.record("data_dir", &dir)?;
            let batch_size = res.get("batch_size", b.batch_size, 24usize)?;
            let mut f = open(&dir.join("air").join("AirQualityUCI.csv"))?;
            let mut text = Vec::new();
            f.read_to_end(&mut text)?;
            let air = load_air_quality(&text[..], batch_size)?;
            eprintln!("air quality: {} rows, {} values interpolated", air.rows, air.interpolated);
            MultiTaskStream::combine_tasks(&[air.benzene, air.nmhc_sensor])?
        }
        other => {
            return Err(Error::input(format!(
                "unknown source {other:?} (synthetic, gsadd, water or air)"
            )))
        }
    };
    let resolved = res.finish()?;
    eprintln!("config: {resolved}");
    if let Some(dir) = dump {
        dump_stream(dir, "prequential_stream.csv", &stream)?;
    }
    let cfg = PrequentialConfig {
        n_train,
        kernel,
        grid,
        methods,
        standardize,
        solver,
    };
    let report = run_prequential(&stream, &cfg)?;
    let mut points = Vec::new();
    for run in &report.runs {
        eprintln!(
            "{:<12} {} steps, mean accuracy {:.4}",
            run.method.name(),
            run.steps.len(),
            run.mean_accuracy
        );
        for s in &run.steps {
            for w in &s.warnings {
                eprintln!("warning: batch {}: {w}", s.target_batch);
            }
        }
        points.push(PlotPoint {
            series: run.method.name().to_string(),
            x: n_train as f64,
            y: run.mean_accuracy,
            yerr: crate::harness::mean_std(&run.steps.iter().map(|s| s.mean_accuracy).collect::<Vec<_>>()).1,
        });
    }
    if let Some(p) = &b.output.csv {
        let mut c = csv::Writer::from_writer(io::BufWriter::new(create(p)?));
        c.write_record(["method", "target_batch", "c", "sigma", "gamma", "lambda", "val_accuracy", "accuracy"])?;
        for run in &report.runs {
            for s in &run.steps {
                c.write_record([
                    run.method.name().to_string(),
                    s.target_batch.to_string(),
                    s.hyper.c.to_string(),
                    s.hyper.kernel.sigma().map(|x| x.to_string()).unwrap_or_default(),
                    s.hyper.gamma.to_string(),
                    s.hyper.lambda.to_string(),
                    s.val_accuracy.to_string(),
                    s.mean_accuracy.to_string(),
                ])?;
            }
        }
        c.flush()?;
        write_provenance(Some(p), &resolved)?;
    }
    if let Some(p) = &b.output.plot {
        write_plot_csv(&points, io::BufWriter::new(create(p)?))?;
        write_provenance(Some(p), &resolved)?;
    }
    write_json(
        b.output.out.as_deref(),
        &serde_json::json!({ "resolved_config": resolved, "report": report }),
    )
}

fn bench_sweep(b: SweepBench, seed: u64, res: &mut Resolver) -> Result<()> {
    res.record("protocol", &"lambda-sweep")?;
    let r_values = res.get("r", b.r.clone(), vec![0.1, 0.2, 0.3])?;
    let mut cfg = LambdaSweepConfig::new(r_values, seed);
    cfg.c = res.get("c", b.c, cfg.c)?;
    cfg.sigma = res.get("sigma", b.sigma, cfg.sigma)?;
    cfg.runs = res.get("runs", b.runs, cfg.runs)?;
    cfg.gamma_values = res.get("gamma_values", b.gamma_values.clone(), cfg.gamma_values)?;
    cfg.lambda_values = res.get("lambda_values", b.lambda_values.clone(), cfg.lambda_values)?;
    cfg.base = Ds1Spec {
        n: res.get("n", b.n, cfg.base.n)?,
        m: res.get("windows", b.windows, cfg.base.m)?,
        ..cfg.base
    };
    cfg.base.validate()?;
    cfg.solver = solver_from(&b.solver, res)?;
    let resolved = res.finish()?;
    eprintln!("config: {resolved}");
    let report = sweep_optimal_lambda(&cfg)?;
    eprintln!("{:>6} {:>14} {:>14} {:>10} {:>10}", "r", "lambda", "gamma", "log2 lam", "log2 gam");
    let mut points = Vec::new();
    for row in &report.rows {
        let fmt = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.2}"));
        eprintln!(
            "{:>6} {:>14} {:>14} {:>10} {:>10}",
            row.r,
            format!("{:.1}±{:.1}", row.mean_lambda, row.std_lambda),
            format!("{:.1}±{:.1}", row.mean_gamma, row.std_gamma),
            fmt(row.mean_log2_lambda),
            fmt(row.mean_log2_gamma)
        );
        points.push(PlotPoint {
            series: "lambda".into(),
            x: row.r,
            y: row.mean_lambda,
            yerr: row.std_lambda,
        });
        points.push(PlotPoint {
            series: "gamma".into(),
            x: row.r,
            y: row.mean_gamma,
            yerr: row.std_gamma,
        });
    }
    if let Some(p) = &b.output.plot {
        write_plot_csv(&points, io::BufWriter::new(create(p)?))?;
        write_provenance(Some(p), &resolved)?;
    }
    if let Some(p) = &b.output.csv {
        let mut c = csv::Writer::from_writer(io::BufWriter::new(create(p)?));
        c.write_record(["r", "run", "lambda", "gamma"])?;
        for row in &report.rows {
            for (i, (l, g)) in row.best_lambda.iter().zip(&row.best_gamma).enumerate() {
                c.write_record([row.r.to_string(), (i + 1).to_string(), l.to_string(), g.to_string()])?;
            }
        }
        c.flush()?;
        write_provenance(Some(p), &resolved)?;
    }
    write_json(
        b.output.out.as_deref(),
        &serde_json::json!({ "resolved_config": resolved, "report": report }),
    )
}
