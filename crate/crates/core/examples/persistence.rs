//! Save a fitted model as JSON, load it back, and score a stream CSV.
//!
//! `cargo run --release --example persistence`

use dcsvm::kernelcore::{read_stream_csv, write_stream_csv};
use dcsvm::streams::{gen_ds1, Ds1Spec};
use dcsvm::{fit, HyperParams, KernelSpec, TrainedModel};

fn main() -> dcsvm::Result<()> {
    let spec = Ds1Spec { n: 500, m: 25, ..Default::default() };
    let train = gen_ds1(&Ds1Spec { seed: 1, ..spec })?;
    let model = fit(&train, &HyperParams::new(10.0, KernelSpec::gaussian(1.0)?, 4096.0, 4096.0)?)?;

    let json = model.to_json_string()?;
    println!("model JSON: {} bytes", json.len());
    let loaded = TrainedModel::from_json_str(&json)?;

    // Streams round-trip through CSV as well.
    let mut csv = Vec::new();
    write_stream_csv(&gen_ds1(&Ds1Spec { seed: 2, ..spec })?, &mut csv)?;
    let test = read_stream_csv(csv.as_slice())?;

    let a = model.predict_stream(&test)?;
    let b = loaded.predict_stream(&test)?;
    let identical = a.iter().zip(&b).all(|(p, q)| p.score.to_bits() == q.score.to_bits());
    let correct = b.iter().zip(test.samples()).filter(|(p, s)| p.label == s.label).count();
    println!("reloaded model gives identical scores: {identical}");
    println!("accuracy on {} test samples: {:.4}", test.len(), correct as f64 / test.len() as f64);
    Ok(())
}
