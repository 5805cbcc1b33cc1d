//! The synthetic drift streams: sliding sine, rotating hyperplane, label
//! noise, and the halved (data-scarce) variant.
//!
//! `cargo run --release --example drift_generators`

use dcsvm::kernelcore::{write_stream_csv, Label};
use dcsvm::streams::SyntheticSpec;
use dcsvm::MultiTaskStream;

fn describe(name: &str, s: &MultiTaskStream) {
    let pos = s.samples().iter().filter(|x| x.label == Label::Positive).count();
    println!(
        "{name:<28} {:>5} samples, k = {}, m = {:>2}, d = {}, positives {pos}",
        s.len(),
        s.k(),
        s.m(),
        s.d()
    );
}

fn main() -> dcsvm::Result<()> {
    let seed = 7;
    describe("DS1 sliding sine r=0.05", &SyntheticSpec::ds1(0.05).generate(seed, true)?);
    describe("DS2 hyperplane 2 deg", &SyntheticSpec::ds2(2.0).generate(seed, true)?);
    describe("DS3 halved (training)", &SyntheticSpec::ds3(2.0).generate(seed, true)?);
    describe("DS3 full (test)", &SyntheticSpec::ds3(2.0).generate(seed, false)?);
    describe("DS4 sine + 10% noise", &SyntheticSpec::ds4(0.05).generate(seed, true)?);
    describe("DS5 hyperplane + 10% noise", &SyntheticSpec::ds5(2.0).generate(seed, true)?);

    let mut small = SyntheticSpec::ds1(0.3);
    small.set_samples_per_task(10);
    small.set_windows(2);
    println!("\nfirst rows of a small DS1 stream as CSV:");
    let mut out = Vec::new();
    write_stream_csv(&small.generate(seed, true)?, &mut out)?;
    for line in String::from_utf8_lossy(&out).lines().take(6) {
        println!("  {line}");
    }
    Ok(())
}
