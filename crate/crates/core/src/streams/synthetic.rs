//! Synthetic two-task drift streams.
//!
//! * Sliding-sine streams: points follow a sine curve swept across one
//!   period, class offset `0.2·y` along the curve. Task 2 shrinks the sine by
//!   `1 − r`.
//! * Rotating hyperplane streams: uniform points in `[−1, 1]^d` labelled by
//!   a hyperplane whose normal rotates in the first two coordinates over the
//!   stream. Task 2 uses the same draws with the normal turned by a fixed
//!   offset angle.
//!
//! Sample `t` (1-based) of `n` falls into window `⌈t·m/n⌉`.

use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernelcore::{sort_time_major, Label, MultiTaskStream, Sample};

/// Seeded generator used by every stochastic routine in the crate.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn time_of(t: usize, n: usize, m: usize) -> usize {
    (t * m).div_ceil(n)
}

fn check_windowing(n: usize, m: usize) -> Result<()> {
    if m == 0 || n < m || n % m != 0 {
        return Err(Error::input(format!(
            "n = {n} must be a positive multiple of m = {m}"
        )));
    }
    Ok(())
}

/// Balanced ±1 sequence of length `n` in random order.
pub fn balanced_labels<R: Rng>(n: usize, rng: &mut R) -> Vec<Label> {
    let mut labels: Vec<Label> = (0..n)
        .map(|i| if i < n / 2 { Label::Positive } else { Label::Negative })
        .collect();
    if n % 2 == 1 && rng.gen_bool(0.5) {
        labels[n - 1] = Label::Positive;
        labels[0] = Label::Negative;
    }
    labels.shuffle(rng);
    labels
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ds1Spec {
    /// Samples per task.
    pub n: usize,
    /// Deviation of task 2, in `[0, 1)`.
    pub r: f64,
    pub noise_sd: f64,
    pub seed: u64,
    /// Window count.
    pub m: usize,
}

impl Default for Ds1Spec {
    fn default() -> Self {
        Ds1Spec {
            n: 500,
            r: 0.05,
            noise_sd: 0.1,
            seed: 0,
            m: 25,
        }
    }
}

impl Ds1Spec {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.r) {
            return Err(Error::input(format!("r must lie in [0, 1), got {}", self.r)));
        }
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) {
            return Err(Error::input(format!(
                "noise_sd must be >= 0, got {}",
                self.noise_sd
            )));
        }
        check_windowing(self.n, self.m)
    }
}

/// Noise-free sliding-sine point for sample `t` of `n`.
pub fn ds1_point(t: usize, n: usize, r: f64, label: Label) -> [f64; 2] {
    let angle = 2.0 * t as f64 * PI / n as f64 - PI + 0.2 * label.sign();
    [angle, (1.0 - r) * angle.sin()]
}

fn sliding_task(
    task: usize,
    r: f64,
    spec: &Ds1Spec,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Sample>> {
    let labels = balanced_labels(spec.n, rng);
    let noise = Normal::new(0.0, spec.noise_sd)
        .map_err(|e| Error::input(format!("noise_sd: {e}")))?;
    Ok(labels
        .into_iter()
        .enumerate()
        .map(|(i, label)| {
            let t = i + 1;
            let [a, b] = ds1_point(t, spec.n, r, label);
            let (e1, e2) = (noise.sample(rng), noise.sample(rng));
            Sample::new(vec![a + e1, b + e2], label, task, time_of(t, spec.n, spec.m))
        })
        .collect())
}

/// Two-task sliding-sine stream: task 1 with `r = 0`, task 2 with `spec.r`.
pub fn gen_ds1(spec: &Ds1Spec) -> Result<MultiTaskStream> {
    spec.validate()?;
    let mut samples = sliding_task(1, 0.0, spec, &mut rng_for(spec.seed, 1))?;
    samples.extend(sliding_task(2, spec.r, spec, &mut rng_for(spec.seed, 2))?);
    sort_time_major(&mut samples);
    MultiTaskStream::new(samples, 2, spec.m)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperplaneSpec {
    /// Samples per task.
    pub n: usize,
    pub d: usize,
    /// Rotation of the normal over the whole stream, radians.
    pub total_rotation: f64,
    /// Angle between the two tasks' normals, degrees.
    pub offset_deg: f64,
    /// Points closer than this to either task's hyperplane are redrawn.
    pub margin_exclusion: f64,
    pub seed: u64,
    pub m: usize,
}

impl Default for HyperplaneSpec {
    fn default() -> Self {
        HyperplaneSpec {
            n: 500,
            d: 2,
            total_rotation: PI / 2.0,
            offset_deg: 2.0,
            margin_exclusion: 0.0,
            seed: 0,
            m: 25,
        }
    }
}

impl HyperplaneSpec {
    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(Error::input(format!("d must be >= 2, got {}", self.d)));
        }
        if !self.total_rotation.is_finite() || !self.offset_deg.is_finite() {
            return Err(Error::input("rotation angles must be finite"));
        }
        if !(0.0..0.5).contains(&self.margin_exclusion) {
            return Err(Error::input(format!(
                "margin_exclusion must lie in [0, 0.5), got {}",
                self.margin_exclusion
            )));
        }
        check_windowing(self.n, self.m)
    }
}

/// Unit normal `(cos θ, sin θ, 0, …)`.
pub fn hyperplane_normal(theta: f64, d: usize) -> Vec<f64> {
    let mut v = vec![0.0; d];
    v[0] = theta.cos();
    v[1] = theta.sin();
    v
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `sign(normal · x)` with zero mapped to `+1`.
pub fn hyperplane_label(normal: &[f64], x: &[f64]) -> Label {
    Label::from_score(dot(normal, x))
}

/// Two-task rotating hyperplane stream sharing point draws across tasks.
pub fn gen_rotating_hyperplane(spec: &HyperplaneSpec) -> Result<MultiTaskStream> {
    spec.validate()?;
    let mut rng = rng_for(spec.seed, 0);
    let offset = spec.offset_deg.to_radians();
    let mut samples = Vec::with_capacity(2 * spec.n);
    for t in 1..=spec.n {
        let theta = t as f64 / spec.n as f64 * spec.total_rotation;
        let n1 = hyperplane_normal(theta, spec.d);
        let n2 = hyperplane_normal(theta + offset, spec.d);
        let x = loop {
            let x: Vec<f64> = (0..spec.d).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            if dot(&n1, &x).abs() >= spec.margin_exclusion
                && dot(&n2, &x).abs() >= spec.margin_exclusion
            {
                break x;
            }
        };
        let time = time_of(t, spec.n, spec.m);
        samples.push(Sample::new(x.clone(), hyperplane_label(&n1, &x), 1, time));
        samples.push(Sample::new(x.clone(), hyperplane_label(&n2, &x), 2, time));
    }
    sort_time_major(&mut samples);
    MultiTaskStream::new(samples, 2, spec.m)
}

/// Flips each label independently with probability `p`.
pub fn inject_label_noise(stream: &MultiTaskStream, p: f64, seed: u64) -> Result<MultiTaskStream> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::input(format!("flip probability must lie in [0, 1], got {p}")));
    }
    let mut rng = rng_for(seed, 7);
    let samples = stream
        .samples()
        .iter()
        .map(|s| {
            let flip = rng.gen_bool(p);
            Sample {
                label: if flip { s.label.flipped() } else { s.label },
                ..s.clone()
            }
        })
        .collect();
    MultiTaskStream::new(samples, stream.k(), stream.m())
}

/// Keeps every other sample within each (task, window) cell, preserving
/// order. The seed picks whether the first or second sample of each cell
/// is kept.
pub fn halve_stream(stream: &MultiTaskStream, seed: u64) -> Result<MultiTaskStream> {
    let counts = stream.cell_counts();
    for (t, row) in counts.iter().enumerate() {
        for (task, &c) in row.iter().enumerate() {
            if c < 2 {
                return Err(Error::input(format!(
                    "cannot halve: task {} window {} has {c} sample(s)",
                    task + 1,
                    t + 1
                )));
            }
        }
    }
    let phase = rng_for(seed, 11).gen_range(0..2usize);
    let mut seen = vec![0usize; stream.k() * stream.m()];
    let samples = stream
        .samples()
        .iter()
        .filter(|s| {
            let cell = stream.k() * (s.time - 1) + s.task - 1;
            let idx = seen[cell];
            seen[cell] += 1;
            idx % 2 == phase
        })
        .cloned()
        .collect();
    MultiTaskStream::new(samples, stream.k(), stream.m())
}

/// Which base generator a synthetic experiment draws from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case")]
pub enum BaseGenerator {
    SlidingSine(Ds1Spec),
    RotatingHyperplane(HyperplaneSpec),
}

/// A base generator plus the optional label-noise and halving transforms.
///
/// The named streams DS1 to DS5 are presets of this type.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub base: BaseGenerator,
    /// Label flip probability applied after generation.
    pub label_noise: f64,
    /// Halve training and validation streams (data scarcity).
    pub halve: bool,
}

impl SyntheticSpec {
    pub fn ds1(r: f64) -> Self {
        SyntheticSpec {
            base: BaseGenerator::SlidingSine(Ds1Spec {
                r,
                ..Default::default()
            }),
            label_noise: 0.0,
            halve: false,
        }
    }

    pub fn ds2(offset_deg: f64) -> Self {
        SyntheticSpec {
            base: BaseGenerator::RotatingHyperplane(HyperplaneSpec {
                offset_deg,
                ..Default::default()
            }),
            label_noise: 0.0,
            halve: false,
        }
    }

    pub fn ds3(offset_deg: f64) -> Self {
        SyntheticSpec {
            halve: true,
            ..Self::ds2(offset_deg)
        }
    }

    pub fn ds4(r: f64) -> Self {
        SyntheticSpec {
            label_noise: 0.1,
            ..Self::ds1(r)
        }
    }

    pub fn ds5(offset_deg: f64) -> Self {
        SyntheticSpec {
            label_noise: 0.1,
            ..Self::ds2(offset_deg)
        }
    }

    pub fn validate(&self) -> Result<()> {
        match &self.base {
            BaseGenerator::SlidingSine(s) => s.validate()?,
            BaseGenerator::RotatingHyperplane(s) => s.validate()?,
        }
        if !(0.0..=1.0).contains(&self.label_noise) {
            return Err(Error::input("label_noise must lie in [0, 1]"));
        }
        Ok(())
    }

    /// Draws one stream. `scarce` applies halving when the spec asks for it.
    pub fn generate(&self, seed: u64, scarce: bool) -> Result<MultiTaskStream> {
        let stream = match self.base {
            BaseGenerator::SlidingSine(s) => gen_ds1(&Ds1Spec { seed, ..s })?,
            BaseGenerator::RotatingHyperplane(s) => {
                gen_rotating_hyperplane(&HyperplaneSpec { seed, ..s })?
            }
        };
        let stream = if self.label_noise > 0.0 {
            inject_label_noise(&stream, self.label_noise, seed)?
        } else {
            stream
        };
        if scarce && self.halve {
            halve_stream(&stream, seed)
        } else {
            Ok(stream)
        }
    }

    pub fn set_samples_per_task(&mut self, n: usize) {
        match &mut self.base {
            BaseGenerator::SlidingSine(s) => s.n = n,
            BaseGenerator::RotatingHyperplane(s) => s.n = n,
        }
    }

    pub fn set_windows(&mut self, m: usize) {
        match &mut self.base {
            BaseGenerator::SlidingSine(s) => s.m = m,
            BaseGenerator::RotatingHyperplane(s) => s.m = m,
        }
    }
}
