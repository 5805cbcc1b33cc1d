//! Readers for the three real-world drift datasets.
//!
//! None of the data files ship with the crate; these functions only parse
//! the published formats, binarize the targets, and cut each series into
//! chronological batches (one batch per time window).

use std::io::{BufRead, Read};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernelcore::{Label, MultiTaskStream, Sample};

/// Assigns 1-based window indices to `n` chronologically ordered samples.
///
/// The first `batches − 1` windows hold `batch_size` samples each and the
/// last window takes everything left. Without an explicit count,
/// `⌊n / batch_size⌋` batches are used.
pub fn batch_windows(n: usize, batch_size: usize, batches: Option<usize>) -> Result<(Vec<usize>, usize)> {
    if batch_size == 0 {
        return Err(Error::input("batch_size must be positive"));
    }
    let m = batches.unwrap_or(n / batch_size);
    if m == 0 || n < (m - 1) * batch_size + 1 {
        return Err(Error::input(format!(
            "{n} samples cannot fill {m} batches of {batch_size}"
        )));
    }
    let times = (0..n).map(|i| (i / batch_size + 1).min(m)).collect();
    Ok((times, m))
}

fn windowed_stream(rows: Vec<(Vec<f64>, Label)>, batch_size: usize, batches: Option<usize>) -> Result<MultiTaskStream> {
    let (times, m) = batch_windows(rows.len(), batch_size, batches)?;
    let samples = rows
        .into_iter()
        .zip(times)
        .map(|((x, y), t)| Sample::new(x, y, 1, t))
        .collect();
    MultiTaskStream::new(samples, 1, m)
}

/// Z-scores each feature using statistics of `reference`.
pub fn standardize(stream: &MultiTaskStream, reference: &MultiTaskStream) -> Result<MultiTaskStream> {
    if stream.d() != reference.d() {
        return Err(Error::input("standardize: dimension mismatch"));
    }
    let d = reference.d();
    let n = reference.len() as f64;
    let mut mean = vec![0.0; d];
    for s in reference.samples() {
        for (m, v) in mean.iter_mut().zip(&s.features) {
            *m += v / n;
        }
    }
    let mut sd = vec![0.0; d];
    for s in reference.samples() {
        for ((acc, v), m) in sd.iter_mut().zip(&s.features).zip(&mean) {
            *acc += (v - m) * (v - m) / n;
        }
    }
    let sd: Vec<f64> = sd.into_iter().map(|v| if v > 0.0 { v.sqrt() } else { 1.0 }).collect();
    let samples = stream
        .samples()
        .iter()
        .map(|s| Sample {
            features: s
                .features
                .iter()
                .zip(&mean)
                .zip(&sd)
                .map(|((v, m), sd)| (v - m) / sd)
                .collect(),
            ..s.clone()
        })
        .collect();
    MultiTaskStream::new(samples, stream.k(), stream.m())
}

// ---------------------------------------------------------------------------
// Gas sensor array drift

/// Gas class codes used by the gas sensor array drift files.
pub mod gas {
    pub const ETHANOL: u32 = 1;
    pub const ETHYLENE: u32 = 2;
    pub const AMMONIA: u32 = 3;
    pub const ACETALDEHYDE: u32 = 4;
    pub const ACETONE: u32 = 5;
    pub const TOLUENE: u32 = 6;
}

#[derive(Debug, Clone, PartialEq)]
pub struct GasRecord {
    pub gas: u32,
    pub concentration: Option<f64>,
    pub features: Vec<f64>,
}

/// Parses one `gas[;concentration] idx:value idx:value ...` record.
pub fn parse_gas_record(line: &str, line_no: usize) -> Result<GasRecord> {
    let err = |msg: String| Error::input(format!("line {line_no}: {msg}"));
    let mut tokens = line.split_whitespace();
    let head = tokens.next().ok_or_else(|| err("empty record".into()))?;
    let (gas_str, conc) = match head.split_once(';') {
        Some((g, c)) => {
            let c = c
                .parse::<f64>()
                .map_err(|_| err(format!("bad concentration {c:?}")))?;
            (g, Some(c))
        }
        None => (head, None),
    };
    let gas = gas_str
        .parse::<u32>()
        .map_err(|_| err(format!("bad gas code {gas_str:?}")))?;
    if !(gas::ETHANOL..=gas::TOLUENE).contains(&gas) {
        return Err(err(format!("unknown gas code {gas}")));
    }
    let mut features: Vec<Option<f64>> = Vec::new();
    for tok in tokens {
        let (idx, val) = tok
            .split_once(':')
            .ok_or_else(|| err(format!("expected index:value, got {tok:?}")))?;
        let idx: usize = idx
            .parse()
            .map_err(|_| err(format!("bad feature index {idx:?}")))?;
        let val: f64 = val
            .parse()
            .map_err(|_| err(format!("bad feature value {val:?}")))?;
        if idx == 0 {
            return Err(err("feature indices are 1-based".into()));
        }
        if features.len() < idx {
            features.resize(idx, None);
        }
        if features[idx - 1].replace(val).is_some() {
            return Err(err(format!("duplicate feature index {idx}")));
        }
    }
    if features.is_empty() {
        return Err(err("record has no features".into()));
    }
    Ok(GasRecord {
        gas,
        concentration: conc,
        features: features.into_iter().map(|v| v.unwrap_or(0.0)).collect(),
    })
}

/// Reads records from the batch files in chronological order.
pub fn read_gas_records<R: BufRead>(files: impl IntoIterator<Item = R>) -> Result<Vec<GasRecord>> {
    let mut out = Vec::new();
    for (f, reader) in files.into_iter().enumerate() {
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            out.push(
                parse_gas_record(&line, i + 1)
                    .map_err(|e| Error::input(format!("file {}: {e}", f + 1)))?,
            );
        }
    }
    let d = out.iter().map(|r| r.features.len()).max().unwrap_or(0);
    for r in &mut out {
        r.features.resize(d, 0.0);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GasConfig {
    pub positive_gas: u32,
    pub negative_gas: u32,
    /// 1-based inclusive range of positive-class ordinals to discard.
    pub drop_range: Option<(usize, usize)>,
    pub batch_size: usize,
    pub batches: usize,
}

impl GasConfig {
    pub fn new(positive_gas: u32, negative_gas: u32) -> Self {
        GasConfig {
            positive_gas,
            negative_gas,
            drop_range: None,
            batch_size: 180,
            batches: 25,
        }
    }

    /// Ammonia vs ethylene.
    pub fn task1() -> Self {
        Self::new(gas::AMMONIA, gas::ETHYLENE)
    }

    /// Acetaldehyde vs ethylene, with positives 2100..=2460 removed.
    pub fn task2() -> Self {
        GasConfig {
            drop_range: Some((2100, 2460)),
            ..Self::new(gas::ACETALDEHYDE, gas::ETHYLENE)
        }
    }
}

/// Builds one binary single-task stream from gas records.
pub fn load_gsadd(records: &[GasRecord], cfg: &GasConfig) -> Result<MultiTaskStream> {
    for code in [cfg.positive_gas, cfg.negative_gas] {
        if !(gas::ETHANOL..=gas::TOLUENE).contains(&code) {
            return Err(Error::input(format!("unknown gas code {code}")));
        }
    }
    if cfg.positive_gas == cfg.negative_gas {
        return Err(Error::input("positive and negative gas must differ"));
    }
    let mut positive_ordinal = 0usize;
    let rows: Vec<(Vec<f64>, Label)> = records
        .iter()
        .filter_map(|r| {
            if r.gas == cfg.positive_gas {
                positive_ordinal += 1;
                let dropped = cfg
                    .drop_range
                    .is_some_and(|(a, b)| (a..=b).contains(&positive_ordinal));
                (!dropped).then(|| (r.features.clone(), Label::Positive))
            } else if r.gas == cfg.negative_gas {
                Some((r.features.clone(), Label::Negative))
            } else {
                None
            }
        })
        .collect();
    if rows.is_empty() {
        return Err(Error::input("no records match the selected gases"));
    }
    windowed_stream(rows, cfg.batch_size, Some(cfg.batches))
}

// ---------------------------------------------------------------------------
// Water quality

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaterRecord {
    pub year: i32,
    pub week: u32,
    pub ph: f64,
    pub dissolved_oxygen: f64,
    pub cod_mn: f64,
    pub nh3_n: f64,
    pub grade: u8,
    pub previous_grade: u8,
}

/// Grade threshold applied when no calibrated value is configured.
pub const DEFAULT_WATER_THRESHOLD: u8 = 3;

/// Parses a water-quality grade: `1`–`6` or roman `I`–`VI` (`劣V` is 6).
pub fn parse_grade(s: &str) -> Option<u8> {
    let s = s.trim();
    if let Ok(v) = s.parse::<u8>() {
        return (1..=6).contains(&v).then_some(v);
    }
    match s.to_ascii_uppercase().as_str() {
        "I" => Some(1),
        "II" => Some(2),
        "III" => Some(3),
        "IV" => Some(4),
        "V" => Some(5),
        "VI" => Some(6),
        _ if s == "劣V" || s == "劣Ⅴ" => Some(6),
        _ => None,
    }
}

/// Reads the 8-column weekly report CSV (optional header row).
pub fn read_water_records<R: Read>(reader: R) -> Result<Vec<WaterRecord>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 1;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        if i == 0 && rec.get(0).is_some_and(|f| f.parse::<f64>().is_err()) {
            continue;
        }
        if rec.len() < 8 {
            return Err(Error::input(format!("line {line}: expected 8 fields, found {}", rec.len())));
        }
        let num = |j: usize| -> Result<f64> {
            rec[j]
                .parse::<f64>()
                .map_err(|_| Error::input(format!("line {line}: bad number {:?}", &rec[j])))
        };
        let grade = |j: usize| -> Result<u8> {
            parse_grade(&rec[j])
                .ok_or_else(|| Error::input(format!("line {line}: unparseable grade {:?}", &rec[j])))
        };
        out.push(WaterRecord {
            year: num(0)? as i32,
            week: num(1)? as u32,
            ph: num(2)?,
            dissolved_oxygen: num(3)?,
            cod_mn: num(4)?,
            nh3_n: num(5)?,
            grade: grade(6)?,
            previous_grade: grade(7)?,
        });
    }
    Ok(out)
}

/// Smallest threshold whose positive count (`grade ≤ threshold`) equals
/// `positives`, if any.
pub fn calibrate_water_threshold(records: &[WaterRecord], positives: usize) -> Option<u8> {
    (0..=6).find(|&t| records.iter().filter(|r| r.grade <= t).count() == positives)
}

/// Four indicators as features, `+1` iff `grade ≤ threshold`, batches of
/// `batch_size` weeks.
pub fn load_water_quality(records: &[WaterRecord], threshold: u8, batch_size: usize) -> Result<MultiTaskStream> {
    if records.is_empty() {
        return Err(Error::input("no water-quality records"));
    }
    let rows = records
        .iter()
        .map(|r| {
            let label = if r.grade <= threshold {
                Label::Positive
            } else {
                Label::Negative
            };
            (vec![r.ph, r.dissolved_oxygen, r.cod_mn, r.nh3_n], label)
        })
        .collect();
    windowed_stream(rows, batch_size, None)
}

// ---------------------------------------------------------------------------
// Air quality

/// Missing-value sentinel in the air-quality file.
pub const AIR_MISSING: f64 = -200.0;

/// Attributes kept from the air-quality file, in feature order; the two
/// targets are pulled out of this list.
pub const AIR_ATTRIBUTES: [&str; 9] = [
    "PT08.S1(CO)",
    "C6H6(GT)",
    "PT08.S2(NMHC)",
    "PT08.S3(NOx)",
    "PT08.S4(NO2)",
    "PT08.S5(O3)",
    "T",
    "RH",
    "AH",
];
const AIR_TARGETS: [&str; 2] = ["C6H6(GT)", "PT08.S2(NMHC)"];

#[derive(Debug, Clone, PartialEq)]
pub struct AirQuality {
    /// Target C6H6(GT), High = strictly above its mean.
    pub benzene: MultiTaskStream,
    /// Target PT08.S2(NMHC).
    pub nmhc_sensor: MultiTaskStream,
    /// Number of cells filled by interpolation.
    pub interpolated: usize,
    pub rows: usize,
}

/// Replaces each missing entry (`None`) by the mean of the nearest observed
/// values before and after it.
pub fn interpolate_missing(column: &mut [Option<f64>], name: &str) -> Result<usize> {
    let n = column.len();
    let mut prev: Vec<Option<f64>> = vec![None; n];
    let mut last = None;
    for i in 0..n {
        prev[i] = last;
        if column[i].is_some() {
            last = column[i];
        }
    }
    let mut next = None;
    let mut filled = 0;
    for i in (0..n).rev() {
        match column[i] {
            Some(v) => next = Some(v),
            None => {
                let (Some(p), Some(q)) = (prev[i], next) else {
                    return Err(Error::input(format!(
                        "{name}: missing value at row {} has no neighbour on both sides",
                        i + 1
                    )));
                };
                column[i] = Some((p + q) / 2.0);
                filled += 1;
            }
        }
    }
    Ok(filled)
}

fn parse_air_number(s: &str) -> Option<f64> {
    s.trim().replace(',', ".").parse::<f64>().ok()
}

/// Reads the hourly air-quality file (`;`-separated with decimal commas, or
/// plain `,`-separated), fills gaps, and builds the two target streams.
pub fn load_air_quality<R: Read>(reader: R, batch_size: usize) -> Result<AirQuality> {
    let mut text = String::new();
    let mut reader = reader;
    reader.read_to_string(&mut text)?;
    let first = text.lines().next().ok_or_else(|| Error::input("empty air-quality file"))?;
    let delim = if first.contains(';') { b';' } else { b',' };
    let mut r = csv::ReaderBuilder::new()
        .delimiter(delim)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = r.headers()?.clone();
    let cols: Vec<usize> = AIR_ATTRIBUTES
        .iter()
        .map(|name| {
            header
                .iter()
                .position(|h| h == *name)
                .ok_or_else(|| Error::input(format!("air-quality header lacks column {name}")))
        })
        .collect::<Result<_>>()?;

    let mut columns: Vec<Vec<Option<f64>>> = vec![Vec::new(); cols.len()];
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        for (c, &j) in cols.iter().enumerate() {
            let raw = rec.get(j).unwrap_or("");
            let v = parse_air_number(raw).ok_or_else(|| {
                Error::input(format!("line {}: bad value {raw:?} in {}", i + 2, AIR_ATTRIBUTES[c]))
            })?;
            columns[c].push((v != AIR_MISSING).then_some(v));
        }
    }
    let rows = columns[0].len();
    if rows == 0 {
        return Err(Error::input("air-quality file has no data rows"));
    }
    let mut interpolated = 0;
    for (c, col) in columns.iter_mut().enumerate() {
        interpolated += interpolate_missing(col, AIR_ATTRIBUTES[c])?;
    }
    let columns: Vec<Vec<f64>> = columns
        .into_iter()
        .map(|c| c.into_iter().map(|v| v.expect("filled")).collect())
        .collect();

    let target_idx: Vec<usize> = AIR_TARGETS
        .iter()
        .map(|t| AIR_ATTRIBUTES.iter().position(|a| a == t).expect("target listed"))
        .collect();
    let inputs: Vec<usize> = (0..AIR_ATTRIBUTES.len())
        .filter(|c| !target_idx.contains(c))
        .collect();
    let features: Vec<Vec<f64>> = (0..rows)
        .map(|i| inputs.iter().map(|&c| columns[c][i]).collect())
        .collect();

    let mut streams = target_idx.iter().map(|&t| {
        let col = &columns[t];
        let mean = col.iter().sum::<f64>() / rows as f64;
        let rows: Vec<(Vec<f64>, Label)> = features
            .iter()
            .zip(col)
            .map(|(x, &v)| (x.clone(), if v > mean { Label::Positive } else { Label::Negative }))
            .collect();
        windowed_stream(rows, batch_size, None)
    });
    let benzene = streams.next().expect("two targets")?;
    let nmhc_sensor = streams.next().expect("two targets")?;
    Ok(AirQuality {
        benzene,
        nmhc_sensor,
        interpolated,
        rows,
    })
}
