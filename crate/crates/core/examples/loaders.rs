//! Parsing the three real-world dataset formats, shown on tiny inline
//! samples. Point `dcsvm bench prequential --source ... --data-dir DIR` at
//! the real files to run the full experiments.
//!
//! `cargo run --release --example loaders`

use std::io::Cursor;

use dcsvm::streams::loaders::calibrate_water_threshold;
use dcsvm::streams::{
    load_air_quality, load_gsadd, load_water_quality, read_gas_records, read_water_records, GasConfig,
};

fn main() -> dcsvm::Result<()> {
    // Gas sensor array: `gas;concentration idx:value ...`, one file per batch.
    let batch1 = "2;50.0 1:0.9 2:1.2\n3;25.0 1:0.1 2:3.4\n1;10.0 1:0.0 2:0.0\n";
    let batch2 = "3;40.0 1:0.2 2:3.1\n2;20.0 1:1.1 2:1.0\n";
    let records = read_gas_records([Cursor::new(batch1), Cursor::new(batch2)])?;
    let gas = load_gsadd(
        &records,
        &GasConfig {
            batch_size: 2,
            batches: 2,
            ..GasConfig::task1()
        },
    )?;
    println!("gas: {} records read, {} kept in {} batches", records.len(), gas.len(), gas.m());

    // Weekly water-quality report: year, week, four indicators, two grades.
    let water = "year,week,pH,DO,CODMn,NH3-N,grade,previous\n\
                 2004,1,7.5,9.1,3.2,0.21,II,III\n2004,2,7.4,8.7,3.9,0.35,4,2\n\
                 2004,3,7.6,8.9,3.1,0.18,III,4\n2004,4,7.3,6.2,5.0,0.90,劣V,III\n";
    let records = read_water_records(water.as_bytes())?;
    let threshold = calibrate_water_threshold(&records, 2).expect("a cut gives two positives");
    let stream = load_water_quality(&records, threshold, 2)?;
    println!("water: threshold {threshold}, {} weeks in {} batches", stream.len(), stream.m());

    // Hourly air quality: `;`-separated, decimal commas, -200 marks a gap.
    let header = "Date;Time;CO(GT);PT08.S1(CO);NMHC(GT);C6H6(GT);PT08.S2(NMHC);NOx(GT);PT08.S3(NOx);NO2(GT);PT08.S4(NO2);PT08.S5(O3);T;RH;AH;;";
    let rows = [
        "10/03/2004;18.00.00;2,6;1360;150;11,9;1046;166;1056;113;1692;1268;13,6;48,9;0,7578;;",
        "10/03/2004;19.00.00;2;1292;112;9,4;955;103;1174;92;1559;972;-200;47,7;0,7255;;",
        "10/03/2004;20.00.00;2,2;1402;88;9,0;939;131;1140;114;1555;1074;11,6;54,0;0,7502;;",
        "10/03/2004;21.00.00;2,2;1376;80;9,2;948;172;1092;122;1584;1203;11,0;60,0;0,7867;;",
    ];
    let text = format!("{header}\n{}\n", rows.join("\n"));
    let air = load_air_quality(text.as_bytes(), 2)?;
    println!(
        "air: {} rows, {} gap(s) interpolated, T at 19:00 = {}",
        air.rows, air.interpolated, air.benzene.samples()[1].features[4]
    );
    Ok(())
}
