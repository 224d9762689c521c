//! Read an unevenly sampled record given in years before present, put it on a
//! uniform forward-time grid, and analyze it.
//!
//! `cargo run --release --example ingest_record [path.csv]`
//!
//! Without a path a synthetic semicolon-separated record is written to the temp dir.

use std::path::PathBuf;

use tipwell::dynamics::simulate_linear;
use tipwell::estimators::{indicator_track, Indicator, StepSpec, TrackConfig};
use tipwell::pipeline::{ingest, ColumnRef, RecordSpec, TimeDirection};

fn synthetic_record() -> std::io::Result<PathBuf> {
    let ou = simulate_linear(1.5, 1.0, 1.0, 800, 4).expect("valid parameters");
    let mut text = String::from("age_bp;depth;proxy\n");
    let mut age = 20_000.0;
    for (i, v) in ou.values().iter().enumerate() {
        // jittered spacing, newest sample last
        age -= 20.0 + 10.0 * ((i * 7919) % 13) as f64 / 13.0;
        text.push_str(&format!("{age:.1};{};{v}\n", i * 3));
    }
    let path = std::env::temp_dir().join("tipwell_synthetic_record.csv");
    std::fs::write(&path, text)?;
    Ok(path)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = match std::env::args().nth(1) {
        Some(p) => PathBuf::from(p),
        None => synthetic_record()?,
    };
    let spec = RecordSpec {
        time_column: ColumnRef::Index(0),
        value_column: ColumnRef::parse("proxy"),
        direction: TimeDirection::YearsBeforePresent,
        ..RecordSpec::new(&path)
    };
    let rec = ingest(&spec)?;
    let p = &rec.provenance;
    println!(
        "{}: {} rows, delimiter {:?}, resampled to dt={:.2} ({} samples, {} interpolated)",
        path.display(),
        p.raw_rows,
        p.delimiter as char,
        p.resample_dt,
        p.output_len,
        p.interpolated
    );
    let config = TrackConfig {
        step: StepSpec::FractionOfWindow(0.125),
        ..TrackConfig::default()
    };
    let track = indicator_track(&rec.series, &config)?;
    for ind in Indicator::ALL {
        println!("mean {ind}: {:?}", track.mean(ind));
    }
    Ok(())
}
