//! Percentiles of the surrogate test over window length and detrending bandwidth,
//! with contour segments at the exported levels.
//!
//! `cargo run --release --example sensitivity_scan`

use tipwell::dynamics::{simulate_snf, SnfParams};
use tipwell::estimators::Indicator;
use tipwell::significance::{contour_segments, log2_spaced, sensitivity_scan, ScanConfig, SurrogateConfig};

fn main() -> tipwell::Result<()> {
    let ts = simulate_snf(&SnfParams::stationary(2.0, 1.0, 0.05, 1200, 21))?.trim_escape();
    let config = ScanConfig {
        window_fractions: log2_spaced(-2.0, 0.0, 3),
        bandwidth_fractions: log2_spaced(-5.0, -2.0, 3),
        surrogate: SurrogateConfig {
            n_surrogates: 40,
            seed: 2,
            ..SurrogateConfig::default()
        },
    };
    let grid = sensitivity_scan(&ts, &config)?;
    for ind in Indicator::NONLINEAR {
        println!("{ind} (rows: bandwidth fraction, columns: window fraction)");
        for (bw, row) in grid.bandwidth_fractions.iter().zip(grid.matrix(ind).unwrap()) {
            let cells: Vec<String> = row
                .iter()
                .map(|p| p.map_or("  n/a".into(), |p| format!("{p:5.1}")))
                .collect();
            println!("  {bw:<8.4} {}", cells.join(" "));
        }
        println!("  {} segments on the 90% contour", contour_segments(&grid, ind, 90.0).len());
    }
    Ok(())
}
