//! Sliding-window indicators for a series drifting toward a fold.
//!
//! `cargo run --release --example indicator_track`

use tipwell::dynamics::{simulate_snf, SnfParams};
use tipwell::estimators::{indicator_track, track_drift_ratio, Indicator, StepSpec, TrackConfig};

fn main() -> tipwell::Result<()> {
    let params = SnfParams {
        epsilon: 0.0005,
        n_max: 2000,
        ..SnfParams::stationary(1.5, 0.5, 0.1, 2000, 11)
    };
    let ts = simulate_snf(&params)?.trim_escape();
    let config = TrackConfig {
        step: StepSpec::FractionOfWindow(0.125),
        ..TrackConfig::default()
    };
    let track = indicator_track(&ts, &config)?;
    println!("{} samples, window {}, step {}", ts.len(), track.window_len, track.step);
    for w in track.indicators() {
        println!(
            "t={:6.1}  kappa_acf={}  kappa_u={:.3}  c_emp={:+.4}  N2={:+.3}  gamma={:+.3}",
            w.t_center,
            w.kappa_acf.map_or("  n/a".into(), |k| format!("{k:.3}")),
            w.kappa_u,
            w.c_emp,
            w.n2,
            w.gamma
        );
    }
    for ind in Indicator::NONLINEAR {
        println!("mean {ind}: {:?}", track.mean(ind));
    }
    println!("drift ratio: {:?}", track_drift_ratio(&track)?);
    Ok(())
}
