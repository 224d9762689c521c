//! Empirical potential per window and its deviation from the best-fitting parabola.
//!
//! `cargo run --release --example potential_surface`

use tipwell::dynamics::{simulate_snf, SnfParams};
use tipwell::estimators::{potential_surface, StepSpec, TrackConfig};

fn main() -> tipwell::Result<()> {
    let ts = simulate_snf(&SnfParams::stationary(2.0, 0.7, 0.1, 1500, 3))?.trim_escape();
    let config = TrackConfig {
        step: StepSpec::FractionOfWindow(0.25),
        ..TrackConfig::default()
    };
    let surface = potential_surface(&ts, &config)?;
    println!("{} columns on a {}-point state grid", surface.columns.len(), surface.state_grid.len());
    for col in &surface.columns {
        let Some(profile) = &col.profile else {
            println!("t={:6.1}  masked", col.t_center);
            continue;
        };
        let worst = profile.deviation.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
        println!(
            "t={:6.1}  curvature {:.3}  max deviation from parabola {:.4}",
            col.t_center,
            2.0 * profile.parabola[2],
            worst
        );
    }
    Ok(())
}
