//! Stationary density of the noisy normal form with constant escape flux, swept over mu.
//!
//! `cargo run --example fokker_planck`

use tipwell::dynamics::{fp_ode_residual, stationary_fp_solve, FpGrid};

fn main() -> tipwell::Result<()> {
    println!("{:>5} {:>11} {:>8} {:>8} {:>8} {:>9}", "mu", "c", "mean", "var", "skew", "residual");
    for i in 0..9 {
        let mu = 0.25 + 0.5 * i as f64;
        let sol = stationary_fp_solve(mu, 1.0, FpGrid::default())?;
        println!(
            "{mu:>5.2} {:>11.3e} {:>8.4} {:>8.4} {:>8.4} {:>9.1e}",
            sol.c,
            sol.mean,
            sol.variance,
            sol.skewness,
            fp_ode_residual(&sol)
        );
    }
    Ok(())
}
