//! Simulate a slowly drifting saddle-node normal form until it escapes, next to an
//! Ornstein-Uhlenbeck series with the same initial decay rate.
//!
//! `cargo run --example simulate`

use tipwell::dynamics::{simulate_linear, simulate_snf, SnfParams};

fn main() -> tipwell::Result<()> {
    let params = SnfParams {
        mu0: 2.0,
        epsilon: 0.01,
        sigma: 1.0,
        dt: 0.1,
        n_max: 1223,
        x0: 2f64.sqrt(),
        escape_level: -1.0,
        seed: 7,
    };
    let snf = simulate_snf(&params)?;
    match snf.censored() {
        Some(c) => println!("escaped at t = {:.1} after {} samples", snf.times()[c.index], snf.len()),
        None => println!("no escape within {} samples", snf.len()),
    }

    let ou = simulate_linear(2.0 * params.mu0.sqrt(), params.sigma, params.dt, 1223, 7)?;
    let v = ou.values();
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
    println!("linear series: variance {var:.4} (stationary value {:.4})", 1.0 / (4.0 * params.mu0.sqrt()));
    Ok(())
}
