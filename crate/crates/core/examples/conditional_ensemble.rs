//! Skewness of the not-yet-escaped ensemble as mu shrinks toward the fold.
//! Deeper kill levels keep more of the escaping tail and deepen the dip.
//!
//! `cargo run --release --example conditional_ensemble`

use tipwell::dynamics::{conditional_ensemble, EnsembleParams};

fn main() -> tipwell::Result<()> {
    let mus = [0.1, 0.35, 0.75, 1.0, 1.5, 3.0];
    for b in [0.5, 2.0] {
        print!("b = {b}:");
        for (i, &mu) in mus.iter().enumerate() {
            let r = conditional_ensemble(&EnsembleParams::new(5000, mu, 1.0, b, i as u64))?;
            print!("  mu {mu} -> {:.3}", r.skewness);
        }
        println!();
    }
    Ok(())
}
