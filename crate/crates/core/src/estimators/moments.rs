use crate::error::{invalid, Error, Result};
use crate::estimators::kde::trapezoid;
use crate::estimators::Density;

/// Trapezoid moments of a gridded density, normalized by its mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mass: f64,
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
}

pub fn density_moments(d: &Density) -> Result<Moments> {
    let mass = d.mass();
    if !(mass > 0.0) {
        return Err(invalid("density", "zero mass"));
    }
    let weighted = |f: &dyn Fn(f64) -> f64| {
        let y: Vec<f64> = d.grid.iter().zip(&d.p).map(|(&x, &p)| f(x) * p).collect();
        trapezoid(&d.grid, &y) / mass
    };
    let mean = weighted(&|x| x);
    let variance = weighted(&|x| (x - mean).powi(2));
    if !(variance > 0.0) {
        return Err(Error::ZeroVariance("density"));
    }
    let m3 = weighted(&|x| (x - mean).powi(3));
    Ok(Moments {
        mass,
        mean,
        variance,
        skewness: m3 / variance.powf(1.5),
    })
}

/// Third standardized moment of the gridded density.
pub fn skewness(d: &Density) -> Result<f64> {
    density_moments(d).map(|m| m.skewness)
}

/// Biased sample skewness `m3 / m2^(3/2)`.
pub fn sample_skewness(samples: &[f64]) -> Result<f64> {
    if samples.len() < 3 {
        return Err(Error::TooFewSamples {
            required: 3,
            actual: samples.len(),
        });
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let m2 = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    if !(m2 > 0.0) {
        return Err(Error::ZeroVariance("samples"));
    }
    let m3 = samples.iter().map(|x| (x - mean).powi(3)).sum::<f64>() / n;
    Ok(m3 / m2.powf(1.5))
}
