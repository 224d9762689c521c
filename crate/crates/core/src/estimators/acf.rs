use crate::error::{invalid, Error, Result};

/// Lag-1 autoregression of a residual window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AcfEstimate {
    /// `0 < alpha < 1`, `kappa = -ln(alpha) / dt`.
    InDomain { alpha: f64, kappa: f64 },
    /// No positive decay rate corresponds to `alpha`.
    OutOfDomain { alpha: f64 },
}

impl AcfEstimate {
    pub fn alpha(&self) -> f64 {
        match *self {
            AcfEstimate::InDomain { alpha, .. } | AcfEstimate::OutOfDomain { alpha } => alpha,
        }
    }

    pub fn kappa(&self) -> Option<f64> {
        match *self {
            AcfEstimate::InDomain { kappa, .. } => Some(kappa),
            AcfEstimate::OutOfDomain { .. } => None,
        }
    }
}

/// Least-squares slope of `x[k+1]` on `x[k]` without intercept, converted to a decay rate.
pub fn fit_kappa_acf(residual: &[f64], dt: f64) -> Result<AcfEstimate> {
    if residual.len() < 3 {
        return Err(Error::TooFewSamples {
            required: 3,
            actual: residual.len(),
        });
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(invalid("dt", format!("must be positive, got {dt}")));
    }
    let (mut num, mut den) = (0.0, 0.0);
    for w in residual.windows(2) {
        num += w[1] * w[0];
        den += w[0] * w[0];
    }
    if !(den > 0.0) {
        return Err(Error::ZeroVariance("autocorrelation window"));
    }
    let alpha = num / den;
    Ok(if alpha > 0.0 && alpha < 1.0 {
        AcfEstimate::InDomain {
            alpha,
            kappa: -alpha.ln() / dt,
        }
    } else {
        AcfEstimate::OutOfDomain { alpha }
    })
}

/// Noise variance implied by the two decay-rate estimates, `kappa_acf / kappa_u`.
pub fn estimate_sigma2(kappa_acf: f64, kappa_u: f64) -> Result<f64> {
    if !(kappa_u > 0.0) {
        return Err(Error::NonPositiveKappaU(kappa_u));
    }
    Ok(kappa_acf / kappa_u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::simulate_linear;
    use crate::rng;
    use rand::Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn geometric_sequence_recovers_log_rate() {
        let x: Vec<f64> = (0..60).map(|k| 0.9f64.powi(k)).collect();
        let e = fit_kappa_acf(&x, 0.1).unwrap();
        assert!((e.kappa().unwrap() - (-(0.9f64).ln() / 0.1)).abs() < 1e-9);
    }

    #[test]
    fn white_noise_is_out_of_domain_or_near_zero() {
        let mut r = rng::stream(1, 0);
        let x: Vec<f64> = (0..5000).map(|_| r.sample(StandardNormal)).collect();
        let e = fit_kappa_acf(&x, 1.0).unwrap();
        assert!(e.alpha().abs() < 0.05);
        let alternating: Vec<f64> = (0..50).map(|k| if k % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert!(matches!(
            fit_kappa_acf(&alternating, 1.0).unwrap(),
            AcfEstimate::OutOfDomain { .. }
        ));
    }

    #[test]
    fn ou_rate_within_fifteen_percent() {
        let ts = simulate_linear(2.0, 1.0, 0.1, 2000, 17).unwrap();
        let k = fit_kappa_acf(ts.values(), 0.1).unwrap().kappa().unwrap();
        assert!((k - 2.0).abs() < 0.3, "kappa {k}");
    }

    #[test]
    fn sigma2_is_a_ratio() {
        assert_eq!(estimate_sigma2(1.0, 2.0).unwrap(), 0.5);
        assert!(matches!(estimate_sigma2(1.0, 0.0), Err(Error::NonPositiveKappaU(_))));
        assert!(fit_kappa_acf(&[0.0; 10], 0.1).is_err());
    }
}
