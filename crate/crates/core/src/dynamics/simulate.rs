use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};
use crate::rng;
use crate::series::{Censoring, TimeSeries};

/// Parameters of the noisy saddle-node normal form with drifting control parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnfParams {
    pub mu0: f64,
    /// Drift rate of `mu` per unit time; `mu(t) = mu0 - epsilon * t`.
    pub epsilon: f64,
    pub sigma: f64,
    /// Integration and sampling step.
    pub dt: f64,
    pub n_max: usize,
    pub x0: f64,
    /// Realizations are censored at the first sample `<= escape_level`.
    pub escape_level: f64,
    pub seed: u64,
}

impl SnfParams {
    /// Stationary normal form starting at the stable equilibrium, escape at `x = -1`.
    pub fn stationary(mu: f64, sigma: f64, dt: f64, n_max: usize, seed: u64) -> Self {
        Self {
            mu0: mu,
            epsilon: 0.0,
            sigma,
            dt,
            n_max,
            x0: mu.max(0.0).sqrt(),
            escape_level: -1.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(invalid("dt", format!("must be positive, got {}", self.dt)));
        }
        if self.n_max == 0 {
            return Err(invalid("n_max", "must be at least 1"));
        }
        if !(self.sigma >= 0.0) {
            return Err(invalid("sigma", format!("must be non-negative, got {}", self.sigma)));
        }
        if !(self.epsilon >= 0.0) {
            return Err(invalid("epsilon", format!("must be non-negative, got {}", self.epsilon)));
        }
        if !self.mu0.is_finite() || !self.x0.is_finite() {
            return Err(invalid("mu0/x0", "must be finite"));
        }
        Ok(())
    }
}

/// Euler-Maruyama integration of the drifting normal form, one sample per step.
///
/// Stops after `n_max` samples or at the first sample at or below
/// `escape_level`; that sample is kept and the series is flagged as censored.
/// A step that overflows is recorded as a sample at `escape_level`.
pub fn simulate_snf(params: &SnfParams) -> Result<TimeSeries> {
    params.validate()?;
    let mut rng = rng::stream(params.seed, 0);
    let sqrt_dt = params.dt.sqrt();
    let mut values = Vec::with_capacity(params.n_max);
    let mut x = params.x0;
    values.push(x);
    let mut censored = (x <= params.escape_level).then_some(Censoring { index: 0 });

    while censored.is_none() && values.len() < params.n_max {
        let k = values.len() - 1;
        let mu = params.mu0 - params.epsilon * k as f64 * params.dt;
        let z: f64 = rng.sample(StandardNormal);
        x = x + (mu - x * x) * params.dt + params.sigma * sqrt_dt * z;
        if !x.is_finite() {
            x = params.escape_level;
        }
        values.push(x);
        if x <= params.escape_level {
            censored = Some(Censoring {
                index: values.len() - 1,
            });
        }
    }
    Ok(TimeSeries::uniform(0.0, params.dt, values)?.with_censoring(censored))
}

/// Ornstein-Uhlenbeck process `dx = -kappa x dt + sigma dW` from `x0 = 0`.
///
/// Uses the exact Gaussian transition over each step, so the lag-1
/// autocorrelation is `exp(-kappa dt)` and the stationary variance
/// `sigma^2 / (2 kappa)` regardless of `dt`.
pub fn simulate_linear(kappa: f64, sigma: f64, dt: f64, n: usize, seed: u64) -> Result<TimeSeries> {
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(invalid("kappa", format!("must be positive, got {kappa}")));
    }
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(invalid("sigma", format!("must be non-negative, got {sigma}")));
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(invalid("dt", format!("must be positive, got {dt}")));
    }
    if n == 0 {
        return Err(invalid("n", "must be at least 1"));
    }
    let mut rng = rng::stream(seed, 0);
    let alpha = (-kappa * dt).exp();
    let step_sd = sigma * ((1.0 - alpha * alpha) / (2.0 * kappa)).sqrt();
    let mut values = Vec::with_capacity(n);
    let mut x = 0.0;
    values.push(x);
    for _ in 1..n {
        let z: f64 = rng.sample(StandardNormal);
        x = alpha * x + step_sd * z;
        values.push(x);
    }
    TimeSeries::uniform(0.0, dt, values)
}
