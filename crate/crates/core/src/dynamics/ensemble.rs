use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};
use crate::estimators::Density;
use crate::rng;

/// Number of contiguous batches used for batch-means standard errors.
const N_BATCHES: usize = 20;

/// Setup for the conditional (not-yet-escaped) ensemble of the stationary normal form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleParams {
    pub n_realizations: usize,
    pub mu: f64,
    pub sigma: f64,
    /// Kill depth below the unstable branch: realizations at `x <= -sqrt(mu) - b` are replaced.
    pub b: f64,
    pub dt: f64,
    /// Time discarded before pooling.
    pub burn_in: f64,
    /// Total simulated time, burn-in included.
    pub horizon: f64,
    pub seed: u64,
    /// Histogram bins for the pooled density.
    pub bins: usize,
    /// Pool every `thin`-th step after burn-in.
    pub thin: usize,
}

impl EnsembleParams {
    pub fn new(n_realizations: usize, mu: f64, sigma: f64, b: f64, seed: u64) -> Self {
        Self {
            n_realizations,
            mu,
            sigma,
            b,
            dt: 0.01,
            burn_in: 20.0,
            horizon: 40.0,
            seed,
            bins: 400,
            thin: 1,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_realizations < 2 {
            return Err(invalid("n_realizations", "need at least 2"));
        }
        if !(self.mu >= 0.0) || !self.mu.is_finite() {
            return Err(invalid("mu", format!("must be non-negative, got {}", self.mu)));
        }
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(invalid("sigma", format!("must be non-negative, got {}", self.sigma)));
        }
        if !(self.b > 0.0) || !self.b.is_finite() {
            return Err(invalid("b", format!("must be positive, got {}", self.b)));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(invalid("dt", format!("must be positive, got {}", self.dt)));
        }
        if !(self.burn_in >= 0.0) || !(self.horizon > self.burn_in) {
            return Err(invalid("horizon", "must exceed a non-negative burn_in"));
        }
        if self.bins < 3 || self.thin == 0 {
            return Err(invalid("bins/thin", "need bins >= 3 and thin >= 1"));
        }
        Ok(())
    }
}

/// Batch-means standard errors of the pooled moments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentErrors {
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    /// Histogram density of pooled states; `dp` by central differences.
    pub density: Density,
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub errors: MomentErrors,
    pub n_pooled: u64,
    pub n_replaced: u64,
    /// Pooled states above the histogram range (still included in the moments).
    pub n_above_range: u64,
}

#[derive(Debug, Clone, Copy, Default)]
struct PowerSums {
    n: f64,
    s1: f64,
    s2: f64,
    s3: f64,
}

impl PowerSums {
    fn add(&mut self, o: &PowerSums) {
        self.n += o.n;
        self.s1 += o.s1;
        self.s2 += o.s2;
        self.s3 += o.s3;
    }

    /// (mean offset, variance, skewness) about the accumulation shift.
    fn moments(&self) -> (f64, f64, f64) {
        let m1 = self.s1 / self.n;
        let var = (self.s2 / self.n - m1 * m1).max(0.0);
        let m3 = self.s3 / self.n - 3.0 * m1 * self.s2 / self.n + 2.0 * m1 * m1 * m1;
        let skew = if var > 0.0 { m3 / var.powf(1.5) } else { 0.0 };
        (m1, var, skew)
    }
}

/// Fleming-Viot style simulation of realizations conditioned on not having escaped.
///
/// All realizations start at `sqrt(mu)`. After every Euler step, realizations
/// at or below `-sqrt(mu) - b` take the current value of a uniformly chosen
/// survivor. States after burn-in are pooled into power sums and a
/// fixed-range histogram. A single seeded stream drives noise and resampling.
pub fn conditional_ensemble(params: &EnsembleParams) -> Result<EnsembleResult> {
    params.validate()?;
    let p = params;
    let root = p.mu.sqrt();
    let kill = -root - p.b;
    let mut rng = rng::stream(p.seed, 0);

    let n = p.n_realizations;
    let mut x = vec![root; n];
    let n_steps = (p.horizon / p.dt).round() as usize;
    let burn_steps = (p.burn_in / p.dt).round() as usize;
    if burn_steps >= n_steps {
        return Err(invalid("horizon", "no steps left after burn-in"));
    }
    let pooled_steps: Vec<usize> = (burn_steps + 1..=n_steps)
        .filter(|s| (s - burn_steps - 1) % p.thin == 0)
        .collect();
    let n_pool_steps = pooled_steps.len();
    let n_batches = N_BATCHES.min(n_pool_steps);

    let hi = root + 10.0 * p.sigma.powf(2.0 / 3.0) + 1.0;
    let bin_width = (hi - kill) / p.bins as f64;
    let mut counts = vec![0u64; p.bins];
    let mut above = 0u64;
    let mut batches = vec![PowerSums::default(); n_batches];

    let noise = p.sigma * p.dt.sqrt();
    let mut dead: Vec<usize> = Vec::new();
    let mut survivors: Vec<usize> = Vec::with_capacity(n);
    let mut n_replaced = 0u64;
    let mut pool_index = 0usize;

    for step in 1..=n_steps {
        dead.clear();
        for (i, xi) in x.iter_mut().enumerate() {
            let z: f64 = rng.sample(StandardNormal);
            let v = *xi + (p.mu - *xi * *xi) * p.dt + noise * z;
            *xi = v;
            if !(v > kill) {
                dead.push(i);
            }
        }
        if !dead.is_empty() {
            if dead.len() == n {
                return Err(Error::EnsembleExtinct {
                    mu: p.mu,
                    b: p.b,
                    step,
                });
            }
            survivors.clear();
            let mut d = dead.iter().peekable();
            for i in 0..n {
                if d.peek() == Some(&&i) {
                    d.next();
                } else {
                    survivors.push(i);
                }
            }
            for &i in &dead {
                let j = survivors[rng.random_range(0..survivors.len())];
                x[i] = x[j];
            }
            n_replaced += dead.len() as u64;
        }

        if pool_index < n_pool_steps && pooled_steps[pool_index] == step {
            let batch = pool_index * n_batches / n_pool_steps;
            let mut s = PowerSums {
                n: n as f64,
                ..Default::default()
            };
            for &v in &x {
                let d = v - root;
                s.s1 += d;
                s.s2 += d * d;
                s.s3 += d * d * d;
                let k = ((v - kill) / bin_width).floor();
                if k < p.bins as f64 {
                    counts[k.max(0.0) as usize] += 1;
                } else {
                    above += 1;
                }
            }
            batches[batch].add(&s);
            pool_index += 1;
        }
    }

    let mut total = PowerSums::default();
    for b in &batches {
        total.add(b);
    }
    let (m1, variance, skewness) = total.moments();
    let errors = if n_batches >= 2 {
        let stats: Vec<(f64, f64, f64)> = batches.iter().map(PowerSums::moments).collect();
        let se = |f: &dyn Fn(&(f64, f64, f64)) -> f64| {
            let vals: Vec<f64> = stats.iter().map(f).collect();
            let m = vals.iter().sum::<f64>() / vals.len() as f64;
            let v = vals.iter().map(|a| (a - m).powi(2)).sum::<f64>() / (vals.len() - 1) as f64;
            (v / vals.len() as f64).sqrt()
        };
        MomentErrors {
            mean: se(&|s| s.0),
            variance: se(&|s| s.1),
            skewness: se(&|s| s.2),
        }
    } else {
        MomentErrors {
            mean: f64::NAN,
            variance: f64::NAN,
            skewness: f64::NAN,
        }
    };

    let n_pooled = (n * n_pool_steps) as u64;
    let norm = n_pooled as f64 * bin_width;
    let grid: Vec<f64> = (0..p.bins)
        .map(|k| kill + (k as f64 + 0.5) * bin_width)
        .collect();
    let dens: Vec<f64> = counts.iter().map(|&c| c as f64 / norm).collect();
    let density = Density::from_values(grid, dens)?;

    Ok(EnsembleResult {
        density,
        mean: root + m1,
        variance,
        skewness,
        errors,
        n_pooled,
        n_replaced,
        n_above_range: above,
    })
}
