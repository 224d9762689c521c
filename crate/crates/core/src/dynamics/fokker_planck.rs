use std::sync::OnceLock;

use crate::error::{invalid, Error, Result};
use crate::estimators::Moments;

/// Minimum number of grid points for automatically sized grids.
pub const DEFAULT_MIN_POINTS: usize = 2001;
/// A boundary value below this fraction of the peak counts as negligible.
const BOUNDARY_FRACTION: f64 = 1e-8;
/// Relative agreement with the algebraic tail `-c / (x^2 - mu)` that also accepts a boundary.
const TAIL_AGREEMENT: f64 = 1e-2;
const POINTS_PER_SD: f64 = 40.0;
const GL_ORDER: usize = 12;
/// Panels whose exponent stays this far below the peak are skipped.
const SKIP_BELOW_PEAK: f64 = 45.0;

/// State grid for the stationary solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FpGrid {
    /// Span starts at `[-sqrt(mu) - 5 sigma^(2/3), sqrt(mu) + 5 sigma^(2/3)]`, widens
    /// until both boundaries are acceptable, and is refined to resolve the well.
    Auto { min_points: usize },
    /// Fixed uniform grid; fails if a boundary is not acceptable.
    Explicit { lo: f64, hi: f64, n: usize },
}

impl Default for FpGrid {
    fn default() -> Self {
        FpGrid::Auto {
            min_points: DEFAULT_MIN_POINTS,
        }
    }
}

/// Stationary density with constant probability flux.
#[derive(Debug, Clone, PartialEq)]
pub struct FpSolution {
    pub mu: f64,
    pub sigma: f64,
    pub grid: Vec<f64>,
    pub p: Vec<f64>,
    /// Flux `(mu - x^2) p - (sigma^2/2) p'`; negative, i.e. toward escape.
    pub c: f64,
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
}

impl FpSolution {
    /// Moments of the density restricted to `[lo, hi]` and renormalized there.
    /// `mass` is the fraction of the full solution inside the interval.
    ///
    /// The algebraic flux tails make the full-span moments depend on where the grid
    /// stops; restricting to a fixed interval gives span-independent numbers.
    pub fn moments_within(&self, lo: f64, hi: f64) -> Result<Moments> {
        let idx: Vec<usize> = (0..self.grid.len())
            .filter(|&i| self.grid[i] >= lo && self.grid[i] <= hi)
            .collect();
        if idx.len() < 3 {
            return Err(invalid("interval", format!("[{lo}, {hi}] holds fewer than 3 grid points")));
        }
        let x: Vec<f64> = idx.iter().map(|&i| self.grid[i]).collect();
        let p: Vec<f64> = idx.iter().map(|&i| self.p[i]).collect();
        let h = self.grid[1] - self.grid[0];
        let mass = trapezoid(&p, h);
        let mean = trapezoid_with(&x, &p, h, |v| v) / mass;
        let variance = trapezoid_with(&x, &p, h, |v| (v - mean).powi(2)) / mass;
        let m3 = trapezoid_with(&x, &p, h, |v| (v - mean).powi(3)) / mass;
        let skewness = if variance > 0.0 { m3 / variance.powf(1.5) } else { 0.0 };
        Ok(Moments {
            mass,
            mean,
            variance,
            skewness,
        })
    }
}

/// Solves `(sigma^2/2) p' = (mu - x^2) p - c` with `p -> 0` at both infinities.
///
/// Each density value is `p(x) = (-2c/sigma^2) * I(x)` with
/// `I(x) = int_0^inf exp((2/sigma^2) s (mu - x^2 + x s - s^2/3)) ds`,
/// evaluated in log space with Gauss-Legendre panels. Normalization fixes `c`.
pub fn stationary_fp_solve(mu: f64, sigma: f64, grid: FpGrid) -> Result<FpSolution> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(invalid("sigma", format!("must be positive, got {sigma}")));
    }
    if !mu.is_finite() {
        return Err(invalid("mu", "must be finite"));
    }
    let root = mu.max(0.0).sqrt();
    let reach = 5.0 * sigma.powf(2.0 / 3.0);
    match grid {
        FpGrid::Explicit { lo, hi, n } => {
            if !(hi > lo) || n < 5 {
                return Err(invalid("grid", "need hi > lo and at least 5 points"));
            }
            let sol = solve_on(mu, sigma, lo, hi, n);
            check_boundaries(&sol)?;
            Ok(sol)
        }
        FpGrid::Auto { min_points } => {
            let well_sd = if root > 0.0 {
                (sigma / (2.0 * root.sqrt())).min(sigma.powf(2.0 / 3.0))
            } else {
                sigma.powf(2.0 / 3.0)
            };
            let h = well_sd / POINTS_PER_SD;
            let (mut lo, mut hi) = (-root - reach, root + reach);
            let mut last_err = None;
            for _ in 0..24 {
                let n = (((hi - lo) / h).ceil() as usize + 1).max(min_points.max(5));
                let sol = solve_on(mu, sigma, lo, hi, n);
                match boundary_status(&sol) {
                    (true, true) => return Ok(sol),
                    (left_ok, right_ok) => {
                        let span = hi - lo;
                        if !left_ok {
                            lo -= 0.5 * span;
                        }
                        if !right_ok {
                            hi += 0.5 * span;
                        }
                        last_err = Some(check_boundaries(&sol).unwrap_err());
                    }
                }
            }
            Err(last_err.expect("loop ran at least once"))
        }
    }
}

/// Maximum of `|(sigma^2/2) p' - (mu - x^2) p + c|` over interior points, relative to
/// `max |(mu - x^2) p|`, with `p'` from a five-point central difference.
pub fn fp_ode_residual(sol: &FpSolution) -> f64 {
    let x = &sol.grid;
    let p = &sol.p;
    let n = x.len();
    if n < 5 {
        return f64::NAN;
    }
    let h = x[1] - x[0];
    let half_var = 0.5 * sol.sigma * sol.sigma;
    let scale = x
        .iter()
        .zip(p)
        .map(|(&xi, &pi)| ((sol.mu - xi * xi) * pi).abs())
        .fold(0.0, f64::max);
    let worst = (2..n - 2)
        .map(|i| {
            let d = (-p[i + 2] + 8.0 * p[i + 1] - 8.0 * p[i - 1] + p[i - 2]) / (12.0 * h);
            (half_var * d - (sol.mu - x[i] * x[i]) * p[i] + sol.c).abs()
        })
        .fold(0.0, f64::max);
    worst / scale
}

fn solve_on(mu: f64, sigma: f64, lo: f64, hi: f64, n: usize) -> FpSolution {
    let h = (hi - lo) / (n - 1) as f64;
    let grid: Vec<f64> = (0..n).map(|i| lo + i as f64 * h).collect();
    let k = 2.0 / (sigma * sigma);
    let log_i: Vec<f64> = grid.iter().map(|&x| log_integral(mu, k, sigma, x)).collect();
    let peak = log_i.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut p: Vec<f64> = log_i.iter().map(|&l| (l - peak).exp()).collect();
    let z = trapezoid(&p, h);
    for v in &mut p {
        *v /= z;
    }
    // p = (-2c/sigma^2) I  =>  c = -(sigma^2/2) exp(-peak) / z
    let c = -(0.5 * sigma * sigma) * (-peak - z.ln()).exp();

    let m1 = trapezoid_with(&grid, &p, h, |x| x);
    let var = trapezoid_with(&grid, &p, h, |x| (x - m1).powi(2));
    let m3 = trapezoid_with(&grid, &p, h, |x| (x - m1).powi(3));
    let skewness = if var > 0.0 { m3 / var.powf(1.5) } else { 0.0 };
    FpSolution {
        mu,
        sigma,
        grid,
        p,
        c,
        mean: m1,
        variance: var,
        skewness,
    }
}

/// `ln int_0^inf exp(g(s)) ds` with `g(s) = k s (mu - x^2 + x s - s^2/3)`.
fn log_integral(mu: f64, k: f64, sigma: f64, x: f64) -> f64 {
    let a = mu - x * x;
    let g = |s: f64| k * s * (a + x * s - s * s / 3.0);
    let root = mu.max(0.0).sqrt();
    // interior maximum of the cubic, if any lies on s > 0
    let s_star = if mu > 0.0 { (x + root).max(0.0) } else { x.max(0.0) };
    let g_peak = g(s_star).max(0.0);

    let d2_star = (k * (2.0 * x - 2.0 * s_star)).abs();
    let d1_zero = (k * a).abs();
    let d2_zero = (2.0 * k * x).abs();
    let mut scale = (1.5 * sigma * sigma).cbrt();
    if d2_star > 0.0 {
        scale = scale.min(1.0 / d2_star.sqrt());
    }
    if d2_zero > 0.0 {
        scale = scale.min(1.0 / d2_zero.sqrt());
    }
    if d1_zero > 0.0 {
        scale = scale.min(1.0 / d1_zero);
    }
    let width = 0.5 * scale;

    let mut end = s_star + scale;
    while g(end) > g_peak - 60.0 {
        end = s_star + 2.0 * (end - s_star);
    }
    let panels = (end / width).ceil() as usize;
    let (nodes, weights) = gauss_legendre();
    let mut sum = 0.0;
    for j in 0..panels {
        let a0 = j as f64 * width;
        let b0 = a0 + width;
        let contains_peak = a0 <= s_star && s_star <= b0;
        if !contains_peak && g(a0).max(g(b0)) < g_peak - SKIP_BELOW_PEAK {
            continue;
        }
        let mid = 0.5 * (a0 + b0);
        let half = 0.5 * width;
        for (t, w) in nodes.iter().zip(weights) {
            sum += half * w * (g(mid + half * t) - g_peak).exp();
        }
    }
    g_peak + sum.ln()
}

fn gauss_legendre() -> &'static (Vec<f64>, Vec<f64>) {
    static NODES: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    NODES.get_or_init(|| {
        let n = GL_ORDER;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n {
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, z);
                for m in 2..=n {
                    let p2 = ((2 * m - 1) as f64 * z * p1 - (m - 1) as f64 * p0) / m as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
                let dz = p1 / dp;
                z -= dz;
                if dz.abs() < 1e-15 {
                    break;
                }
            }
            nodes[i] = z;
            weights[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        }
        (nodes, weights)
    })
}

fn boundary_ok(sol: &FpSolution, i: usize, peak: f64) -> bool {
    let x = sol.grid[i];
    let p = sol.p[i];
    if p < BOUNDARY_FRACTION * peak {
        return true;
    }
    let gap = x * x - sol.mu;
    if gap > 0.0 && sol.c < 0.0 {
        let tail = -sol.c / gap;
        return ((p - tail) / tail).abs() < TAIL_AGREEMENT;
    }
    false
}

fn boundary_status(sol: &FpSolution) -> (bool, bool) {
    let peak = sol.p.iter().cloned().fold(0.0, f64::max);
    (
        boundary_ok(sol, 0, peak),
        boundary_ok(sol, sol.p.len() - 1, peak),
    )
}

fn check_boundaries(sol: &FpSolution) -> Result<()> {
    let peak = sol.p.iter().cloned().fold(0.0, f64::max);
    let (l, r) = boundary_status(sol);
    let i = if !l {
        0
    } else if !r {
        sol.p.len() - 1
    } else {
        return Ok(());
    };
    Err(Error::GridTooNarrow {
        x: sol.grid[i],
        ratio: sol.p[i] / peak,
    })
}

fn trapezoid(y: &[f64], h: f64) -> f64 {
    let n = y.len();
    h * (y.iter().sum::<f64>() - 0.5 * (y[0] + y[n - 1]))
}

fn trapezoid_with(x: &[f64], p: &[f64], h: f64, f: impl Fn(f64) -> f64) -> f64 {
    let vals: Vec<f64> = x.iter().zip(p).map(|(&xi, &pi)| f(xi) * pi).collect();
    trapezoid(&vals, h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre();
        let s: f64 = x.iter().zip(w).map(|(x, w)| w * x.powi(22)).sum();
        assert!((s - 2.0 / 23.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn deep_well_is_nearly_gaussian() {
        let sol = stationary_fp_solve(4.0, 0.1, FpGrid::default()).unwrap();
        assert!((sol.mean - 2.0).abs() < 1e-3, "mean {}", sol.mean);
        let lin_var = 0.01 / (2.0 * 2.0 * 2.0);
        assert!((sol.variance / lin_var - 1.0).abs() < 0.01);
        // leading small-noise correction: -sigma / (2 mu^(3/4))
        let asym = -0.1 / (2.0 * 4f64.powf(0.75));
        assert!((sol.skewness - asym).abs() < 2e-3, "skewness {}", sol.skewness);
    }

    #[test]
    fn residual_is_small_and_flux_negative() {
        for mu in [0.1, 1.0, 4.0] {
            let sol = stationary_fp_solve(mu, 1.0, FpGrid::default()).unwrap();
            assert!(sol.c < 0.0);
            let r = fp_ode_residual(&sol);
            assert!(r < 1e-6, "mu={mu} residual {r}");
        }
    }

    #[test]
    fn frozen_reference_moments() {
        let sol = stationary_fp_solve(2.0, 1.0, FpGrid::default()).unwrap();
        assert!((sol.mean - 1.3414).abs() < 2e-3, "{}", sol.mean);
        assert!((sol.variance - 0.20357).abs() < 2e-3, "{}", sol.variance);
        assert!((sol.skewness + 0.5456).abs() < 1e-2, "{}", sol.skewness);
    }

    #[test]
    fn restricted_moments_cover_the_full_solution() {
        let sol = stationary_fp_solve(2.0, 1.0, FpGrid::default()).unwrap();
        let all = sol.moments_within(f64::NEG_INFINITY, f64::INFINITY).unwrap();
        assert!((all.mass - 1.0).abs() < 1e-12);
        assert!((all.skewness - sol.skewness).abs() < 1e-12);
        let cut = sol.moments_within(-2f64.sqrt() - 3.0, 2f64.sqrt() + 3.0).unwrap();
        assert!(cut.mass < 1.0 && cut.mass > 0.999);
        assert!(cut.skewness > sol.skewness);
    }

    #[test]
    fn narrow_explicit_grid_is_rejected() {
        let e = stationary_fp_solve(1.0, 1.0, FpGrid::Explicit { lo: -0.5, hi: 2.0, n: 501 });
        assert!(matches!(e, Err(Error::GridTooNarrow { .. })));
    }

    #[test]
    fn rejects_zero_noise() {
        assert!(stationary_fp_solve(1.0, 0.0, FpGrid::default()).is_err());
    }
}
