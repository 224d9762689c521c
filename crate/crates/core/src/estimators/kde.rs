use std::f64::consts::PI;
use std::sync::OnceLock;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{invalid, Error, Result};

pub const MIN_KDE_SAMPLES: usize = 30;
pub const DEFAULT_GRID_POINTS: usize = 401;
/// Grid points with `p >= SUPPORT_FRACTION * max p` are flagged as supported.
pub const SUPPORT_FRACTION: f64 = 1e-3;
/// Grid extends this many bandwidths beyond the extreme samples.
const GRID_PAD_BANDWIDTHS: f64 = 3.0;
/// Kernel contributions below this fraction of the kernel peak are dropped.
const KERNEL_CUTOFF: f64 = 1e-17;
const ISJ_MESH: usize = 1 << 12;
const ISJ_ORDER: usize = 7;

/// How the kernel bandwidth is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BandwidthSelector {
    /// Diffusion-based improved Sheather-Jones, falling back to Silverman.
    Isj,
    Silverman,
    Fixed(f64),
}

/// Which rule actually produced the bandwidth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BandwidthMethod {
    Isj,
    Silverman,
    Fixed,
    /// All samples equal; a tiny bandwidth around the common value.
    Degenerate,
}

impl BandwidthMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            BandwidthMethod::Isj => "isj",
            BandwidthMethod::Silverman => "silverman",
            BandwidthMethod::Fixed => "fixed",
            BandwidthMethod::Degenerate => "degenerate",
        }
    }
}

/// Probability density sampled on an ascending grid, with its derivative.
#[derive(Debug, Clone, PartialEq)]
pub struct Density {
    pub grid: Vec<f64>,
    pub p: Vec<f64>,
    pub dp: Vec<f64>,
    /// Kernel bandwidth, if the density came from samples.
    pub bandwidth: Option<f64>,
    pub method: Option<BandwidthMethod>,
    /// Number of samples behind the estimate; 0 for analytic densities.
    pub n_samples: usize,
    pub support_mask: Vec<bool>,
}

impl Density {
    /// Wraps exact density and derivative values.
    pub fn from_analytic(grid: Vec<f64>, p: Vec<f64>, dp: Vec<f64>) -> Result<Self> {
        validate_grid(&grid, &p)?;
        if dp.len() != grid.len() || dp.iter().any(|v| !v.is_finite()) {
            return Err(invalid("dp", "must be finite and match the grid length"));
        }
        let support_mask = support(&p);
        Ok(Self {
            grid,
            p,
            dp,
            bandwidth: None,
            method: None,
            n_samples: 0,
            support_mask,
        })
    }

    /// Density values only; `dp` from central differences (one-sided at the ends).
    pub fn from_values(grid: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        validate_grid(&grid, &p)?;
        let dp = central_difference(&grid, &p);
        Self::from_analytic(grid, p, dp)
    }

    /// Trapezoid integral of `p`.
    pub fn mass(&self) -> f64 {
        trapezoid(&self.grid, &self.p)
    }

    pub fn n_supported(&self) -> usize {
        self.support_mask.iter().filter(|&&s| s).count()
    }

    /// Grid abscissa of the largest density value.
    pub fn mode(&self) -> f64 {
        let i = self
            .p
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0);
        self.grid[i]
    }
}

fn validate_grid(grid: &[f64], p: &[f64]) -> Result<()> {
    if grid.len() < 3 || p.len() != grid.len() {
        return Err(invalid("grid", "need at least 3 points and matching p"));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) || grid.iter().any(|g| !g.is_finite()) {
        return Err(invalid("grid", "must be finite and strictly ascending"));
    }
    if p.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(invalid("p", "must be finite and non-negative"));
    }
    Ok(())
}

fn support(p: &[f64]) -> Vec<bool> {
    let peak = p.iter().cloned().fold(0.0, f64::max);
    p.iter().map(|&v| peak > 0.0 && v >= SUPPORT_FRACTION * peak).collect()
}

pub(crate) fn central_difference(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut d = vec![0.0; n];
    d[0] = (y[1] - y[0]) / (x[1] - x[0]);
    d[n - 1] = (y[n - 1] - y[n - 2]) / (x[n - 1] - x[n - 2]);
    for i in 1..n - 1 {
        d[i] = (y[i + 1] - y[i - 1]) / (x[i + 1] - x[i - 1]);
    }
    d
}

pub(crate) fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]))
        .sum()
}

/// Gaussian kernel density estimate of a sample.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianKde {
    samples: Vec<f64>,
    bandwidth: f64,
    method: BandwidthMethod,
}

impl GaussianKde {
    pub fn new(samples: &[f64], selector: BandwidthSelector) -> Result<Self> {
        if samples.len() < MIN_KDE_SAMPLES {
            return Err(Error::TooFewSamples {
                required: MIN_KDE_SAMPLES,
                actual: samples.len(),
            });
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(invalid("samples", "must be finite"));
        }
        let (lo, hi) = min_max(samples);
        let (bandwidth, method) = if hi == lo {
            (1e-6 * lo.abs().max(1.0), BandwidthMethod::Degenerate)
        } else {
            match selector {
                BandwidthSelector::Fixed(h) => {
                    if !(h > 0.0) || !h.is_finite() {
                        return Err(invalid("kde_bandwidth", format!("must be positive, got {h}")));
                    }
                    (h, BandwidthMethod::Fixed)
                }
                BandwidthSelector::Silverman => (silverman_bandwidth(samples), BandwidthMethod::Silverman),
                BandwidthSelector::Isj => match isj_bandwidth(samples) {
                    Some(h) => (h, BandwidthMethod::Isj),
                    None => (silverman_bandwidth(samples), BandwidthMethod::Silverman),
                },
            }
        };
        Ok(Self {
            samples: samples.to_vec(),
            bandwidth,
            method,
        })
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn method(&self) -> BandwidthMethod {
        self.method
    }

    /// Default grid `[min - 3h, max + 3h]` with `n_points` points.
    pub fn default_grid(&self, n_points: usize) -> Vec<f64> {
        let (lo, hi) = min_max(&self.samples);
        let pad = GRID_PAD_BANDWIDTHS * self.bandwidth;
        linspace(lo - pad, hi + pad, n_points.max(3))
    }

    /// Density and its exact derivative at each grid point.
    pub fn evaluate(&self, grid: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = grid.len();
        let mut p = vec![0.0; n];
        let mut dp = vec![0.0; n];
        if n == 0 {
            return (p, dp);
        }
        let h = self.bandwidth;
        let uniform_step = uniform_step(grid);
        for &x in &self.samples {
            match uniform_step {
                Some(step) => accumulate_uniform(&mut p, &mut dp, grid[0], step, x, h),
                None => {
                    for (j, &g) in grid.iter().enumerate() {
                        let u = (g - x) / h;
                        let f = (-0.5 * u * u).exp();
                        p[j] += f;
                        dp[j] -= u * f;
                    }
                }
            }
        }
        let norm = 1.0 / (self.samples.len() as f64 * h * (2.0 * PI).sqrt());
        for j in 0..n {
            p[j] *= norm;
            dp[j] *= norm / h;
        }
        (p, dp)
    }

    pub fn density_on(&self, grid: Vec<f64>) -> Result<Density> {
        let (p, dp) = self.evaluate(&grid);
        let mut d = Density::from_analytic(grid, p, dp)?;
        d.bandwidth = Some(self.bandwidth);
        d.method = Some(self.method);
        d.n_samples = self.samples.len();
        Ok(d)
    }

    pub fn density(&self, n_points: usize) -> Result<Density> {
        self.density_on(self.default_grid(n_points))
    }
}

/// Kernel sum for one sample on a uniform grid, walking outward from the
/// nearest node with multiplicative updates instead of one `exp` per node.
fn accumulate_uniform(p: &mut [f64], dp: &mut [f64], g0: f64, step: f64, x: f64, h: f64) {
    let n = p.len();
    let d = step / h;
    let q = (-d * d).exp();
    let j0 = ((x - g0) / step).round().clamp(0.0, (n - 1) as f64) as usize;
    let u0 = (g0 + j0 as f64 * step - x) / h;
    let f0 = (-0.5 * u0 * u0).exp();
    p[j0] += f0;
    dp[j0] -= u0 * f0;

    let mut f = f0;
    let mut r = (-(2.0 * u0 * d + d * d) * 0.5).exp();
    let mut j = j0 + 1;
    let mut m = 1.0;
    while j < n {
        f *= r;
        if f < KERNEL_CUTOFF {
            break;
        }
        r *= q;
        let u = u0 + m * d;
        p[j] += f;
        dp[j] -= u * f;
        j += 1;
        m += 1.0;
    }

    let mut f = f0;
    let mut r = ((2.0 * u0 * d - d * d) * 0.5).exp();
    let mut m = 1.0;
    let mut j = j0;
    while j > 0 {
        j -= 1;
        f *= r;
        if f < KERNEL_CUTOFF {
            break;
        }
        r *= q;
        let u = u0 - m * d;
        p[j] += f;
        dp[j] -= u * f;
        m += 1.0;
    }
}

fn uniform_step(grid: &[f64]) -> Option<f64> {
    if grid.len() < 2 {
        return None;
    }
    let n = grid.len();
    let step = (grid[n - 1] - grid[0]) / (n - 1) as f64;
    let ok = grid.windows(2).all(|w| ((w[1] - w[0]) - step).abs() <= 1e-9 * step);
    ok.then_some(step)
}

/// Kernel density estimate on the default grid.
pub fn estimate_density(
    samples: &[f64],
    selector: BandwidthSelector,
    grid_points: usize,
) -> Result<Density> {
    GaussianKde::new(samples, selector)?.density(grid_points)
}

pub(crate) fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|i| if i == n - 1 { hi } else { lo + i as f64 * step })
        .collect()
}

fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

pub(crate) fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] + frac * (sorted[i + 1] - sorted[i])
    } else {
        sorted[i]
    }
}

/// Silverman's rule `0.9 min(sd, IQR/1.34) n^(-1/5)`.
pub fn silverman_bandwidth(samples: &[f64]) -> f64 {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let sd = (samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr = (quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25)) / 1.34;
    let spread = if iqr > 0.0 { sd.min(iqr) } else { sd };
    0.9 * spread * n.powf(-0.2)
}

struct IsjTables {
    /// `k^(2s)` for s = 2..=ISJ_ORDER, indexed `[s - 2][k - 1]`.
    powers: Vec<Vec<f64>>,
}

fn isj_tables() -> &'static IsjTables {
    static TABLES: OnceLock<IsjTables> = OnceLock::new();
    TABLES.get_or_init(|| {
        let powers = (2..=ISJ_ORDER)
            .map(|s| {
                (1..ISJ_MESH)
                    .map(|k| ((k * k) as f64).powi(s as i32))
                    .collect()
            })
            .collect();
        IsjTables { powers }
    })
}

/// Improved Sheather-Jones bandwidth by the diffusion fixed point.
///
/// Returns `None` when no root of the fixed-point equation is found on `(0, 0.1]`.
pub fn isj_bandwidth(samples: &[f64]) -> Option<f64> {
    let (lo, hi) = min_max(samples);
    let range = hi - lo;
    if !(range > 0.0) {
        return None;
    }
    let lo = lo - range / 10.0;
    let span = range * 1.2;
    let n = ISJ_MESH;
    let dx = span / (n - 1) as f64;

    let mut hist = vec![0.0; n];
    for &x in samples {
        let k = ((x - lo) / dx).floor().clamp(0.0, (n - 1) as f64) as usize;
        hist[k] += 1.0;
    }
    let total: f64 = hist.iter().sum();
    for v in &mut hist {
        *v /= total;
    }
    let c = dct2(&hist);
    // a_k / 2 of the diffusion estimator equals the plain DCT-II coefficient
    let a2: Vec<f64> = c[1..].iter().map(|v| v * v).collect();

    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    let n_unique = sorted.len() as f64;

    let f = |t: f64| fixed_point(t, n_unique, &a2);
    let clamped = n_unique.clamp(50.0, 1050.0);
    let mut tol = 1e-12 + 0.01 * (clamped - 50.0) / 1000.0;
    let f0 = f(0.0);
    loop {
        let ft = f(tol);
        if f0.signum() != ft.signum() {
            let t = brent(&f, 0.0, tol, f0, ft)?;
            return (t > 0.0).then(|| t.sqrt() * span);
        }
        if tol >= 0.1 {
            return None;
        }
        tol = (tol * 2.0).min(0.1);
    }
}

/// `sum_k k^(2s) a2_k exp(-k^2 pi^2 t)` with a multiplicative update for the exponentials.
fn weighted_sum(s: usize, t: f64, a2: &[f64]) -> f64 {
    let pw = &isj_tables().powers[s - 2];
    let q = (-PI * PI * t).exp();
    let q2 = q * q;
    let mut e = q;
    let mut r = q * q2;
    let mut sum = 0.0;
    for (k, (&w, &a)) in pw.iter().zip(a2).enumerate() {
        if e < 1e-290 && k > 0 {
            break;
        }
        sum += w * a * e;
        e *= r;
        r *= q2;
    }
    sum
}

fn fixed_point(t: f64, n: f64, a2: &[f64]) -> f64 {
    let l = ISJ_ORDER;
    let mut f = 2.0 * PI.powi(2 * l as i32) * weighted_sum(l, t, a2);
    for s in (2..l).rev() {
        let k0 = (1..2 * s).step_by(2).map(|v| v as f64).product::<f64>() / (2.0 * PI).sqrt();
        let cst = (1.0 + 0.5f64.powf(s as f64 + 0.5)) / 3.0;
        let time = (2.0 * cst * k0 / n / f).powf(2.0 / (3.0 + 2.0 * s as f64));
        f = 2.0 * PI.powi(2 * s as i32) * weighted_sum(s, time, a2);
    }
    t - (2.0 * n * PI.sqrt() * f).powf(-0.4)
}

/// DCT-II `C_k = sum_j x_j cos(pi k (2j+1) / 2n)` via one complex FFT.
fn dct2(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut v: Vec<Complex<f64>> = vec![Complex::new(0.0, 0.0); n];
    for m in 0..n.div_ceil(2) {
        v[m] = Complex::new(x[2 * m], 0.0);
    }
    for m in 0..n / 2 {
        v[n - 1 - m] = Complex::new(x[2 * m + 1], 0.0);
    }
    let fft = FftPlanner::new().plan_fft_forward(n);
    fft.process(&mut v);
    (0..n)
        .map(|k| {
            let w = Complex::from_polar(1.0, -PI * k as f64 / (2 * n) as f64);
            (w * v[k]).re
        })
        .collect()
}

/// Brent's root finder on a bracketing interval.
fn brent(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64, mut fb: f64) -> Option<f64> {
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.signum() == fb.signum() {
        return None;
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 1e-300;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Some(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q) = if a == c {
                (2.0 * m * s, 1.0 - s)
            } else {
                let q = fa / fc;
                let r = fb / fc;
                (
                    s * (2.0 * m * q * (q - r) - (b - a) * (r - 1.0)),
                    (q - 1.0) * (r - 1.0) * (s - 1.0),
                )
            };
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol * m.signum() };
        fb = f(b);
    }
    Some(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn normals(n: usize, seed: u64) -> Vec<f64> {
        let mut r = rng::stream(seed, 0);
        (0..n).map(|_| r.sample(StandardNormal)).collect()
    }

    #[test]
    fn dct_matches_direct_sum() {
        let x: Vec<f64> = (0..16).map(|i| ((i * 7 % 5) as f64).sin()).collect();
        let c = dct2(&x);
        for k in 0..16 {
            let direct: f64 = (0..16)
                .map(|j| x[j] * (PI * k as f64 * (2 * j + 1) as f64 / 32.0).cos())
                .sum();
            assert!((c[k] - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn large_normal_sample_matches_gaussian() {
        let s = normals(100_000, 5);
        let kde = GaussianKde::new(&s, BandwidthSelector::Isj).unwrap();
        assert_eq!(kde.method(), BandwidthMethod::Isj);
        let grid = linspace(-3.0, 3.0, 121);
        let (p, _) = kde.evaluate(&grid);
        for (x, v) in grid.iter().zip(&p) {
            let phi = (-0.5 * x * x).exp() / (2.0 * PI).sqrt();
            assert!((v - phi).abs() < 0.01, "x={x} p={v} phi={phi}");
        }
    }

    #[test]
    fn isj_bandwidth_near_reference_for_normal_sample() {
        // normal-reference optimum 1.06 n^(-1/5) = 0.267 at n = 1000
        let h = isj_bandwidth(&normals(1000, 3)).unwrap();
        assert!(h > 0.15 && h < 0.4, "bandwidth {h}");
    }

    #[test]
    fn recurrence_matches_direct_evaluation() {
        let s = normals(200, 8);
        let kde = GaussianKde::new(&s, BandwidthSelector::Fixed(0.3)).unwrap();
        let grid = kde.default_grid(401);
        let (p, dp) = kde.evaluate(&grid);
        let mut bumped = grid.clone();
        bumped[1] += 1e-12;
        let (pd, dpd) = kde.evaluate(&bumped);
        for j in [0, 50, 200, 350, 400] {
            assert!((p[j] - pd[j]).abs() < 1e-12);
            assert!((dp[j] - dpd[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn density_is_normalized_and_derivative_consistent() {
        let s = normals(500, 2);
        let d = estimate_density(&s, BandwidthSelector::Isj, 2001).unwrap();
        assert!((d.mass() - 1.0).abs() < 1e-3);
        let cd = central_difference(&d.grid, &d.p);
        let scale = d.dp.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let worst = (1..d.grid.len() - 1)
            .map(|i| (cd[i] - d.dp[i]).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-3 * scale, "worst {worst}");
    }

    #[test]
    fn repeated_value_gives_bump_at_value() {
        let d = estimate_density(&[3.5; 40], BandwidthSelector::Isj, 401).unwrap();
        assert_eq!(d.method, Some(BandwidthMethod::Degenerate));
        assert!((d.mode() - 3.5).abs() < 1e-6);
    }

    #[test]
    fn too_few_samples_is_an_error() {
        assert!(matches!(
            estimate_density(&[1.0; 29], BandwidthSelector::Isj, 401),
            Err(Error::TooFewSamples { .. })
        ));
    }
}
