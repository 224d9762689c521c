use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::estimators::{
    detrend, estimate_sigma2, fit_fp1, fit_fp2, fit_kappa_acf, skewness, BandwidthMethod,
    BandwidthSelector, DetrendBandwidth, DetrendResult, GaussianKde, DEFAULT_GRID_POINTS,
};
use crate::series::TimeSeries;

/// Sliding-window length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WindowSpec {
    /// Fraction of the series length.
    Fraction(f64),
    Samples(usize),
}

/// Distance between consecutive window starts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSpec {
    Samples(usize),
    FractionOfWindow(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackConfig {
    pub window: WindowSpec,
    pub step: StepSpec,
    pub detrend: DetrendBandwidth,
    pub kde: BandwidthSelector,
    pub grid_points: usize,
}

impl Default for TrackConfig {
    fn default() -> Self {
        Self {
            window: WindowSpec::Fraction(0.5),
            step: StepSpec::Samples(1),
            detrend: DetrendBandwidth::default(),
            kde: BandwidthSelector::Isj,
            grid_points: DEFAULT_GRID_POINTS,
        }
    }
}

impl TrackConfig {
    pub fn window_len(&self, n: usize) -> Result<usize> {
        let w = match self.window {
            WindowSpec::Fraction(f) => {
                if !(f > 0.0 && f <= 1.0) {
                    return Err(invalid("window", format!("fraction must be in (0, 1], got {f}")));
                }
                ((f * n as f64).round() as usize).max(1)
            }
            WindowSpec::Samples(w) => w,
        };
        if w < 3 || w > n {
            return Err(invalid("window", format!("{w} samples does not fit a series of {n}")));
        }
        Ok(w)
    }

    pub fn step_len(&self, window_len: usize) -> Result<usize> {
        match self.step {
            StepSpec::Samples(0) => Err(invalid("step", "must be at least one sample")),
            StepSpec::Samples(s) => Ok(s),
            StepSpec::FractionOfWindow(f) if f > 0.0 && f.is_finite() => {
                Ok(((f * window_len as f64).round() as usize).max(1))
            }
            StepSpec::FractionOfWindow(f) => Err(invalid("step", format!("fraction must be positive, got {f}"))),
        }
    }

    /// Canonical text form; equal configurations give equal strings.
    pub fn canonical(&self) -> String {
        let window = match self.window {
            WindowSpec::Fraction(f) => format!("fraction:{f}"),
            WindowSpec::Samples(s) => format!("samples:{s}"),
        };
        let step = match self.step {
            StepSpec::Samples(s) => format!("samples:{s}"),
            StepSpec::FractionOfWindow(f) => format!("window-fraction:{f}"),
        };
        let detrend = match self.detrend {
            DetrendBandwidth::FractionOfLength(f) => format!("fraction:{f}"),
            DetrendBandwidth::Samples(s) => format!("samples:{s}"),
            DetrendBandwidth::Time(t) => format!("time:{t}"),
        };
        let kde = match self.kde {
            BandwidthSelector::Isj => "isj".to_string(),
            BandwidthSelector::Silverman => "silverman".to_string(),
            BandwidthSelector::Fixed(h) => format!("fixed:{h}"),
        };
        format!(
            "window={window};step={step};detrend={detrend};kde={kde};grid={}",
            self.grid_points
        )
    }

    /// 64-bit FNV-1a hash of [`TrackConfig::canonical`], stable across builds.
    pub fn digest(&self) -> u64 {
        fnv1a(self.canonical().as_bytes())
    }
}

pub(crate) fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf29ce484222325u64, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x100000001b3)
    })
}

/// Estimates from one window of the detrended series.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowIndicators {
    pub t_center: f64,
    pub alpha: f64,
    /// `None` when the lag-1 coefficient lies outside `(0, 1)`.
    pub kappa_acf: Option<f64>,
    pub kappa_u: f64,
    pub c_emp: f64,
    /// Linear coefficient of the quadratic fit.
    pub kappa_u2: f64,
    pub n2: f64,
    pub c_emp2: f64,
    pub gamma: f64,
    /// `kappa_acf / kappa_u`; `None` if either is unavailable or `kappa_u <= 0`.
    pub sigma2_emp: Option<f64>,
    pub kde_bandwidth: f64,
    pub bandwidth_method: BandwidthMethod,
}

/// One window position and what came out of it.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowResult {
    pub start: usize,
    pub center_index: usize,
    pub t_center: f64,
    pub outcome: Result<WindowIndicators>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorTrack {
    pub windows: Vec<WindowResult>,
    pub detrend: DetrendResult,
    pub window_len: usize,
    pub step: usize,
    pub dt: f64,
}

/// Scalar indicators that can be tracked and tested.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Indicator {
    KappaAcf,
    KappaU,
    CEmp,
    N2,
    CEmp2,
    Gamma,
    Sigma2Emp,
}

impl Indicator {
    pub const ALL: [Indicator; 7] = [
        Indicator::KappaAcf,
        Indicator::KappaU,
        Indicator::CEmp,
        Indicator::N2,
        Indicator::CEmp2,
        Indicator::Gamma,
        Indicator::Sigma2Emp,
    ];
    /// The indicators that respond to nonlinearity of the well.
    pub const NONLINEAR: [Indicator; 3] = [Indicator::CEmp, Indicator::N2, Indicator::Gamma];

    pub fn name(self) -> &'static str {
        match self {
            Indicator::KappaAcf => "kappa_acf",
            Indicator::KappaU => "kappa_u",
            Indicator::CEmp => "c_emp",
            Indicator::N2 => "n2",
            Indicator::CEmp2 => "c_emp2",
            Indicator::Gamma => "gamma",
            Indicator::Sigma2Emp => "sigma2_emp",
        }
    }

    pub fn value(self, w: &WindowIndicators) -> Option<f64> {
        match self {
            Indicator::KappaAcf => w.kappa_acf,
            Indicator::KappaU => Some(w.kappa_u),
            Indicator::CEmp => Some(w.c_emp),
            Indicator::N2 => Some(w.n2),
            Indicator::CEmp2 => Some(w.c_emp2),
            Indicator::Gamma => Some(w.gamma),
            Indicator::Sigma2Emp => w.sigma2_emp,
        }
    }
}

impl fmt::Display for Indicator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Indicator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Indicator::ALL
            .into_iter()
            .find(|i| i.name() == s.trim())
            .ok_or_else(|| Error::Parse(format!("unknown indicator '{s}'")))
    }
}

impl IndicatorTrack {
    pub fn indicators(&self) -> impl Iterator<Item = &WindowIndicators> {
        self.windows.iter().filter_map(|w| w.outcome.as_ref().ok())
    }

    /// Per-window values with gaps for failed windows.
    pub fn values(&self, indicator: Indicator) -> Vec<Option<f64>> {
        self.windows
            .iter()
            .map(|w| w.outcome.as_ref().ok().and_then(|v| indicator.value(v)))
            .collect()
    }

    /// Mean over windows where the indicator is available.
    pub fn mean(&self, indicator: Indicator) -> Option<f64> {
        let v: Vec<f64> = self.values(indicator).into_iter().flatten().collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }

    pub fn median(&self, indicator: Indicator) -> Option<f64> {
        let mut v: Vec<f64> = self.values(indicator).into_iter().flatten().collect();
        if v.is_empty() {
            return None;
        }
        v.sort_by(f64::total_cmp);
        let m = v.len() / 2;
        Some(if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) })
    }
}

/// Indicators for a single residual window.
pub fn analyze_window(
    residual: &[f64],
    dt: f64,
    t_center: f64,
    config: &TrackConfig,
) -> Result<WindowIndicators> {
    let kde = GaussianKde::new(residual, config.kde)?;
    let density = kde.density(config.grid_points)?;
    let fp1 = fit_fp1(&density)?;
    let fp2 = fit_fp2(&density)?;
    let gamma = skewness(&density)?;
    let acf = fit_kappa_acf(residual, dt)?;
    let kappa_acf = acf.kappa();
    let sigma2_emp = kappa_acf.and_then(|k| estimate_sigma2(k, fp1.kappa_u).ok());
    Ok(WindowIndicators {
        t_center,
        alpha: acf.alpha(),
        kappa_acf,
        kappa_u: fp1.kappa_u,
        c_emp: fp1.c_emp,
        kappa_u2: fp2.kappa_u,
        n2: fp2.n2,
        c_emp2: fp2.c_emp2,
        gamma,
        sigma2_emp,
        kde_bandwidth: kde.bandwidth(),
        bandwidth_method: kde.method(),
    })
}

/// Detrends once, then estimates indicators in windows whose starts are
/// multiples of the step. Window failures are kept as gaps.
pub fn indicator_track(ts: &TimeSeries, config: &TrackConfig) -> Result<IndicatorTrack> {
    let dt = ts.require_uniform()?;
    let n = ts.len();
    let w = config.window_len(n)?;
    let step = config.step_len(w)?;
    let detrended = detrend(ts, config.detrend)?;
    let times = ts.times();
    let starts: Vec<usize> = (0..=n - w).step_by(step).collect();
    let windows = starts
        .par_iter()
        .map(|&start| {
            let t_center = 0.5 * (times[start] + times[start + w - 1]);
            WindowResult {
                start,
                center_index: start + w / 2,
                t_center,
                outcome: analyze_window(&detrended.residual[start..start + w], dt, t_center, config),
            }
        })
        .collect();
    Ok(IndicatorTrack {
        windows,
        detrend: detrended,
        window_len: w,
        step,
        dt,
    })
}

/// Least-squares slope of decay rate against equilibrium position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DriftRatio {
    /// `ratio = d kappa / d x_eq`; for the normal form the quadratic coefficient is `ratio / 2`.
    Ratio { ratio: f64, quadratic: f64 },
    /// The equilibrium does not move, so no ratio exists.
    OutOfDomain,
}

/// Slope of `kappa` on `x_eq` over `(x_eq, kappa)` pairs.
pub fn drift_ratio(points: &[(f64, f64)]) -> Result<DriftRatio> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|(x, k)| x.is_finite() && k.is_finite())
        .collect();
    if pts.len() < 2 {
        return Err(Error::EmptyTrack);
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mk = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxk: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - mk)).sum();
    let scale: f64 = pts.iter().map(|p| p.0 * p.0).sum::<f64>().max(f64::MIN_POSITIVE);
    if sxx <= 1e-24 * scale {
        return Ok(DriftRatio::OutOfDomain);
    }
    let ratio = sxk / sxx;
    Ok(DriftRatio::Ratio {
        ratio,
        quadratic: ratio / 2.0,
    })
}

/// [`drift_ratio`] of the track's `kappa_acf` against the trend at window centers.
pub fn track_drift_ratio(track: &IndicatorTrack) -> Result<DriftRatio> {
    let pts: Vec<(f64, f64)> = track
        .windows
        .iter()
        .filter_map(|w| {
            let k = w.outcome.as_ref().ok()?.kappa_acf?;
            Some((track.detrend.trend[w.center_index], k))
        })
        .collect();
    drift_ratio(&pts)
}
