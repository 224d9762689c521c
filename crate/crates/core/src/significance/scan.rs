use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::estimators::{DetrendBandwidth, Indicator, WindowSpec, MIN_KDE_SAMPLES};
use crate::series::TimeSeries;
use crate::significance::{surrogate_test, SurrogateConfig};

/// Percentile levels at which contours are exported.
pub const CONTOUR_LEVELS: [f64; 10] = [10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0, 90.0, 95.0];

/// `n` values `2^e` with exponents evenly spaced on `[lo_exp, hi_exp]`.
pub fn log2_spaced(lo_exp: f64, hi_exp: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo_exp.exp2()];
    }
    (0..n)
        .map(|i| (lo_exp + (hi_exp - lo_exp) * i as f64 / (n - 1) as f64).exp2())
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanConfig {
    /// Window lengths as fractions of the series length.
    pub window_fractions: Vec<f64>,
    /// Detrending bandwidths as fractions of the series length.
    pub bandwidth_fractions: Vec<f64>,
    /// Surrogate settings shared by every cell; window and detrending are overridden per cell.
    pub surrogate: SurrogateConfig,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            window_fractions: log2_spaced(-3.0, 0.0, 7),
            bandwidth_fractions: log2_spaced(-6.0, -1.0, 7),
            surrogate: SurrogateConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityGrid {
    pub window_fractions: Vec<f64>,
    pub bandwidth_fractions: Vec<f64>,
    pub indicators: Vec<Indicator>,
    /// `percentile[indicator][bandwidth][window]`; `None` for failed cells.
    pub percentile: Vec<Vec<Vec<Option<f64>>>>,
}

impl SensitivityGrid {
    pub fn matrix(&self, indicator: Indicator) -> Option<&Vec<Vec<Option<f64>>>> {
        let k = self.indicators.iter().position(|&i| i == indicator)?;
        Some(&self.percentile[k])
    }
}

fn cell_seed(seed: u64, cell: usize) -> u64 {
    seed ^ ((cell as u64 + 1) << 32)
}

/// Reruns the surrogate test for every (window, bandwidth) pair with its own seed family.
pub fn sensitivity_scan(ts: &TimeSeries, config: &ScanConfig) -> Result<SensitivityGrid> {
    let n = ts.len();
    for (name, axis) in [
        ("window_fractions", &config.window_fractions),
        ("bandwidth_fractions", &config.bandwidth_fractions),
    ] {
        if axis.is_empty() || axis.windows(2).any(|w| !(w[1] > w[0])) || axis.iter().any(|&v| !(v > 0.0)) {
            return Err(invalid(name, "must be positive and strictly increasing"));
        }
    }
    if let Some(&f) = config.window_fractions.iter().find(|&&f| {
        ((f * n as f64).round() as usize) < MIN_KDE_SAMPLES || f > 1.0
    }) {
        return Err(invalid(
            "window_fractions",
            format!("fraction {f} of {n} samples is outside [{MIN_KDE_SAMPLES} samples, 1]"),
        ));
    }
    let nw = config.window_fractions.len();
    let nb = config.bandwidth_fractions.len();
    let cells: Vec<Option<Vec<Option<f64>>>> = (0..nw * nb)
        .into_par_iter()
        .map(|cell| {
            let (b, w) = (cell / nw, cell % nw);
            let mut sc = config.surrogate.clone();
            sc.track.window = WindowSpec::Fraction(config.window_fractions[w]);
            sc.track.detrend = DetrendBandwidth::FractionOfLength(config.bandwidth_fractions[b]);
            sc.seed = cell_seed(config.surrogate.seed, cell);
            surrogate_test(ts, &sc)
                .ok()
                .map(|t| t.reports.iter().map(|r| r.percentile).collect())
        })
        .collect();

    let indicators = config.surrogate.indicators.clone();
    let percentile = (0..indicators.len())
        .map(|k| {
            (0..nb)
                .map(|b| {
                    (0..nw)
                        .map(|w| cells[b * nw + w].as_ref().and_then(|c| c[k]))
                        .collect()
                })
                .collect()
        })
        .collect();
    Ok(SensitivityGrid {
        window_fractions: config.window_fractions.clone(),
        bandwidth_fractions: config.bandwidth_fractions.clone(),
        indicators,
        percentile,
    })
}

/// A contour piece in `(log2 window fraction, log2 bandwidth fraction)` coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourSegment {
    pub level: f64,
    pub from: (f64, f64),
    pub to: (f64, f64),
}

/// Marching-squares contour of one indicator's percentile matrix.
///
/// Cells with a missing corner are skipped; saddles are split by the cell mean.
pub fn contour_segments(grid: &SensitivityGrid, indicator: Indicator, level: f64) -> Vec<ContourSegment> {
    let Some(z) = grid.matrix(indicator) else {
        return Vec::new();
    };
    let xs: Vec<f64> = grid.window_fractions.iter().map(|v| v.log2()).collect();
    let ys: Vec<f64> = grid.bandwidth_fractions.iter().map(|v| v.log2()).collect();
    let mut out = Vec::new();
    for j in 0..ys.len().saturating_sub(1) {
        for i in 0..xs.len().saturating_sub(1) {
            // corners counter-clockwise from bottom-left
            let corners = [
                (xs[i], ys[j], z[j][i]),
                (xs[i + 1], ys[j], z[j][i + 1]),
                (xs[i + 1], ys[j + 1], z[j + 1][i + 1]),
                (xs[i], ys[j + 1], z[j + 1][i]),
            ];
            let Some(v) = corners
                .iter()
                .map(|c| c.2)
                .collect::<Option<Vec<f64>>>()
            else {
                continue;
            };
            let above: Vec<bool> = v.iter().map(|&x| x >= level).collect();
            let crossing = |a: usize, b: usize| {
                let (pa, pb) = (corners[a], corners[b]);
                let t = (level - v[a]) / (v[b] - v[a]);
                (pa.0 + t * (pb.0 - pa.0), pa.1 + t * (pb.1 - pa.1))
            };
            let edges: Vec<usize> = (0..4).filter(|&e| above[e] != above[(e + 1) % 4]).collect();
            let point = |e: usize| crossing(e, (e + 1) % 4);
            let mut push = |a: usize, b: usize| {
                out.push(ContourSegment {
                    level,
                    from: point(a),
                    to: point(b),
                })
            };
            match edges.len() {
                2 => push(edges[0], edges[1]),
                4 => {
                    let center_above = v.iter().sum::<f64>() / 4.0 >= level;
                    if center_above == above[0] {
                        push(0, 1);
                        push(2, 3);
                    } else {
                        push(3, 0);
                        push(1, 2);
                    }
                }
                _ => {}
            }
        }
    }
    out
}
