use crate::error::{invalid, Error, Result};
use crate::series::TimeSeries;

/// Weights are dropped beyond this many bandwidths.
const TRUNCATE_BANDWIDTHS: f64 = 8.0;

/// Width of the Gaussian smoothing kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DetrendBandwidth {
    /// Fraction of the series length, converted to samples.
    FractionOfLength(f64),
    /// Kernel standard deviation in samples; requires uniform spacing.
    Samples(f64),
    /// Kernel standard deviation in time units.
    Time(f64),
}

impl Default for DetrendBandwidth {
    fn default() -> Self {
        DetrendBandwidth::FractionOfLength(1.0 / 20.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetrendResult {
    pub trend: Vec<f64>,
    pub residual: Vec<f64>,
    /// Kernel standard deviation in time units.
    pub bandwidth_time: f64,
    /// Kernel standard deviation in samples, when spacing is uniform.
    pub bandwidth_samples: Option<f64>,
}

/// Gaussian-kernel moving average with weights renormalized at the edges.
pub fn detrend(ts: &TimeSeries, bandwidth: DetrendBandwidth) -> Result<DetrendResult> {
    let n = ts.len();
    if n < 3 {
        return Err(Error::TooFewSamples {
            required: 3,
            actual: n,
        });
    }
    let dt = ts.uniform_dt();
    let bw_time = match bandwidth {
        DetrendBandwidth::FractionOfLength(f) => {
            positive("bandwidth", f)?;
            let samples = f * n as f64;
            match dt {
                Some(dt) => samples * dt,
                None => samples * (ts.times()[n - 1] - ts.times()[0]) / (n - 1) as f64,
            }
        }
        DetrendBandwidth::Samples(s) => {
            positive("bandwidth", s)?;
            s * ts.require_uniform()?
        }
        DetrendBandwidth::Time(t) => {
            positive("bandwidth", t)?;
            t
        }
    };
    let spacing = ts.min_spacing().expect("at least 3 samples");
    if bw_time < spacing {
        return Err(Error::BandwidthBelowSpacing {
            bandwidth: bw_time,
            spacing,
        });
    }

    let x = ts.values();
    let trend = match dt {
        Some(dt) => smooth_uniform(x, bw_time / dt),
        None => smooth_general(ts.times(), x, bw_time),
    };
    let residual = x.iter().zip(&trend).map(|(v, t)| v - t).collect();
    Ok(DetrendResult {
        trend,
        residual,
        bandwidth_time: bw_time,
        bandwidth_samples: dt.map(|dt| bw_time / dt),
    })
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(name, format!("must be positive, got {v}")))
    }
}

fn smooth_uniform(x: &[f64], bw: f64) -> Vec<f64> {
    let n = x.len();
    let reach = ((TRUNCATE_BANDWIDTHS * bw).ceil() as usize).min(n - 1);
    let w: Vec<f64> = (0..=reach)
        .map(|lag| {
            let u = lag as f64 / bw;
            (-0.5 * u * u).exp()
        })
        .collect();
    (0..n)
        .map(|k| {
            let lo = k.saturating_sub(reach);
            let hi = (k + reach).min(n - 1);
            let mut num = 0.0;
            let mut den = 0.0;
            for j in lo..=hi {
                let wj = w[k.abs_diff(j)];
                num += wj * x[j];
                den += wj;
            }
            num / den
        })
        .collect()
}

fn smooth_general(t: &[f64], x: &[f64], bw: f64) -> Vec<f64> {
    let cutoff = TRUNCATE_BANDWIDTHS * bw;
    t.iter()
        .map(|&tk| {
            let lo = t.partition_point(|&s| s < tk - cutoff);
            let hi = t.partition_point(|&s| s <= tk + cutoff);
            let mut num = 0.0;
            let mut den = 0.0;
            for j in lo..hi {
                let u = (t[j] - tk) / bw;
                let wj = (-0.5 * u * u).exp();
                num += wj * x[j];
                den += wj;
            }
            num / den
        })
        .collect()
}
