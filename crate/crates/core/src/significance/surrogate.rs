use rayon::prelude::*;

use crate::dynamics::simulate_linear;
use crate::error::{Error, Result};
use crate::estimators::{indicator_track, Indicator, IndicatorTrack, TrackConfig};
use crate::series::TimeSeries;

/// How a track is reduced to one number per series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistic {
    Mean,
    Median,
}

impl Statistic {
    pub fn of(self, track: &IndicatorTrack, indicator: Indicator) -> Option<f64> {
        match self {
            Statistic::Mean => track.mean(indicator),
            Statistic::Median => track.median(indicator),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Statistic::Mean => "mean",
            Statistic::Median => "median",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateConfig {
    pub track: TrackConfig,
    pub indicators: Vec<Indicator>,
    pub n_surrogates: usize,
    pub seed: u64,
    pub statistic: Statistic,
}

impl Default for SurrogateConfig {
    fn default() -> Self {
        Self {
            track: TrackConfig::default(),
            indicators: Indicator::NONLINEAR.to_vec(),
            n_surrogates: 500,
            seed: 0,
            statistic: Statistic::Mean,
        }
    }
}

/// Parameters of the linear null model fitted to the observed series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchedLinear {
    pub kappa: f64,
    pub sigma2: f64,
    pub length: usize,
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateReport {
    pub indicator: Indicator,
    /// Statistic of the indicator over the observed track.
    pub observed: Option<f64>,
    /// One statistic per surrogate; `None` where the surrogate track had no value.
    pub surrogate_values: Vec<Option<f64>>,
    /// Midpoint tail percentile of `observed` among the available surrogate values.
    pub percentile: Option<f64>,
    pub n_surrogates: usize,
    pub matched: MatchedLinear,
    pub config_digest: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateTest {
    pub observed: IndicatorTrack,
    pub matched: MatchedLinear,
    pub reports: Vec<SurrogateReport>,
    pub config_digest: u64,
}

/// `100 (#below + #equal/2) / n`.
pub fn tail_percentile(observed: f64, values: &[f64]) -> f64 {
    let below = values.iter().filter(|&&v| v < observed).count() as f64;
    let equal = values.iter().filter(|&&v| v == observed).count() as f64;
    100.0 * (below + 0.5 * equal) / values.len() as f64
}

/// Compares the observed indicators with linear series matched in decay rate,
/// noise variance, length and spacing. Surrogate `i` is generated from `seed ^ i`
/// and analyzed with the identical track configuration.
pub fn surrogate_test(ts: &TimeSeries, config: &SurrogateConfig) -> Result<SurrogateTest> {
    let observed = indicator_track(ts, &config.track)?;
    if observed.indicators().next().is_none() {
        return Err(Error::EmptyTrack);
    }
    let kappa = match observed.mean(Indicator::KappaAcf) {
        Some(k) => k,
        None => {
            let alphas: Vec<f64> = observed.indicators().map(|w| w.alpha).collect();
            let alpha = alphas.iter().sum::<f64>() / alphas.len() as f64;
            return Err(Error::AcfOutOfDomain { alpha });
        }
    };
    let sigma2 = match observed.mean(Indicator::Sigma2Emp) {
        Some(s) if s > 0.0 => s,
        _ => {
            let ku = observed.mean(Indicator::KappaU).unwrap_or(f64::NAN);
            return Err(Error::NonPositiveKappaU(ku));
        }
    };
    let matched = MatchedLinear {
        kappa,
        sigma2,
        length: ts.len(),
        dt: observed.dt,
    };
    let digest = config.track.digest();

    let runs: Vec<Vec<Option<f64>>> = (0..config.n_surrogates as u64)
        .into_par_iter()
        .map(|i| {
            let run_config = config.track;
            debug_assert_eq!(run_config.digest(), digest);
            let series = simulate_linear(kappa, sigma2.sqrt(), matched.dt, matched.length, config.seed ^ i);
            match series.and_then(|s| indicator_track(&s, &run_config)) {
                Ok(track) => config
                    .indicators
                    .iter()
                    .map(|&ind| config.statistic.of(&track, ind))
                    .collect(),
                Err(_) => vec![None; config.indicators.len()],
            }
        })
        .collect();

    let reports = config
        .indicators
        .iter()
        .enumerate()
        .map(|(k, &indicator)| {
            let surrogate_values: Vec<Option<f64>> = runs.iter().map(|r| r[k]).collect();
            let obs = config.statistic.of(&observed, indicator);
            let available: Vec<f64> = surrogate_values.iter().flatten().copied().collect();
            let percentile = match obs {
                Some(o) if !available.is_empty() => Some(tail_percentile(o, &available)),
                _ => None,
            };
            SurrogateReport {
                indicator,
                observed: obs,
                surrogate_values,
                percentile,
                n_surrogates: config.n_surrogates,
                matched,
                config_digest: digest,
            }
        })
        .collect();

    Ok(SurrogateTest {
        observed,
        matched,
        reports,
        config_digest: digest,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::{StepSpec, WindowSpec};

    #[test]
    fn midpoint_ties() {
        assert_eq!(tail_percentile(2.0, &[1.0, 2.0, 3.0, 4.0]), 37.5);
        assert_eq!(tail_percentile(0.0, &[1.0, 2.0]), 0.0);
        assert_eq!(tail_percentile(9.0, &[1.0, 2.0]), 100.0);
    }

    fn small_config(seed: u64) -> SurrogateConfig {
        SurrogateConfig {
            track: TrackConfig {
                window: WindowSpec::Fraction(0.5),
                step: StepSpec::FractionOfWindow(0.25),
                ..TrackConfig::default()
            },
            n_surrogates: 12,
            seed,
            ..SurrogateConfig::default()
        }
    }

    #[test]
    fn reports_are_reproducible_and_complete() {
        let ts = simulate_linear(2.0, 1.0, 0.1, 300, 1 << 40).unwrap();
        let a = surrogate_test(&ts, &small_config(5)).unwrap();
        let b = surrogate_test(&ts, &small_config(5)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.reports.len(), 3);
        for r in &a.reports {
            assert_eq!(r.surrogate_values.len(), 12);
            let p = r.percentile.unwrap();
            assert!((0.0..=100.0).contains(&p));
            assert_eq!(r.config_digest, small_config(5).track.digest());
        }
        assert!((a.matched.kappa - 2.0).abs() < 1.0);
    }
}
