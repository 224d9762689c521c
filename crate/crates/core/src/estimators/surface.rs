use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Error, Result};
use crate::estimators::kde::linspace;
use crate::estimators::{
    indicator_track, BandwidthSelector, Density, GaussianKde, IndicatorTrack, TrackConfig,
};
use crate::series::TimeSeries;

/// Empirical potential of one density and its deviation from the best parabola.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialProfile {
    /// `-(sigma^2/2) ln p` on supported points.
    pub u: Vec<Option<f64>>,
    /// `u` minus the least-squares parabola over supported points.
    pub deviation: Vec<Option<f64>>,
    /// Parabola coefficients `[a0, a1, a2]` of `a0 + a1 x + a2 x^2`.
    pub parabola: [f64; 3],
}

pub fn potential_from_density(density: &Density, sigma2: f64) -> Result<PotentialProfile> {
    if !(sigma2 > 0.0) || !sigma2.is_finite() {
        return Err(invalid("sigma2", format!("must be positive, got {sigma2}")));
    }
    let u: Vec<Option<f64>> = density
        .p
        .iter()
        .zip(&density.support_mask)
        .map(|(&p, &s)| (s && p > 0.0).then(|| -0.5 * sigma2 * p.ln()))
        .collect();
    let pts: Vec<(f64, f64)> = density
        .grid
        .iter()
        .zip(&u)
        .filter_map(|(&x, u)| u.map(|u| (x, u)))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientSupport {
            required: 3,
            actual: pts.len(),
        });
    }
    let a = DMatrix::from_fn(pts.len(), 3, |r, c| pts[r].0.powi(c as i32));
    let b = DVector::from_iterator(pts.len(), pts.iter().map(|p| p.1));
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    if svd.singular_values.min() <= 1e-12 * smax {
        return Err(Error::RankDeficient("potential parabola"));
    }
    let coef = svd
        .solve(&b, 1e-12 * smax)
        .map_err(|_| Error::RankDeficient("potential parabola"))?;
    let parabola = [coef[0], coef[1], coef[2]];
    let deviation = density
        .grid
        .iter()
        .zip(&u)
        .map(|(&x, u)| u.map(|u| u - (parabola[0] + parabola[1] * x + parabola[2] * x * x)))
        .collect();
    Ok(PotentialProfile {
        u,
        deviation,
        parabola,
    })
}

/// One time slice of the surface; `profile` is `None` for masked windows.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceColumn {
    pub t_center: f64,
    pub sigma2_emp: Option<f64>,
    pub supported: Vec<bool>,
    pub profile: Option<PotentialProfile>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSurface {
    pub time_centers: Vec<f64>,
    pub state_grid: Vec<f64>,
    pub columns: Vec<SurfaceColumn>,
}

/// Per-window empirical potential on a state grid shared by all windows.
pub fn potential_surface(ts: &TimeSeries, config: &TrackConfig) -> Result<PotentialSurface> {
    let track = indicator_track(ts, config)?;
    Ok(surface_from_track(&track, config))
}

/// As [`potential_surface`] for an already computed track.
pub fn surface_from_track(track: &IndicatorTrack, config: &TrackConfig) -> PotentialSurface {
    let residual = &track.detrend.residual;
    let max_h = track
        .indicators()
        .map(|w| w.kde_bandwidth)
        .fold(0.0, f64::max);
    let (lo, hi) = residual
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let state_grid = linspace(lo - 3.0 * max_h, hi + 3.0 * max_h, config.grid_points.max(3));

    let columns = track
        .windows
        .iter()
        .map(|w| {
            let window = &residual[w.start..w.start + track.window_len];
            let ind = w.outcome.as_ref().ok();
            let sigma2 = ind.and_then(|i| i.sigma2_emp);
            let density = ind.and_then(|i| {
                GaussianKde::new(window, BandwidthSelector::Fixed(i.kde_bandwidth))
                    .and_then(|k| k.density_on(state_grid.clone()))
                    .ok()
            });
            let supported = density
                .as_ref()
                .map(|d| d.support_mask.clone())
                .unwrap_or_else(|| vec![false; state_grid.len()]);
            let profile = match (&density, sigma2) {
                (Some(d), Some(s2)) => potential_from_density(d, s2).ok(),
                _ => None,
            };
            SurfaceColumn {
                t_center: w.t_center,
                sigma2_emp: sigma2,
                supported,
                profile,
            }
        })
        .collect();
    PotentialSurface {
        time_centers: track.windows.iter().map(|w| w.t_center).collect(),
        state_grid,
        columns,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{simulate_snf, SnfParams};
    use crate::estimators::{StepSpec, WindowSpec};

    #[test]
    fn gaussian_potential_is_a_parabola() {
        let grid = linspace(-3.0, 3.0, 301);
        let p: Vec<f64> = grid.iter().map(|x| (-x * x / 0.5).exp()).collect();
        let dp = grid.iter().zip(&p).map(|(x, p)| -4.0 * x * p).collect();
        let d = Density::from_analytic(grid, p, dp).unwrap();
        let prof = potential_from_density(&d, 1.3).unwrap();
        assert!(prof.deviation.iter().flatten().all(|v| v.abs() < 1e-6));
        assert!((prof.parabola[2] - 1.3).abs() < 1e-9);
    }

    #[test]
    fn minimum_sits_at_the_mode() {
        let grid = linspace(-2.5, 2.5, 301);
        let p: Vec<f64> = grid.iter().map(|&x| (-2.0 * x * x - 2.0 * x * x * x / 3.0).exp()).collect();
        let d = Density::from_values(grid.clone(), p).unwrap();
        let prof = potential_from_density(&d, 1.0).unwrap();
        let imin = prof
            .u
            .iter()
            .enumerate()
            .filter_map(|(i, u)| u.map(|u| (i, u)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap()
            .0;
        assert!((grid[imin] - d.mode()).abs() <= grid[1] - grid[0]);
        let s: f64 = prof.deviation.iter().flatten().sum();
        assert!(s.abs() < 1e-9);
    }

    #[test]
    fn surface_has_one_column_per_window() {
        let mut p = SnfParams::stationary(2.0, 0.7, 0.1, 800, 3);
        p.epsilon = 0.0;
        let ts = simulate_snf(&p).unwrap().trim_escape();
        let cfg = TrackConfig {
            window: WindowSpec::Fraction(0.5),
            step: StepSpec::FractionOfWindow(0.25),
            ..TrackConfig::default()
        };
        let s = potential_surface(&ts, &cfg).unwrap();
        assert_eq!(s.columns.len(), s.time_centers.len());
        assert!(s.columns.iter().any(|c| c.profile.is_some()));
        for c in &s.columns {
            assert_eq!(c.supported.len(), s.state_grid.len());
        }
    }
}
