//! Indicator estimation on a single series.

mod acf;
mod detrend;
mod fit;
pub(crate) mod kde;
mod moments;
mod surface;
mod track;

pub use acf::{estimate_sigma2, fit_kappa_acf, AcfEstimate};
pub use detrend::{detrend, DetrendBandwidth, DetrendResult};
pub use fit::{fit_fp1, fit_fp2, Fp1Fit, Fp2Fit, MIN_SUPPORT_POINTS};
pub use kde::{
    estimate_density, isj_bandwidth, silverman_bandwidth, BandwidthMethod, BandwidthSelector,
    Density, GaussianKde, DEFAULT_GRID_POINTS, MIN_KDE_SAMPLES, SUPPORT_FRACTION,
};
pub use moments::{density_moments, sample_skewness, skewness, Moments};
pub use surface::{
    potential_from_density, potential_surface, surface_from_track, PotentialProfile, PotentialSurface, SurfaceColumn,
};
pub use track::{
    analyze_window, drift_ratio, indicator_track, track_drift_ratio, DriftRatio, Indicator,
    IndicatorTrack, StepSpec, TrackConfig, WindowIndicators, WindowResult, WindowSpec,
};
