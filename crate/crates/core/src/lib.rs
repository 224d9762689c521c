//! Nonlinear early-warning indicators for noisy approaches to a fold.
//!
//! A slowly forced system near a saddle-node sits in a potential well that
//! loses its curvature and becomes asymmetric before it vanishes. This crate
//! estimates that shape from a single time series:
//!
//! * the linear decay rate from the lag-1 autocorrelation ([`estimators::fit_kappa_acf`]),
//! * the decay rate, escape flux and quadratic drift term from fits of the stationary
//!   Fokker-Planck equation to a kernel density ([`estimators::fit_fp1`], [`estimators::fit_fp2`]),
//! * the skewness of that density and the implied noise level,
//!
//! in sliding windows ([`estimators::indicator_track`]), and judges them against
//! linear surrogates ([`significance::surrogate_test`]). The [`dynamics`] module
//! provides synthetic series and exact reference densities; [`pipeline`] wires it
//! all to CSV files and a command line.
//!
//! ```
//! use tipwell::dynamics::simulate_linear;
//! use tipwell::estimators::{indicator_track, TrackConfig, WindowSpec, StepSpec};
//!
//! let ts = simulate_linear(2.0, 1.0, 0.1, 600, 7).unwrap();
//! let cfg = TrackConfig {
//!     window: WindowSpec::Fraction(0.5),
//!     step: StepSpec::Samples(100),
//!     ..TrackConfig::default()
//! };
//! let track = indicator_track(&ts, &cfg).unwrap();
//! assert!(track.windows.iter().any(|w| w.outcome.is_ok()));
//! ```

pub mod dynamics;
pub mod error;
pub mod estimators;
pub mod pipeline;
pub mod rng;
pub mod series;
pub mod significance;

pub use error::{Error, Result};
pub use series::{Censoring, TimeSeries};
