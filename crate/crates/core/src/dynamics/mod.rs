//! Synthetic data and ground truth for the saddle-node normal form.
//!
//! * [`simulate_snf`] integrates `dx = (mu - x^2) dt + sigma dW` with a slowly
//!   drifting `mu`, stopping at escape.
//! * [`simulate_linear`] produces the Ornstein-Uhlenbeck null model used for surrogates.
//! * [`conditional_ensemble`] estimates the density of not-yet-escaped realizations.
//! * [`stationary_fp_solve`] solves the stationary Fokker-Planck equation by quadrature.

mod ensemble;
mod fokker_planck;
mod simulate;

pub use ensemble::{conditional_ensemble, EnsembleParams, EnsembleResult, MomentErrors};
pub use fokker_planck::{fp_ode_residual, stationary_fp_solve, FpGrid, FpSolution, DEFAULT_MIN_POINTS};
pub use simulate::{simulate_linear, simulate_snf, SnfParams};
