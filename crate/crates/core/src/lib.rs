//! Numerical laboratory for two-level descriptions of physical systems: a
//! causal model with hidden quantities (random fields, hidden variables,
//! Brownian phase-space trajectories) coupled to an observational model
//! (quantum averages, CHSH correlations, coarse-grained velocities).
//!
//! - [`linalg`]: Hermitian, density and covariance operators on `C^d`.
//! - [`pcsft`]: Gaussian random fields, quadratic-form variables and the
//!   covariance-to-density correspondence.
//! - [`bell`]: quantum CHSH correlations and local hidden-variable streams.
//! - [`brownian`]: underdamped and overdamped Langevin ensembles,
//!   Fokker-Planck residuals and forward/backward/osmotic velocities.
//! - [`acceptance`]: the end-to-end criteria used by the test suite and the
//!   `bildsim acceptance` command.

pub mod acceptance;
pub mod bell;
pub mod brownian;
pub mod error;
pub mod linalg;
mod par;
pub mod pcsft;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
