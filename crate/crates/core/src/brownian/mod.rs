//! Brownian particles at the phase-space and configuration-space levels.

pub mod density;
pub mod fokker_planck;
pub mod io;
pub mod langevin;
pub mod potential;
pub mod velocity;

pub use langevin::{
    integrate_overdamped, integrate_underdamped, timescale_report, Dynamics, InitialCondition, LangevinConfig, Regime,
    TimescaleReport, TrajectoryEnsemble,
};
pub use potential::Potential;
pub use velocity::{
    coarse_velocity_backward, coarse_velocity_forward, momentum_resolution_check, nonsmoothness_witness,
    osmotic_velocity, BinSpec, VelocityFieldEstimate, VelocityOptions,
};
