//! Experiment configuration files. Unknown keys are rejected everywhere.

use bildsim_core::bell::{ChshAngles, HvStrategy};
use bildsim_core::brownian::LangevinConfig;
use bildsim_core::linalg::{ComplexMatrix, CovarianceOperator, DensityOperator, HermitianOperator};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::{CliError, RunOptions};

pub fn parse<T: DeserializeOwned>(text: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::config(format!("config: {e}")))
}

fn optimal() -> ChshAngles {
    ChshAngles::OPTIMAL
}

fn named<T>(field: &str, r: bildsim_core::Result<T>) -> Result<T, CliError> {
    r.map_err(|e| CliError::config(format!("{field}: {e}")))
}

fn check_dim(field: &str, m: &ComplexMatrix, dim: usize) -> Result<(), CliError> {
    if m.dim() != dim {
        return Err(CliError::config(format!("{field}: matrix is {0}x{0} but dim = {dim}", m.dim())));
    }
    Ok(())
}

pub fn covariance(field: &str, m: &ComplexMatrix, dim: usize) -> Result<CovarianceOperator, CliError> {
    check_dim(field, m, dim)?;
    named(field, HermitianOperator::new(m.clone()).and_then(CovarianceOperator::new))
}

pub fn hermitian(field: &str, m: &ComplexMatrix, dim: usize) -> Result<HermitianOperator, CliError> {
    check_dim(field, m, dim)?;
    named(field, HermitianOperator::new(m.clone()))
}

fn positive_samples(field: &str, n: usize) -> Result<(), CliError> {
    if n < 2 {
        return Err(CliError::config(format!("{field}: must be at least 2, got {n}")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PcsftAverageConfig {
    pub dim: usize,
    pub covariance: ComplexMatrix,
    pub kernel: ComplexMatrix,
    pub n_samples: usize,
    pub seed: u64,
}

impl PcsftAverageConfig {
    pub fn apply(&mut self, opts: &RunOptions) -> Result<(), CliError> {
        if let Some(s) = opts.seed {
            self.seed = s;
        }
        positive_samples("n_samples", self.n_samples)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PcsftCorrelationConfig {
    pub dim: usize,
    pub covariance: ComplexMatrix,
    pub kernel: ComplexMatrix,
    pub second_kernel: ComplexMatrix,
    pub n_samples: usize,
    pub seed: u64,
}

impl PcsftCorrelationConfig {
    pub fn apply(&mut self, opts: &RunOptions) -> Result<(), CliError> {
        if let Some(s) = opts.seed {
            self.seed = s;
        }
        positive_samples("n_samples", self.n_samples)
    }
}

/// Two-qubit state for the quantum CHSH bench.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    #[default]
    Singlet,
    Density { matrix: ComplexMatrix },
}

impl StateSpec {
    pub fn density(&self) -> Result<DensityOperator, CliError> {
        match self {
            StateSpec::Singlet => Ok(bildsim_core::bell::singlet_state()),
            StateSpec::Density { matrix } => {
                check_dim("state.matrix", matrix, 4)?;
                named("state.matrix", HermitianOperator::new(matrix.clone()).and_then(DensityOperator::new))
            }
        }
    }
}

fn default_grid() -> usize {
    61
}

fn default_sweep() -> usize {
    91
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChshQuantumConfig {
    #[serde(default = "optimal")]
    pub angles: ChshAngles,
    #[serde(default)]
    pub state: StateSpec,
    /// Angles per axis for the grid maximum.
    #[serde(default = "default_grid")]
    pub grid_points: usize,
    /// Points of the sweep `(0, 2t, t, -t)`, `t` in `[0, pi/2]`.
    #[serde(default = "default_sweep")]
    pub sweep_points: usize,
    #[serde(default)]
    pub seed: u64,
}

impl ChshQuantumConfig {
    pub fn apply(&mut self, opts: &RunOptions) -> Result<(), CliError> {
        if let Some(s) = opts.seed {
            self.seed = s;
        }
        named("angles", self.angles.validate())?;
        if self.grid_points < 2 || self.grid_points > 401 {
            return Err(CliError::config(format!("grid_points: must be in 2..=401, got {}", self.grid_points)));
        }
        if self.sweep_points < 2 {
            return Err(CliError::config("sweep_points: must be at least 2"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChshHvConfig {
    pub strategy: HvStrategy,
    pub n_samples: usize,
    pub seed: u64,
    /// Settings for the quantum reference column.
    #[serde(default = "optimal")]
    pub angles: ChshAngles,
}

impl ChshHvConfig {
    pub fn apply(&mut self, opts: &RunOptions) -> Result<(), CliError> {
        if let Some(s) = opts.seed {
            self.seed = s;
        }
        named("strategy", self.strategy.validate())?;
        named("angles", self.angles.validate())?;
        if self.n_samples < 8 {
            return Err(CliError::config(format!("n_samples: must be at least 8, got {}", self.n_samples)));
        }
        Ok(())
    }
}

pub fn apply_langevin(config: &mut LangevinConfig, opts: &RunOptions) -> Result<(), CliError> {
    if let Some(s) = opts.seed {
        config.seed = s;
    }
    if opts.paper_units {
        config.paper_units = true;
    }
    config.validate().map_err(CliError::from)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BinsConfig {
    pub lo: f64,
    pub hi: f64,
    pub n_bins: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DynamicsChoice {
    #[default]
    Overdamped,
    Underdamped,
}

fn default_min_occupancy() -> usize {
    bildsim_core::brownian::velocity::MIN_OCCUPANCY
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VelocityFieldConfig {
    pub langevin: LangevinConfig,
    #[serde(default)]
    pub dynamics: DynamicsChoice,
    pub epsilon: f64,
    pub bins: BinsConfig,
    #[serde(default)]
    pub particle: usize,
    #[serde(default = "default_min_occupancy")]
    pub min_occupancy: usize,
    /// Increments for the forward/backward gap table.
    #[serde(default)]
    pub epsilon_sweep: Vec<f64>,
    /// Position window `[lo, hi)` for the gap table.
    #[serde(default)]
    pub sweep_window: Option<[f64; 2]>,
    /// Momentum window `[lo, hi)` for the phase-space check (underdamped).
    #[serde(default)]
    pub momentum_window: Option<[f64; 2]>,
}

impl VelocityFieldConfig {
    pub fn apply(&mut self, opts: &RunOptions) -> Result<(), CliError> {
        apply_langevin(&mut self.langevin, opts)?;
        if self.particle >= self.langevin.n_particles {
            return Err(CliError::config(format!("particle: {} out of range", self.particle)));
        }
        if !self.epsilon_sweep.is_empty() && self.sweep_window.is_none() {
            return Err(CliError::config("sweep_window: required when epsilon_sweep is given"));
        }
        if self.momentum_window.is_some() && self.dynamics != DynamicsChoice::Underdamped {
            return Err(CliError::config("momentum_window: needs underdamped dynamics"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        let text = r#"{"strategy":{"kind":"mixture","weights":[1,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0]},"n_samples":10,"seed":1,"extra":0}"#;
        assert!(parse::<ChshHvConfig>(text).is_err());
    }

    #[test]
    fn dimension_mismatch_names_the_field() {
        let m = ComplexMatrix::identity(3);
        let e = covariance("covariance", &m, 2).unwrap_err();
        assert!(e.message.starts_with("covariance:"), "{}", e.message);
    }

    #[test]
    fn seed_override() {
        let mut c: ChshQuantumConfig = parse("{}").unwrap();
        c.apply(&RunOptions { seed: Some(9), paper_units: false }).unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.angles, ChshAngles::OPTIMAL);
    }
}
