//! Coarse-grained velocities at a finite time increment `epsilon`.
//!
//! For reference records `t` the forward sample is `(x(t+eps) - x(t))/eps`
//! and the backward sample is `(x(t) - x(t-eps))/eps`, both binned by
//! `x(t)`. Reference records are spaced `2 eps` apart so the windows
//! `[t - eps, t + eps]` of one trajectory never overlap and the noise in
//! successive samples is independent. The osmotic velocity is
//! `u = (v_minus - v_plus)/2`, which should equal `-D d/dx ln P`.

use serde::Serialize;

use super::density::{log_density_gradient, silverman_bandwidth};
use super::langevin::TrajectoryEnsemble;
use crate::error::{Error, Result};

/// Bins with fewer samples are reported as missing.
pub const MIN_OCCUPANCY: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BinSpec {
    pub lo: f64,
    pub hi: f64,
    pub n_bins: usize,
}

impl BinSpec {
    pub fn new(lo: f64, hi: f64, n_bins: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi && n_bins > 0) {
            return Err(Error::Validation(format!("bins need finite lo < hi and n_bins > 0, got [{lo}, {hi}] x {n_bins}")));
        }
        Ok(Self { lo, hi, n_bins })
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.n_bins as f64
    }

    pub fn center(&self, k: usize) -> f64 {
        self.lo + (k as f64 + 0.5) * self.width()
    }

    pub fn index(&self, x: f64) -> Option<usize> {
        if !(x >= self.lo && x < self.hi) {
            return None;
        }
        Some((((x - self.lo) / self.width()) as usize).min(self.n_bins - 1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocityOptions {
    pub particle: usize,
    pub min_occupancy: usize,
}

impl Default for VelocityOptions {
    fn default() -> Self {
        Self { particle: 0, min_occupancy: MIN_OCCUPANCY }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VelocityKind {
    Forward,
    Backward,
    Osmotic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VelocityBin {
    pub center: f64,
    pub value: f64,
    pub std_error: f64,
    pub count: usize,
    /// Mean of the conditioning positions that fell in the bin.
    pub mean_position: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VelocityFieldEstimate {
    pub kind: VelocityKind,
    pub particle: usize,
    pub epsilon: f64,
    pub bins: BinSpec,
    /// `None` for bins below the minimum occupancy.
    pub values: Vec<Option<VelocityBin>>,
}

impl VelocityFieldEstimate {
    pub fn bin_width(&self) -> f64 {
        self.bins.width()
    }

    /// The bin containing `x`, if it is populated.
    pub fn at(&self, x: f64) -> Option<&VelocityBin> {
        self.bins.index(x).and_then(|k| self.values[k].as_ref())
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Accumulator {
    count: usize,
    sum: f64,
    sum_sq: f64,
    sum_x: f64,
}

impl Accumulator {
    fn push(&mut self, value: f64, x: f64) {
        self.count += 1;
        self.sum += value;
        self.sum_sq += value * value;
        self.sum_x += x;
    }

    fn mean(&self) -> f64 {
        self.sum / self.count as f64
    }

    fn std_error(&self) -> f64 {
        let n = self.count as f64;
        if self.count < 2 {
            return f64::INFINITY;
        }
        let var = ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    }
}

/// Record offset for `epsilon` after checking it against the grid.
pub fn epsilon_steps(ensemble: &TrajectoryEnsemble, epsilon: f64) -> Result<usize> {
    let dt = ensemble.config.dt;
    if !(epsilon.is_finite() && epsilon >= 2.0 * dt * (1.0 - 1e-9)) {
        return Err(Error::Validation(format!("epsilon = {epsilon} must be at least 2 dt = {}", 2.0 * dt)));
    }
    let record_dt = ensemble.record_dt();
    let m = (epsilon / record_dt).round() as usize;
    if m == 0 || (m as f64 * record_dt - epsilon).abs() > 1e-9 * epsilon.max(record_dt) {
        return Err(Error::Validation(format!(
            "epsilon = {epsilon} is not a multiple of the recorded spacing {record_dt}"
        )));
    }
    if 2 * m >= ensemble.n_records() {
        return Err(Error::Validation(format!("epsilon = {epsilon} does not fit twice into the recorded span")));
    }
    Ok(m)
}

fn reference_records(n_records: usize, m: usize) -> impl Iterator<Item = usize> {
    (m..n_records - m).step_by(2 * m)
}

fn check_particle(ensemble: &TrajectoryEnsemble, particle: usize) -> Result<()> {
    if particle >= ensemble.n_particles() {
        return Err(Error::Validation(format!("particle {particle} out of range (N = {})", ensemble.n_particles())));
    }
    Ok(())
}

fn directional(
    ensemble: &TrajectoryEnsemble,
    epsilon: f64,
    bins: &BinSpec,
    opts: &VelocityOptions,
    kind: VelocityKind,
) -> Result<VelocityFieldEstimate> {
    check_particle(ensemble, opts.particle)?;
    let m = epsilon_steps(ensemble, epsilon)?;
    let eps = m as f64 * ensemble.record_dt();
    let j = opts.particle;
    let mut acc = vec![Accumulator::default(); bins.n_bins];
    for t in 0..ensemble.n_trajectories() {
        for r in reference_records(ensemble.n_records(), m) {
            let x = ensemble.position(t, r, j);
            let Some(k) = bins.index(x) else { continue };
            let v = match kind {
                VelocityKind::Forward => (ensemble.position(t, r + m, j) - x) / eps,
                _ => (x - ensemble.position(t, r - m, j)) / eps,
            };
            acc[k].push(v, x);
        }
    }
    Ok(VelocityFieldEstimate { kind, particle: j, epsilon: eps, bins: *bins, values: finish(&acc, bins, opts) })
}

fn finish(acc: &[Accumulator], bins: &BinSpec, opts: &VelocityOptions) -> Vec<Option<VelocityBin>> {
    acc.iter()
        .enumerate()
        .map(|(k, a)| {
            (a.count >= opts.min_occupancy.max(2)).then(|| VelocityBin {
                center: bins.center(k),
                value: a.mean(),
                std_error: a.std_error(),
                count: a.count,
                mean_position: a.sum_x / a.count as f64,
            })
        })
        .collect()
}

/// Mean rate of displacement forward in time, conditioned on `x(t)`.
pub fn coarse_velocity_forward(
    ensemble: &TrajectoryEnsemble,
    epsilon: f64,
    bins: &BinSpec,
    opts: &VelocityOptions,
) -> Result<VelocityFieldEstimate> {
    directional(ensemble, epsilon, bins, opts, VelocityKind::Forward)
}

/// Mean rate of displacement of arrival at `x(t)` from `x(t - eps)`.
pub fn coarse_velocity_backward(
    ensemble: &TrajectoryEnsemble,
    epsilon: f64,
    bins: &BinSpec,
    opts: &VelocityOptions,
) -> Result<VelocityFieldEstimate> {
    directional(ensemble, epsilon, bins, opts, VelocityKind::Backward)
}

/// `u = (v_minus - v_plus)/2`, bin by bin, errors added in quadrature.
pub fn osmotic_velocity(v_plus: &VelocityFieldEstimate, v_minus: &VelocityFieldEstimate) -> Result<VelocityFieldEstimate> {
    if v_plus.kind != VelocityKind::Forward || v_minus.kind != VelocityKind::Backward {
        return Err(Error::BinMismatch("expected a forward and a backward estimate".into()));
    }
    if v_plus.bins != v_minus.bins {
        return Err(Error::BinMismatch("bin layouts differ".into()));
    }
    if (v_plus.epsilon - v_minus.epsilon).abs() > 1e-12 * v_plus.epsilon {
        return Err(Error::BinMismatch(format!("epsilon {} vs {}", v_plus.epsilon, v_minus.epsilon)));
    }
    if v_plus.particle != v_minus.particle {
        return Err(Error::BinMismatch("estimates are for different particles".into()));
    }
    let values = v_plus
        .values
        .iter()
        .zip(&v_minus.values)
        .map(|(p, m)| match (p, m) {
            (Some(p), Some(m)) => Some(VelocityBin {
                center: p.center,
                value: (m.value - p.value) / 2.0,
                std_error: p.std_error.hypot(m.std_error) / 2.0,
                count: p.count.min(m.count),
                mean_position: 0.5 * (p.mean_position + m.mean_position),
            }),
            _ => None,
        })
        .collect();
    Ok(VelocityFieldEstimate { kind: VelocityKind::Osmotic, particle: v_plus.particle, epsilon: v_plus.epsilon, bins: v_plus.bins, values })
}

/// `-D d/dx ln P(x)` from a Gaussian KDE of the conditioning positions,
/// evaluated at each populated bin's mean position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityOsmotic {
    pub position: f64,
    pub value: f64,
    pub std_error: f64,
    pub bandwidth: f64,
}

pub fn osmotic_from_density(
    ensemble: &TrajectoryEnsemble,
    reference: &VelocityFieldEstimate,
) -> Result<Vec<Option<DensityOsmotic>>> {
    let j = reference.particle;
    check_particle(ensemble, j)?;
    let m = epsilon_steps(ensemble, reference.epsilon)?;
    let clusters: Vec<Vec<f64>> = (0..ensemble.n_trajectories())
        .map(|t| reference_records(ensemble.n_records(), m).map(|r| ensemble.position(t, r, j)).collect())
        .collect();
    let pooled: Vec<f64> = clusters.iter().flatten().copied().collect();
    if pooled.len() < 2 {
        return Err(Error::InsufficientSamples { got: pooled.len(), need: 2 });
    }
    let h = silverman_bandwidth(&pooled);
    let d = ensemble.config.diffusion(j);
    Ok(reference
        .values
        .iter()
        .map(|b| {
            b.map(|b| {
                let g = log_density_gradient(&clusters, b.mean_position, h);
                DensityOsmotic { position: b.mean_position, value: -d * g.value, std_error: d * g.std_error, bandwidth: h }
            })
        })
        .collect())
}

/// One row of the velocity-field table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VelocityRow {
    pub bin_center: f64,
    pub v_plus: f64,
    pub v_plus_err: f64,
    pub v_minus: f64,
    pub v_minus_err: f64,
    pub u: f64,
    pub u_err: f64,
    pub epsilon: f64,
    pub count: usize,
}

pub fn velocity_rows(v_plus: &VelocityFieldEstimate, v_minus: &VelocityFieldEstimate) -> Result<Vec<VelocityRow>> {
    let u = osmotic_velocity(v_plus, v_minus)?;
    Ok(v_plus
        .values
        .iter()
        .zip(&v_minus.values)
        .zip(&u.values)
        .filter_map(|((p, m), u)| {
            let (p, m, u) = (p.as_ref()?, m.as_ref()?, u.as_ref()?);
            Some(VelocityRow {
                bin_center: p.center,
                v_plus: p.value,
                v_plus_err: p.std_error,
                v_minus: m.value,
                v_minus_err: m.std_error,
                u: u.value,
                u_err: u.std_error,
                epsilon: v_plus.epsilon,
                count: u.count,
            })
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NonsmoothnessRow {
    pub epsilon: f64,
    pub v_plus: f64,
    pub v_plus_err: f64,
    pub v_minus: f64,
    pub v_minus_err: f64,
    /// `v_minus - v_plus`, estimated per sample as
    /// `(2 x(t) - x(t-eps) - x(t+eps))/eps`.
    pub gap: f64,
    pub gap_err: f64,
    pub count: usize,
}

/// Forward/backward velocities in the position window `[lo, hi)` for each
/// `epsilon`.
pub fn nonsmoothness_witness(
    ensemble: &TrajectoryEnsemble,
    epsilons: &[f64],
    lo: f64,
    hi: f64,
    opts: &VelocityOptions,
) -> Result<Vec<NonsmoothnessRow>> {
    check_particle(ensemble, opts.particle)?;
    let window = BinSpec::new(lo, hi, 1)?;
    let j = opts.particle;
    epsilons
        .iter()
        .map(|&epsilon| {
            let m = epsilon_steps(ensemble, epsilon)?;
            let eps = m as f64 * ensemble.record_dt();
            let (mut plus, mut minus, mut gap) = (Accumulator::default(), Accumulator::default(), Accumulator::default());
            for t in 0..ensemble.n_trajectories() {
                for r in reference_records(ensemble.n_records(), m) {
                    let x = ensemble.position(t, r, j);
                    if window.index(x).is_none() {
                        continue;
                    }
                    let (before, after) = (ensemble.position(t, r - m, j), ensemble.position(t, r + m, j));
                    plus.push((after - x) / eps, x);
                    minus.push((x - before) / eps, x);
                    gap.push((2.0 * x - before - after) / eps, x);
                }
            }
            if gap.count < opts.min_occupancy.max(2) {
                return Err(Error::InsufficientSamples { got: gap.count, need: opts.min_occupancy.max(2) });
            }
            Ok(NonsmoothnessRow {
                epsilon: eps,
                v_plus: plus.mean(),
                v_plus_err: plus.std_error(),
                v_minus: minus.mean(),
                v_minus_err: minus.std_error(),
                gap: gap.mean(),
                gap_err: gap.std_error(),
                count: gap.count,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentumResolution {
    pub epsilon: f64,
    pub tau_p: f64,
    pub v_plus: f64,
    pub v_plus_err: f64,
    pub v_minus: f64,
    pub v_minus_err: f64,
    /// Mean of `p/m` over the conditioned samples.
    pub velocity: f64,
    pub count: usize,
}

/// Forward and backward velocities conditioned on a phase-space cell, for
/// increments much shorter than the momentum relaxation time.
pub fn momentum_resolution_check(
    ensemble: &TrajectoryEnsemble,
    epsilon: f64,
    momentum_window: (f64, f64),
    position_window: Option<(f64, f64)>,
    opts: &VelocityOptions,
) -> Result<MomentumResolution> {
    check_particle(ensemble, opts.particle)?;
    if !ensemble.has_momenta() {
        return Err(Error::Validation("momentum resolution needs an underdamped ensemble".into()));
    }
    let tau_p = ensemble.config.tau_p();
    if epsilon > tau_p / 50.0 * (1.0 + 1e-9) {
        return Err(Error::Regime(format!(
            "epsilon = {epsilon} exceeds tau_p/50 = {}; at this resolution only coarse-grained velocities exist",
            tau_p / 50.0
        )));
    }
    let m = epsilon_steps(ensemble, epsilon)?;
    let eps = m as f64 * ensemble.record_dt();
    let p_window = BinSpec::new(momentum_window.0, momentum_window.1, 1)?;
    let x_window = position_window.map(|(lo, hi)| BinSpec::new(lo, hi, 1)).transpose()?;
    let j = opts.particle;
    let mass = ensemble.config.mass;
    let (mut plus, mut minus, mut vel) = (Accumulator::default(), Accumulator::default(), Accumulator::default());
    for t in 0..ensemble.n_trajectories() {
        for r in reference_records(ensemble.n_records(), m) {
            let p = ensemble.momentum(t, r, j).expect("checked above");
            let x = ensemble.position(t, r, j);
            if p_window.index(p).is_none() || x_window.is_some_and(|w| w.index(x).is_none()) {
                continue;
            }
            plus.push((ensemble.position(t, r + m, j) - x) / eps, x);
            minus.push((x - ensemble.position(t, r - m, j)) / eps, x);
            vel.push(p / mass, x);
        }
    }
    if vel.count < opts.min_occupancy.max(2) {
        return Err(Error::InsufficientSamples { got: vel.count, need: opts.min_occupancy.max(2) });
    }
    Ok(MomentumResolution {
        epsilon: eps,
        tau_p,
        v_plus: plus.mean(),
        v_plus_err: plus.std_error(),
        v_minus: minus.mean(),
        v_minus_err: minus.std_error(),
        velocity: vel.mean(),
        count: vel.count,
    })
}
