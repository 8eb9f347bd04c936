//! Langevin ensembles at the two levels of description.
//!
//! Underdamped (phase space):
//! `dx = (p/m) dt`, `dp = (-dU/dx - gamma p/m) dt + sqrt(2 gamma T) dW`.
//!
//! Overdamped (configuration space), drift `f = -dU/dx / gamma` and
//! diffusion `T / gamma`: `dx = f dt + sqrt(2 T / gamma) dW`. Its transition
//! density obeys the Fokker-Planck equation
//! `dP/dt = -sum_i d_i (f_i P) + sum_i (T_i/gamma) d_ii P`.
//! With `paper_units` the friction is fixed to 1 so the diffusion
//! coefficient is `T_i` itself.
//!
//! Both are integrated with Euler-Maruyama, one counter-based random stream
//! per trajectory.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::potential::Potential;
use crate::error::{Error, Result};
use crate::par;
use crate::rng::{self, Domain};

/// Minimum `tau_x / tau_p` for the overdamped description to apply.
pub const OVERDAMPED_RATIO: f64 = 100.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LangevinConfig {
    pub n_particles: usize,
    pub mass: f64,
    pub friction: f64,
    /// One temperature for all particles or one each (`k_B = 1`).
    pub temperatures: Vec<f64>,
    pub potential: Potential,
    pub dt: f64,
    pub t_end: f64,
    pub n_trajectories: usize,
    pub seed: u64,
    #[serde(default)]
    pub paper_units: bool,
    /// Store every `record_every`-th step.
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    #[serde(default)]
    pub initial: InitialCondition,
}

fn default_record_every() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    /// Gibbs positions for an uncoupled harmonic well (origin otherwise for a
    /// free particle), Maxwell momenta.
    #[default]
    Stationary,
    /// Fixed positions; fixed momenta if given, Maxwell otherwise.
    Point {
        position: Vec<f64>,
        #[serde(default)]
        momentum: Option<Vec<f64>>,
    },
    /// Independent uniform positions, Maxwell momenta.
    Uniform { lo: f64, hi: f64 },
    /// Independent normal positions, Maxwell momenta.
    Gaussian { mean: f64, std: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dynamics {
    Underdamped,
    Overdamped,
}

impl LangevinConfig {
    /// Friction actually used by the integrators.
    pub fn effective_friction(&self) -> f64 {
        if self.paper_units { 1.0 } else { self.friction }
    }

    pub fn temperature(&self, particle: usize) -> f64 {
        self.temperatures[if self.temperatures.len() == 1 { 0 } else { particle }]
    }

    /// Diffusion coefficient `T_i / gamma` of the overdamped dynamics.
    pub fn diffusion(&self, particle: usize) -> f64 {
        self.temperature(particle) / self.effective_friction()
    }

    pub fn tau_p(&self) -> f64 {
        self.mass / self.effective_friction()
    }

    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt - 1e-9).ceil() as usize
    }

    pub fn record_dt(&self) -> f64 {
        self.dt * self.record_every as f64
    }

    pub fn validate(&self) -> Result<()> {
        let field = |name: &str, msg: &str| Err(Error::Validation(format!("{name}: {msg}")));
        if self.n_particles == 0 {
            return field("n_particles", "must be at least 1");
        }
        for (name, value) in [("mass", self.mass), ("friction", self.friction), ("dt", self.dt), ("t_end", self.t_end)] {
            if !(value.is_finite() && value > 0.0) {
                return field(name, &format!("must be finite and > 0, got {value}"));
            }
        }
        if self.temperatures.len() != 1 && self.temperatures.len() != self.n_particles {
            return field("temperatures", &format!("must have 1 or {} entries", self.n_particles));
        }
        if self.temperatures.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return field("temperatures", "entries must be finite and >= 0");
        }
        if self.n_trajectories == 0 {
            return field("n_trajectories", "must be at least 1");
        }
        if self.record_every == 0 {
            return field("record_every", "must be at least 1");
        }
        if self.n_steps() % self.record_every != 0 {
            return field("record_every", &format!("must divide the step count {}", self.n_steps()));
        }
        self.potential.validate(self.n_particles)?;
        match &self.initial {
            InitialCondition::Point { position, momentum } => {
                if position.len() != self.n_particles || position.iter().any(|x| !x.is_finite()) {
                    return field("initial.position", "needs one finite entry per particle");
                }
                if let Some(p) = momentum {
                    if p.len() != self.n_particles || p.iter().any(|x| !x.is_finite()) {
                        return field("initial.momentum", "needs one finite entry per particle");
                    }
                }
            }
            InitialCondition::Uniform { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return field("initial", "uniform range needs finite lo < hi");
                }
            }
            InitialCondition::Gaussian { mean, std } => {
                if !(mean.is_finite() && std.is_finite() && *std >= 0.0) {
                    return field("initial", "gaussian needs finite mean and std >= 0");
                }
            }
            InitialCondition::Stationary => {
                let closed_form = matches!(self.potential, Potential::Free { .. })
                    || (0..self.n_particles).all(|i| self.potential.gibbs_variance(i, 1.0).is_some());
                if !closed_form || self.potential.coupling() != 0.0 {
                    return field("initial", "stationary start needs an uncoupled harmonic or free potential");
                }
            }
        }
        Ok(())
    }

    fn initial_state<R: Rng + ?Sized>(&self, rng: &mut R, with_momenta: bool) -> (Vec<f64>, Vec<f64>) {
        let n = self.n_particles;
        let positions: Vec<f64> = match &self.initial {
            InitialCondition::Stationary => (0..n)
                .map(|i| match self.potential.gibbs_variance(i, self.temperature(i)) {
                    Some(var) => var.sqrt() * rng::standard_normal(rng),
                    None => 0.0,
                })
                .collect(),
            InitialCondition::Point { position, .. } => position.clone(),
            InitialCondition::Uniform { lo, hi } => (0..n).map(|_| lo + (hi - lo) * rng.random::<f64>()).collect(),
            InitialCondition::Gaussian { mean, std } => {
                (0..n).map(|_| mean + std * rng::standard_normal(rng)).collect()
            }
        };
        let momenta = if !with_momenta {
            Vec::new()
        } else if let InitialCondition::Point { momentum: Some(p), .. } = &self.initial {
            p.clone()
        } else {
            (0..n).map(|i| (self.mass * self.temperature(i)).sqrt() * rng::standard_normal(rng)).collect()
        };
        (positions, momenta)
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }
}

/// Positions (and momenta for underdamped runs) on a common time grid.
/// Storage is trajectory-major: `[trajectory][record][particle]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryEnsemble {
    pub config: LangevinConfig,
    pub dynamics: Dynamics,
    pub times: Vec<f64>,
    positions: Vec<f64>,
    momenta: Option<Vec<f64>>,
}

impl TrajectoryEnsemble {
    pub fn from_parts(
        config: LangevinConfig,
        dynamics: Dynamics,
        times: Vec<f64>,
        positions: Vec<f64>,
        momenta: Option<Vec<f64>>,
    ) -> Result<Self> {
        let expected = config.n_trajectories * times.len() * config.n_particles;
        if positions.len() != expected || momenta.as_ref().is_some_and(|p| p.len() != expected) {
            return Err(Error::Validation(format!("ensemble storage must hold {expected} values per column")));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Validation("time grid must be strictly increasing".into()));
        }
        if positions.iter().chain(momenta.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(Error::Validation("ensemble contains non-finite values".into()));
        }
        Ok(Self { config, dynamics, times, positions, momenta })
    }

    pub fn n_trajectories(&self) -> usize {
        self.config.n_trajectories
    }

    pub fn n_particles(&self) -> usize {
        self.config.n_particles
    }

    pub fn n_records(&self) -> usize {
        self.times.len()
    }

    pub fn seed(&self) -> u64 {
        self.config.seed
    }

    pub fn config_hash(&self) -> String {
        self.config.hash()
    }

    fn offset(&self, trajectory: usize, record: usize) -> usize {
        debug_assert!(record < self.n_records(), "record {record} of {}", self.n_records());
        (trajectory * self.n_records() + record) * self.n_particles()
    }

    pub fn position(&self, trajectory: usize, record: usize, particle: usize) -> f64 {
        debug_assert!(particle < self.n_particles());
        self.positions[self.offset(trajectory, record) + particle]
    }

    /// All coordinates of one trajectory at one record.
    pub fn positions_at(&self, trajectory: usize, record: usize) -> &[f64] {
        let o = self.offset(trajectory, record);
        &self.positions[o..o + self.n_particles()]
    }

    pub fn momentum(&self, trajectory: usize, record: usize, particle: usize) -> Option<f64> {
        let o = self.offset(trajectory, record);
        self.momenta.as_ref().map(|p| p[o + particle])
    }

    pub fn has_momenta(&self) -> bool {
        self.momenta.is_some()
    }

    pub fn raw_positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn raw_momenta(&self) -> Option<&[f64]> {
        self.momenta.as_deref()
    }

    /// Positions of `particle` across trajectories at one record.
    pub fn snapshot(&self, record: usize, particle: usize) -> Vec<f64> {
        (0..self.n_trajectories()).map(|t| self.position(t, record, particle)).collect()
    }

    pub fn momentum_snapshot(&self, record: usize, particle: usize) -> Option<Vec<f64>> {
        self.momenta.as_ref()?;
        Some((0..self.n_trajectories()).map(|t| self.momentum(t, record, particle).unwrap()).collect())
    }

    pub fn record_dt(&self) -> f64 {
        self.config.record_dt()
    }
}

pub(crate) struct TrajectoryData {
    positions: Vec<f64>,
    momenta: Vec<f64>,
}

fn time_grid(config: &LangevinConfig) -> Vec<f64> {
    let n_records = config.n_steps() / config.record_every + 1;
    (0..n_records).map(|k| (k * config.record_every) as f64 * config.dt).collect()
}

fn assemble(config: &LangevinConfig, dynamics: Dynamics, runs: Vec<TrajectoryData>) -> TrajectoryEnsemble {
    let times = time_grid(config);
    let mut positions = Vec::with_capacity(runs.len() * times.len() * config.n_particles);
    let mut momenta = Vec::new();
    for run in runs {
        positions.extend_from_slice(&run.positions);
        momenta.extend_from_slice(&run.momenta);
    }
    let momenta = (dynamics == Dynamics::Underdamped).then_some(momenta);
    TrajectoryEnsemble { config: config.clone(), dynamics, times, positions, momenta }
}

fn non_finite(trajectory: usize, state: &[f64], step: usize, dt: f64) -> Option<Error> {
    state.iter().position(|v| !v.is_finite()).map(|particle| Error::NonFinite {
        trajectory,
        particle: particle % state.len().max(1),
        step,
        time: step as f64 * dt,
    })
}

pub fn integrate_underdamped(config: &LangevinConfig) -> Result<TrajectoryEnsemble> {
    config.validate()?;
    let limit = config.tau_p() / 20.0;
    if config.dt > limit {
        return Err(Error::StepSize { dt: config.dt, limit, reason: "underdamped runs need dt <= tau_p/20".into() });
    }
    let n = config.n_particles;
    let gamma = config.effective_friction();
    let m = config.mass;
    let dt = config.dt;
    let steps = config.n_steps();
    let noise: Vec<f64> = (0..n).map(|i| (2.0 * gamma * config.temperature(i) * dt).sqrt()).collect();
    let runs = par::try_map_indexed(config.n_trajectories, |traj| {
        let mut rng = rng::stream(config.seed, Domain::Trajectories, traj as u64);
        let (mut x, mut p) = config.initial_state(&mut rng, true);
        let n_records = steps / config.record_every + 1;
        let mut data = TrajectoryData { positions: Vec::with_capacity(n_records * n), momenta: Vec::with_capacity(n_records * n) };
        data.positions.extend_from_slice(&x);
        data.momenta.extend_from_slice(&p);
        let mut force = vec![0.0; n];
        for step in 1..=steps {
            config.potential.force(&x, &mut force);
            for i in 0..n {
                let v = p[i] / m;
                x[i] += v * dt;
                p[i] += (force[i] - gamma * v) * dt + noise[i] * rng::standard_normal(&mut rng);
            }
            if step % config.record_every == 0 {
                if let Some(err) = non_finite(traj, &x, step, dt).or_else(|| non_finite(traj, &p, step, dt)) {
                    return Err(err);
                }
                data.positions.extend_from_slice(&x);
                data.momenta.extend_from_slice(&p);
            }
        }
        Ok(data)
    })?;
    Ok(assemble(config, Dynamics::Underdamped, runs))
}

fn harmonic_tau_x(config: &LangevinConfig) -> Option<f64> {
    let hessian = config.potential.harmonic_hessian(config.n_particles)?;
    let stiffest = hessian.symmetric_eigenvalues().iter().copied().fold(0.0, f64::max);
    Some(if stiffest > 0.0 { config.effective_friction() / stiffest } else { f64::INFINITY })
}

pub fn integrate_overdamped(config: &LangevinConfig) -> Result<TrajectoryEnsemble> {
    config.validate()?;
    if let Some(tau_x) = harmonic_tau_x(config) {
        if tau_x.is_finite() {
            let limit = 1e-3 * tau_x;
            if config.dt > limit {
                return Err(Error::StepSize { dt: config.dt, limit, reason: "overdamped runs need dt <= 1e-3 tau_x".into() });
            }
        }
    }
    let n = config.n_particles;
    let gamma = config.effective_friction();
    let dt = config.dt;
    let steps = config.n_steps();
    let noise: Vec<f64> = (0..n).map(|i| (2.0 * config.diffusion(i) * dt).sqrt()).collect();
    let runs = par::try_map_indexed(config.n_trajectories, |traj| {
        let mut rng = rng::stream(config.seed, Domain::Trajectories, traj as u64);
        let (mut x, _) = config.initial_state(&mut rng, false);
        let n_records = steps / config.record_every + 1;
        let mut data = TrajectoryData { positions: Vec::with_capacity(n_records * n), momenta: Vec::new() };
        data.positions.extend_from_slice(&x);
        let mut force = vec![0.0; n];
        for step in 1..=steps {
            config.potential.force(&x, &mut force);
            for i in 0..n {
                x[i] += force[i] / gamma * dt + noise[i] * rng::standard_normal(&mut rng);
            }
            if step % config.record_every == 0 {
                if let Some(err) = non_finite(traj, &x, step, dt) {
                    return Err(err);
                }
                data.positions.extend_from_slice(&x);
            }
        }
        Ok(data)
    })?;
    Ok(assemble(config, Dynamics::Overdamped, runs))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Overdamped,
    Underdamped,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimescaleReport {
    pub tau_p: f64,
    /// Fastest coordinate relaxation time; infinite without confinement.
    pub tau_x: f64,
    pub regime: Regime,
    /// `tau_x` came from a position autocorrelation estimate.
    pub estimated: bool,
}

pub fn timescale_report(config: &LangevinConfig) -> Result<TimescaleReport> {
    config.validate()?;
    let tau_p = config.tau_p();
    let (tau_x, estimated) = match harmonic_tau_x(config) {
        Some(t) => (t, false),
        None => (estimate_tau_x(config)?, true),
    };
    let regime = if tau_x >= OVERDAMPED_RATIO * tau_p { Regime::Overdamped } else { Regime::Underdamped };
    Ok(TimescaleReport { tau_p, tau_x, regime, estimated })
}

/// 1/e decay time of the position autocorrelation of particle 0 over the
/// second half of a short overdamped run. Returns half the run length when
/// the correlation never decays that far.
fn estimate_tau_x(config: &LangevinConfig) -> Result<f64> {
    let mut probe = config.clone();
    probe.n_trajectories = probe.n_trajectories.clamp(64, 256);
    probe.record_every = 1;
    if matches!(probe.initial, InitialCondition::Stationary) {
        probe.initial = InitialCondition::Point { position: vec![0.0; probe.n_particles], momentum: None };
    }
    let ensemble = integrate_overdamped(&probe)?;
    let n_rec = ensemble.n_records();
    let start = n_rec / 2;
    let window = n_rec - start;
    if window < 4 {
        return Err(Error::InsufficientSamples { got: window, need: 4 });
    }
    let series: Vec<Vec<f64>> = (0..ensemble.n_trajectories())
        .map(|t| (start..n_rec).map(|r| ensemble.position(t, r, 0)).collect())
        .collect();
    let all: Vec<f64> = series.iter().flatten().copied().collect();
    let mean = all.iter().sum::<f64>() / all.len() as f64;
    let var = all.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / all.len() as f64;
    if var <= 0.0 {
        return Err(Error::Regime("position variance vanishes; cannot estimate tau_x".into()));
    }
    let threshold = (-1.0f64).exp();
    let mut previous = 1.0;
    for lag in 1..window / 2 {
        let mut acc = 0.0;
        let mut count = 0usize;
        for s in &series {
            for k in 0..window - lag {
                acc += (s[k] - mean) * (s[k + lag] - mean);
                count += 1;
            }
        }
        let rho = acc / count as f64 / var;
        if rho < threshold {
            let frac = (previous - threshold) / (previous - rho);
            return Ok((lag as f64 - 1.0 + frac) * config.dt);
        }
        previous = rho;
    }
    Ok(window as f64 * config.dt / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn config(potential: Potential, dt: f64, t_end: f64, n: usize) -> LangevinConfig {
        LangevinConfig {
            n_particles: 1,
            mass: 1.0,
            friction: 1.0,
            temperatures: vec![1.0],
            potential,
            dt,
            t_end,
            n_trajectories: n,
            seed: 2024,
            paper_units: false,
            record_every: 1,
            initial: InitialCondition::Stationary,
        }
    }

    #[test]
    fn timescales() {
        let mut c = config(Potential::harmonic(1.0), 1e-4, 1.0, 1);
        c.friction = 100.0;
        let r = timescale_report(&c).unwrap();
        assert!((r.tau_p - 0.01).abs() < 1e-15 && (r.tau_x - 100.0).abs() < 1e-9);
        assert_eq!(r.regime, Regime::Overdamped);
        assert!(!r.estimated);

        let r = timescale_report(&config(Potential::harmonic(1.0), 1e-3, 1.0, 1)).unwrap();
        assert_eq!((r.tau_p, r.tau_x, r.regime), (1.0, 1.0, Regime::Underdamped));

        let r = timescale_report(&config(Potential::free(), 1e-3, 1.0, 1)).unwrap();
        assert!(r.tau_x.is_infinite());
        assert_eq!(r.regime, Regime::Overdamped);
    }

    #[test]
    fn polynomial_tau_x_is_estimated() {
        // U = x^2/2 written as a polynomial plus a weak quartic: close to tau_x = 1
        let mut c = config(Potential::polynomial(vec![0.0, 0.0, 0.5, 0.0, 0.01]), 1e-2, 20.0, 128);
        c.initial = InitialCondition::Point { position: vec![0.0], momentum: None };
        let r = timescale_report(&c).unwrap();
        assert!(r.estimated);
        assert!(r.tau_x > 0.7 && r.tau_x < 1.2, "{}", r.tau_x);
    }

    #[test]
    fn validation_names_fields() {
        let mut c = config(Potential::harmonic(1.0), -1e-3, 1.0, 1);
        let err = c.validate().unwrap_err().to_string();
        assert!(err.contains("dt"), "{err}");
        c.dt = 1e-3;
        c.temperatures = vec![1.0, 2.0];
        assert!(c.validate().unwrap_err().to_string().contains("temperatures"));
        c.temperatures = vec![1.0];
        c.potential = Potential::polynomial(vec![0.0, 0.0, 1.0]);
        assert!(c.validate().unwrap_err().to_string().contains("initial"));
    }

    #[test]
    fn step_size_limits() {
        let mut c = config(Potential::free(), 0.1, 1.0, 1);
        assert!(matches!(integrate_underdamped(&c), Err(Error::StepSize { .. })));
        c.potential = Potential::harmonic(1.0);
        c.dt = 0.01;
        assert!(matches!(integrate_overdamped(&c), Err(Error::StepSize { .. })));
    }

    #[test]
    fn blow_up_is_reported() {
        // an inverted quartic escapes to infinity in finite time
        let mut c = config(Potential::polynomial(vec![0.0, 0.0, 0.0, 0.0, -1.0]), 1e-3, 5.0, 2);
        c.initial = InitialCondition::Point { position: vec![3.0], momentum: None };
        match integrate_overdamped(&c) {
            Err(Error::NonFinite { trajectory: 0, particle: 0, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn zero_temperature_momentum_decay() {
        let mut c = config(Potential::free(), 0.01, 1.0, 1);
        c.temperatures = vec![0.0];
        c.initial = InitialCondition::Point { position: vec![0.0], momentum: Some(vec![2.0]) };
        let e = integrate_underdamped(&c).unwrap();
        let last = e.n_records() - 1;
        let p = e.momentum(0, last, 0).unwrap();
        let exact = 2.0 * (-1.0f64).exp();
        assert!((p - exact).abs() / exact < 0.01, "{p} vs {exact}");
    }

    #[test]
    fn zero_temperature_overdamped_decay() {
        let mut c = config(Potential::harmonic(1.0), 1e-3, 2.0, 1);
        c.temperatures = vec![0.0];
        c.initial = InitialCondition::Point { position: vec![1.0], momentum: None };
        let e = integrate_overdamped(&c).unwrap();
        for r in [500, 1000, 2000] {
            let exact = (-e.times[r]).exp();
            assert!((e.position(0, r, 0) - exact).abs() / exact < 0.01);
        }
    }

    #[test]
    fn recording_grid() {
        let mut c = config(Potential::harmonic(1.0), 1e-3, 0.1, 3);
        c.record_every = 10;
        let e = integrate_overdamped(&c).unwrap();
        assert_eq!(e.n_records(), 11);
        assert!((e.times[10] - 0.1).abs() < 1e-12);
        c.record_every = 7;
        assert!(c.validate().is_err());
    }

    #[test]
    fn ensembles_are_reproducible() {
        let c = config(Potential::harmonic(1.0), 1e-3, 0.05, 16);
        let a = integrate_overdamped(&c).unwrap();
        let b = integrate_overdamped(&c).unwrap();
        assert_eq!(a, b);
        let mut c2 = c.clone();
        c2.seed += 1;
        assert_ne!(a.raw_positions(), integrate_overdamped(&c2).unwrap().raw_positions());
    }

    #[test]
    fn config_json_rejects_unknown_keys() {
        let json = r#"{"n_particles":1,"mass":1,"friction":1,"temperatures":[1],"potential":{"kind":"free"},
            "dt":0.001,"t_end":1,"n_trajectories":10,"seed":1,"paper_units":false}"#;
        let c: LangevinConfig = serde_json::from_str(json).unwrap();
        assert_eq!(c.record_every, 1);
        assert_eq!(c.initial, InitialCondition::Stationary);
        let bad = json.replace("\"seed\":1", "\"seed\":1,\"sneed\":2");
        assert!(serde_json::from_str::<LangevinConfig>(&bad).is_err());
    }

    #[test]
    fn paper_units_fix_friction() {
        let mut c = config(Potential::harmonic(1.0), 1e-3, 1.0, 1);
        c.friction = 7.0;
        assert_eq!(c.diffusion(0), 1.0 / 7.0);
        c.paper_units = true;
        assert_eq!(c.diffusion(0), 1.0);
        assert_eq!(c.tau_p(), 1.0);
    }
}
