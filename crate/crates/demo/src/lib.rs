//! WebAssembly bindings for the browser demo in `www/`. Each export returns
//! a JSON array of plot points.

use bildsim_core::bell::{self, ChshAngles, HvStrategy, Pair};
use bildsim_core::brownian::velocity::{
    coarse_velocity_backward, coarse_velocity_forward, osmotic_velocity, BinSpec, VelocityOptions,
};
use bildsim_core::brownian::{integrate_overdamped, InitialCondition, LangevinConfig, Potential};
use bildsim_core::linalg::{random_covariance, random_hermitian};
use bildsim_core::pcsft::{exact_average, mc_average, FieldMeasure, QuadraticVariable};
use bildsim_core::rng::{self, Domain};
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub theta: f64,
    /// `|S|` for the singlet.
    pub quantum: f64,
    /// `|S|` of the sphere-sign model in closed form.
    pub model: f64,
    /// `|S|` of a sampled sphere-sign stream.
    pub stream: f64,
    pub stream_err: f64,
}

/// CHSH values along the settings `(0, 2t, t, -t)` for `t` in `[0, pi/2]`.
pub fn chsh_sweep(points: usize, n_samples: usize, seed: u64) -> Result<Vec<SweepPoint>, String> {
    if points < 2 {
        return Err("points: need at least 2".into());
    }
    let rho = bell::singlet_state();
    (0..points)
        .map(|k| {
            let t = std::f64::consts::FRAC_PI_2 * k as f64 / (points - 1) as f64;
            let angles = ChshAngles::new(0.0, 2.0 * t, t, -t).map_err(|e| e.to_string())?;
            let quantum = bell::chsh_value(&rho, &angles).map_err(|e| e.to_string())?;
            let strategy = HvStrategy::sphere_sign(angles);
            let e = |p: Pair| strategy.exact_correlation(p).unwrap_or(f64::NAN);
            let model = bell::chsh_combination(e(Pair::A1B1), e(Pair::A1B2), e(Pair::A2B1), e(Pair::A2B2));
            let stream = bell::hv_sample(&strategy, n_samples, seed.wrapping_add(k as u64))
                .and_then(|s| bell::chsh_from_stream(&s))
                .map_err(|e| e.to_string())?;
            Ok(SweepPoint { theta: t, quantum: quantum.abs(), model: model.abs(), stream: stream.s.abs(), stream_err: stream.std_error })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct ScatterPoint {
    pub exact: f64,
    pub mean: f64,
    pub std_error: f64,
}

/// Exact against Monte Carlo averages for `n_pairs` random kernel/covariance
/// pairs of dimension `dim`.
pub fn pcsft_scatter(dim: usize, n_pairs: usize, n_samples: usize, seed: u64) -> Result<Vec<ScatterPoint>, String> {
    if !(1..=16).contains(&dim) {
        return Err("dim: must be in 1..=16".into());
    }
    (0..n_pairs)
        .map(|k| {
            let mut r = rng::stream(seed, Domain::Fixtures, k as u64);
            let v = QuadraticVariable::new(random_hermitian(dim, &mut r));
            let measure = FieldMeasure::new(random_covariance(dim, &mut r)).map_err(|e| e.to_string())?;
            let exact = exact_average(&v, &measure).map_err(|e| e.to_string())?;
            let est = mc_average(&v, &measure, n_samples, seed.wrapping_add(k as u64)).map_err(|e| e.to_string())?;
            Ok(ScatterPoint { exact, mean: est.mean, std_error: est.std_error })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct ProfilePoint {
    pub x: f64,
    pub v_plus: f64,
    pub v_minus: f64,
    pub u: f64,
    pub u_err: f64,
    /// `-D d ln P / dx = k x / gamma` for the stationary well.
    pub theory: f64,
}

/// Forward, backward and osmotic velocities in a stationary harmonic well
/// with unit friction.
pub fn osmotic_profile(temperature: f64, stiffness: f64, n_trajectories: usize, seed: u64) -> Result<Vec<ProfilePoint>, String> {
    let dt = 1e-3 * (1.0 / stiffness).min(1.0);
    let config = LangevinConfig {
        n_particles: 1,
        mass: 1.0,
        friction: 1.0,
        temperatures: vec![temperature],
        potential: Potential::harmonic(stiffness),
        dt,
        t_end: 1000.0 * dt,
        n_trajectories,
        seed,
        paper_units: false,
        record_every: 1,
        initial: InitialCondition::Stationary,
    };
    let ensemble = integrate_overdamped(&config).map_err(|e| e.to_string())?;
    let half = 2.5 * (temperature / stiffness).sqrt();
    let bins = BinSpec::new(-half, half, 20).map_err(|e| e.to_string())?;
    let eps = 10.0 * dt;
    let opts = VelocityOptions::default();
    let plus = coarse_velocity_forward(&ensemble, eps, &bins, &opts).map_err(|e| e.to_string())?;
    let minus = coarse_velocity_backward(&ensemble, eps, &bins, &opts).map_err(|e| e.to_string())?;
    let u = osmotic_velocity(&plus, &minus).map_err(|e| e.to_string())?;
    Ok(plus
        .values
        .iter()
        .zip(&minus.values)
        .zip(&u.values)
        .filter_map(|((p, m), u)| {
            let (p, m, u) = (p.as_ref()?, m.as_ref()?, u.as_ref()?);
            Some(ProfilePoint {
                x: u.mean_position,
                v_plus: p.value,
                v_minus: m.value,
                u: u.value,
                u_err: u.std_error,
                theory: stiffness * u.mean_position,
            })
        })
        .collect())
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e)).map(|v| serde_json::to_string(&v).expect("plot points serialize"))
}

#[wasm_bindgen(js_name = chshSweep)]
pub fn chsh_sweep_js(points: u32, n_samples: u32, seed: u32) -> Result<String, JsError> {
    to_js(chsh_sweep(points as usize, n_samples as usize, seed.into()))
}

#[wasm_bindgen(js_name = pcsftScatter)]
pub fn pcsft_scatter_js(dim: u32, n_pairs: u32, n_samples: u32, seed: u32) -> Result<String, JsError> {
    to_js(pcsft_scatter(dim as usize, n_pairs as usize, n_samples as usize, seed.into()))
}

#[wasm_bindgen(js_name = osmoticProfile)]
pub fn osmotic_profile_js(temperature: f64, stiffness: f64, n_trajectories: u32, seed: u32) -> Result<String, JsError> {
    to_js(osmotic_profile(temperature, stiffness, n_trajectories as usize, seed.into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_peaks_at_the_quantum_optimum() {
        let pts = chsh_sweep(5, 2000, 1).unwrap();
        // t = pi/4 gives the settings (0, pi/2, pi/4, -pi/4)
        assert!((pts[2].theta - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
        assert!((pts[2].quantum - 2.0 * 2f64.sqrt()).abs() < 1e-9);
        assert!(pts.iter().all(|p| p.quantum <= pts[2].quantum + 1e-12));
        assert!(pts.iter().all(|p| p.model <= 2.0 + 1e-12 && p.stream <= 2.0 + 1e-12));
    }

    #[test]
    fn scatter_points_lie_near_the_diagonal() {
        for p in pcsft_scatter(3, 6, 20_000, 2).unwrap() {
            assert!((p.mean - p.exact).abs() < 5.0 * p.std_error, "{p:?}");
        }
    }

    #[test]
    fn profile_follows_the_well() {
        let pts = osmotic_profile(1.0, 1.0, 3000, 3).unwrap();
        assert!(pts.len() >= 10);
        for p in &pts {
            assert!((p.u - p.theory).abs() < 5.0 * p.u_err + 0.05, "{p:?}");
        }
    }

    #[test]
    fn bad_input_is_reported() {
        assert!(chsh_sweep(1, 10, 0).is_err());
        assert!(pcsft_scatter(0, 1, 10, 0).is_err());
        assert!(osmotic_profile(-1.0, 1.0, 10, 0).is_err());
    }
}
