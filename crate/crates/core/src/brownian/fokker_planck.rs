//! Kernel-smoothed check of the Fokker-Planck equation on an ensemble.
//!
//! Convolving `dP/dt = -sum_i d_i (f_i P) + sum_i D_i d_ii P` with a
//! Gaussian kernel `K_h` gives an identity between sample averages:
//!
//! `d/dt E[K_h(g - X_t)] = -sum_i E[d_i K_h(g - X_t) f_i(X_t)] + sum_i D_i E[d_ii K_h(g - X_t)]`
//!
//! evaluated on a grid of points `g`. The time derivative is a central
//! difference of two snapshots. The residual is reported relative to the
//! sum of the magnitudes of the three terms, so it is 0 for an exact
//! match and 1 when nothing cancels.

use serde::Serialize;

use super::density::{kernel, kernel_d1, kernel_d2};
use super::langevin::{Dynamics, TrajectoryEnsemble};
use crate::error::{Error, Result};
use crate::par;

/// Fewest samples per snapshot for the residual to be meaningful.
pub const MIN_FP_SAMPLES: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FpGrid {
    pub points_per_axis: usize,
    /// Grid half-width in units of the per-axis standard deviation.
    pub half_width_sd: f64,
}

impl Default for FpGrid {
    fn default() -> Self {
        Self { points_per_axis: 41, half_width_sd: 3.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FpResidual {
    pub normalized: f64,
    pub residual_norm: f64,
    pub time_term_norm: f64,
    pub drift_term_norm: f64,
    pub diffusion_term_norm: f64,
    pub bandwidth: Vec<f64>,
    pub n_samples: usize,
    pub time: f64,
}

/// Three snapshots of a `dim`-dimensional state, `interval` apart, flat
/// with stride `dim`.
pub struct Snapshots<'a> {
    pub dim: usize,
    pub before: &'a [f64],
    pub middle: &'a [f64],
    pub after: &'a [f64],
    pub interval: f64,
}

/// Residual from raw snapshots; `drift` writes `f(x)` into its second
/// argument.
pub fn residual_from_snapshots<F>(snaps: &Snapshots<'_>, drift: F, diffusion: &[f64], grid: &FpGrid) -> Result<FpResidual>
where
    F: Fn(&[f64], &mut [f64]) + Sync,
{
    let d = snaps.dim;
    if d == 0 || d > 2 {
        return Err(Error::Validation(format!("Fokker-Planck residual supports 1 or 2 dimensions, got {d}")));
    }
    if diffusion.len() != d {
        return Err(Error::DimensionMismatch { left: diffusion.len(), right: d });
    }
    let n = snaps.middle.len() / d;
    if snaps.before.len() != snaps.middle.len() || snaps.after.len() != snaps.middle.len() || n * d != snaps.middle.len() {
        return Err(Error::Validation("snapshots must have equal length divisible by the dimension".into()));
    }
    if n < MIN_FP_SAMPLES {
        return Err(Error::InsufficientSamples { got: n, need: MIN_FP_SAMPLES });
    }
    if !(snaps.interval > 0.0) || grid.points_per_axis < 3 || !(grid.half_width_sd > 0.0) {
        return Err(Error::Validation("need interval > 0, >= 3 grid points and a positive grid width".into()));
    }

    let mut mean = vec![0.0; d];
    let mut sd = vec![0.0; d];
    for i in 0..d {
        let col = snaps.middle.iter().skip(i).step_by(d);
        let m = col.clone().sum::<f64>() / n as f64;
        let v = col.map(|x| (x - m).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        mean[i] = m;
        sd[i] = v.sqrt();
    }
    let scale = (n as f64).powf(-1.0 / (d as f64 + 8.0));
    // T = 0 ensembles can collapse to a point; keep a positive width
    let h: Vec<f64> = sd.iter().map(|s| 1.06 * s.max(1e-3) * scale).collect();
    let axes: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            let w = grid.half_width_sd * sd[i].max(h[i]);
            (0..grid.points_per_axis)
                .map(|k| mean[i] - w + 2.0 * w * k as f64 / (grid.points_per_axis - 1) as f64)
                .collect()
        })
        .collect();
    let n_grid = grid.points_per_axis.pow(d as u32);
    let point = |g: usize| -> Vec<f64> {
        let mut rem = g;
        (0..d)
            .map(|i| {
                let k = rem % grid.points_per_axis;
                rem /= grid.points_per_axis;
                axes[i][k]
            })
            .collect()
    };

    let mut forces = vec![0.0; n * d];
    for (x, f) in snaps.middle.chunks(d).zip(forces.chunks_mut(d)) {
        drift(x, f);
    }

    let terms = par::map_indexed(n_grid, |gi| {
        let g = point(gi);
        let density = |s: &[f64]| -> f64 {
            s.chunks(d).map(|y| (0..d).map(|i| kernel(g[i] - y[i], h[i])).product::<f64>()).sum::<f64>()
        };
        let time = (density(snaps.after) - density(snaps.before)) / (2.0 * snaps.interval * n as f64);
        let (mut drift_sum, mut diff_sum) = (0.0, 0.0);
        for (y, f) in snaps.middle.chunks(d).zip(forces.chunks(d)) {
            let k: Vec<f64> = (0..d).map(|i| kernel(g[i] - y[i], h[i])).collect();
            for i in 0..d {
                let other: f64 = (0..d).filter(|&j| j != i).map(|j| k[j]).product();
                let u = g[i] - y[i];
                // d/dg_i of the smoothed flux, with d/dg = -d/dy acting on K(g - y)
                drift_sum += kernel_d1(u, h[i]) * other * f[i];
                diff_sum += diffusion[i] * kernel_d2(u, h[i]) * other;
            }
        }
        let drift_term = drift_sum / n as f64;
        let diffusion_term = diff_sum / n as f64;
        (time, drift_term, diffusion_term)
    });

    let norm = |it: &mut dyn Iterator<Item = f64>| it.map(|v| v * v).sum::<f64>().sqrt();
    let residual_norm = norm(&mut terms.iter().map(|(t, a, b)| t + a - b));
    let time_term_norm = norm(&mut terms.iter().map(|t| t.0));
    let drift_term_norm = norm(&mut terms.iter().map(|t| t.1));
    let diffusion_term_norm = norm(&mut terms.iter().map(|t| t.2));
    let denom = time_term_norm + drift_term_norm + diffusion_term_norm;
    Ok(FpResidual {
        normalized: if denom > 0.0 { residual_norm / denom } else { 0.0 },
        residual_norm,
        time_term_norm,
        drift_term_norm,
        diffusion_term_norm,
        bandwidth: h,
        n_samples: n,
        time: f64::NAN,
    })
}

/// Residual at record `record` of an overdamped ensemble, using records
/// `record - lag` and `record + lag` for the time derivative.
pub fn fokker_planck_residual(ensemble: &TrajectoryEnsemble, record: usize, lag: usize, grid: &FpGrid) -> Result<FpResidual> {
    if ensemble.dynamics != Dynamics::Overdamped {
        return Err(Error::Validation("the Fokker-Planck residual applies to overdamped ensembles".into()));
    }
    let d = ensemble.n_particles();
    if lag == 0 || record < lag || record + lag >= ensemble.n_records() {
        return Err(Error::Validation(format!(
            "record {record} with lag {lag} falls outside the {} recorded times",
            ensemble.n_records()
        )));
    }
    let flat = |r: usize| -> Vec<f64> {
        (0..ensemble.n_trajectories()).flat_map(|t| ensemble.positions_at(t, r).to_vec()).collect()
    };
    let (before, middle, after) = (flat(record - lag), flat(record), flat(record + lag));
    let config = &ensemble.config;
    let gamma = config.effective_friction();
    let diffusion: Vec<f64> = (0..d).map(|i| config.diffusion(i)).collect();
    let snaps = Snapshots { dim: d, before: &before, middle: &middle, after: &after, interval: lag as f64 * ensemble.record_dt() };
    let drift = |x: &[f64], out: &mut [f64]| {
        config.potential.force(x, out);
        out.iter_mut().for_each(|f| *f /= gamma);
    };
    let mut res = residual_from_snapshots(&snaps, drift, &diffusion, grid)?;
    res.time = ensemble.times[record];
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{self, Domain};

    fn ou_snapshots(n: usize, k: f64, d: f64, x0: Option<f64>, t: f64, dt: f64, seed: u64) -> [Vec<f64>; 3] {
        // exact OU transitions: mean x e^{-k t}, variance (D/k)(1 - e^{-2kt})
        let step = |x: f64, tau: f64, z: f64| {
            let a = (-k * tau).exp();
            x * a + ((d / k) * (1.0 - a * a)).sqrt() * z
        };
        let mut out = [Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n)];
        for i in 0..n {
            let mut r = rng::stream(seed, Domain::Fixtures, i as u64);
            let z: [f64; 3] = [rng::standard_normal(&mut r), rng::standard_normal(&mut r), rng::standard_normal(&mut r)];
            let start = match x0 {
                Some(x) => step(x, t - dt, z[0]),
                None => (d / k).sqrt() * z[0],
            };
            let mid = step(start, dt, z[1]);
            let end = step(mid, dt, z[2]);
            out[0].push(start);
            out[1].push(mid);
            out[2].push(end);
        }
        out
    }

    #[test]
    fn exact_ou_samples_satisfy_the_equation() {
        let n = MIN_FP_SAMPLES;
        for (x0, label) in [(None, "stationary"), (Some(1.5), "relaxing")] {
            let [b, m, a] = ou_snapshots(n, 1.0, 1.0, x0, 0.5, 0.02, 9);
            let snaps = Snapshots { dim: 1, before: &b, middle: &m, after: &a, interval: 0.02 };
            let r = residual_from_snapshots(&snaps, |x, f| f[0] = -x[0], &[1.0], &FpGrid::default()).unwrap();
            assert!(r.normalized < 0.1, "{label}: {r:?}");
        }
    }

    #[test]
    fn wrong_diffusion_is_detected() {
        let [b, m, a] = ou_snapshots(MIN_FP_SAMPLES, 1.0, 1.0, None, 0.5, 0.05, 4);
        let snaps = Snapshots { dim: 1, before: &b, middle: &m, after: &a, interval: 0.05 };
        let r = residual_from_snapshots(&snaps, |x, f| f[0] = -x[0], &[2.0], &FpGrid::default()).unwrap();
        assert!(r.normalized > 0.2, "{r:?}");
    }

    #[test]
    fn too_few_samples() {
        let v = vec![0.0; 10];
        let snaps = Snapshots { dim: 1, before: &v, middle: &v, after: &v, interval: 0.1 };
        let err = residual_from_snapshots(&snaps, |_, f| f[0] = 0.0, &[1.0], &FpGrid::default()).unwrap_err();
        assert!(matches!(err, Error::InsufficientSamples { got: 10, .. }));
    }
}
