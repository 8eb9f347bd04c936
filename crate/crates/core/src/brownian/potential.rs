use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// External potential `U(x_1, ..., x_N)`: a one-body part applied to every
/// coordinate plus an optional pairwise harmonic coupling
/// `(c/2) sum_{i<j} (x_i - x_j)^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Potential {
    Free {
        #[serde(default)]
        coupling: f64,
    },
    /// `k_i x_i^2 / 2`; one stiffness shared by all particles or one each.
    Harmonic {
        stiffness: Vec<f64>,
        #[serde(default)]
        coupling: f64,
    },
    /// `sum_n c_n x_i^n` for every particle.
    Polynomial {
        coefficients: Vec<f64>,
        #[serde(default)]
        coupling: f64,
    },
}

impl Potential {
    pub fn free() -> Self {
        Potential::Free { coupling: 0.0 }
    }

    pub fn harmonic(k: f64) -> Self {
        Potential::Harmonic { stiffness: vec![k], coupling: 0.0 }
    }

    pub fn polynomial(coefficients: Vec<f64>) -> Self {
        Potential::Polynomial { coefficients, coupling: 0.0 }
    }

    pub fn coupling(&self) -> f64 {
        match self {
            Potential::Free { coupling }
            | Potential::Harmonic { coupling, .. }
            | Potential::Polynomial { coupling, .. } => *coupling,
        }
    }

    pub fn validate(&self, n_particles: usize) -> Result<()> {
        let coupling = self.coupling();
        if !coupling.is_finite() || coupling < 0.0 {
            return Err(Error::Validation("potential.coupling must be finite and >= 0".into()));
        }
        match self {
            Potential::Free { .. } => Ok(()),
            Potential::Harmonic { stiffness, .. } => {
                if stiffness.len() != 1 && stiffness.len() != n_particles {
                    return Err(Error::Validation(format!(
                        "potential.stiffness must have 1 or {n_particles} entries, got {}",
                        stiffness.len()
                    )));
                }
                if stiffness.iter().any(|k| !k.is_finite() || *k < 0.0) {
                    return Err(Error::Validation("potential.stiffness entries must be finite and >= 0".into()));
                }
                Ok(())
            }
            Potential::Polynomial { coefficients, .. } => {
                if coefficients.iter().any(|c| !c.is_finite()) {
                    return Err(Error::Validation("potential.coefficients must be finite".into()));
                }
                Ok(())
            }
        }
    }

    fn stiffness(&self, particle: usize) -> f64 {
        match self {
            Potential::Harmonic { stiffness, .. } => stiffness[if stiffness.len() == 1 { 0 } else { particle }],
            _ => 0.0,
        }
    }

    pub fn energy(&self, x: &[f64]) -> f64 {
        let one_body: f64 = x
            .iter()
            .enumerate()
            .map(|(i, &xi)| match self {
                Potential::Free { .. } => 0.0,
                Potential::Harmonic { .. } => 0.5 * self.stiffness(i) * xi * xi,
                Potential::Polynomial { coefficients, .. } => {
                    coefficients.iter().rev().fold(0.0, |acc, c| acc * xi + c)
                }
            })
            .sum();
        let mut pair = 0.0;
        if self.coupling() != 0.0 {
            for i in 0..x.len() {
                for j in i + 1..x.len() {
                    pair += (x[i] - x[j]).powi(2);
                }
            }
        }
        one_body + 0.5 * self.coupling() * pair
    }

    /// `-dU/dx_i` written into `out`.
    pub fn force(&self, x: &[f64], out: &mut [f64]) {
        let n = x.len();
        let sum: f64 = if self.coupling() != 0.0 { x.iter().sum() } else { 0.0 };
        for i in 0..n {
            let xi = x[i];
            let mut f = match self {
                Potential::Free { .. } => 0.0,
                Potential::Harmonic { .. } => -self.stiffness(i) * xi,
                Potential::Polynomial { coefficients, .. } => {
                    // derivative by Horner over n c_n x^(n-1)
                    -coefficients
                        .iter()
                        .enumerate()
                        .skip(1)
                        .rev()
                        .fold(0.0, |acc, (p, c)| acc * xi + p as f64 * c)
                }
            };
            if self.coupling() != 0.0 {
                // d/dx_i of (c/2) sum_{j<l} (x_j - x_l)^2 = c (n x_i - sum)
                f -= self.coupling() * (n as f64 * xi - sum);
            }
            out[i] = f;
        }
    }

    /// Hessian for harmonic potentials; `None` when it depends on `x`.
    pub fn harmonic_hessian(&self, n_particles: usize) -> Option<DMatrix<f64>> {
        let one_body_linear = match self {
            Potential::Free { .. } | Potential::Harmonic { .. } => true,
            Potential::Polynomial { coefficients, .. } => coefficients.len() <= 3,
        };
        if !one_body_linear {
            return None;
        }
        let n = n_particles;
        Some(DMatrix::from_fn(n, n, |i, j| {
            let diag = match self {
                Potential::Polynomial { coefficients, .. } => 2.0 * coefficients.get(2).copied().unwrap_or(0.0),
                _ => self.stiffness(i),
            };
            let coupling = if i == j { self.coupling() * (n as f64 - 1.0) } else { -self.coupling() };
            if i == j { diag + coupling } else { coupling }
        }))
    }

    /// Stationary Gibbs variance `T / k_i` per particle when the potential is
    /// an uncoupled confining harmonic well.
    pub fn gibbs_variance(&self, particle: usize, temperature: f64) -> Option<f64> {
        match self {
            Potential::Harmonic { .. } if self.coupling() == 0.0 && self.stiffness(particle) > 0.0 => {
                Some(temperature / self.stiffness(particle))
            }
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_gradient(p: &Potential, x: &[f64]) -> Vec<f64> {
        let h = 1e-5;
        (0..x.len())
            .map(|i| {
                let mut up = x.to_vec();
                let mut dn = x.to_vec();
                up[i] += h;
                dn[i] -= h;
                (p.energy(&up) - p.energy(&dn)) / (2.0 * h)
            })
            .collect()
    }

    fn check_force(p: &Potential, x: &[f64]) {
        let mut f = vec![0.0; x.len()];
        p.force(x, &mut f);
        for (fi, gi) in f.iter().zip(fd_gradient(p, x)) {
            let scale = gi.abs().max(1.0);
            assert!((fi + gi).abs() <= 1e-6 * scale, "force {fi} vs -grad {gi}");
        }
    }

    #[test]
    fn forces_match_finite_differences() {
        let x = [0.7, -1.3, 0.2];
        check_force(&Potential::free(), &x);
        check_force(&Potential::Harmonic { stiffness: vec![1.0, 2.5, 0.3], coupling: 0.4 }, &x);
        check_force(&Potential::polynomial(vec![0.5, -1.0, 0.25, 0.0, 0.1]), &x);
        check_force(&Potential::Polynomial { coefficients: vec![0.0, 0.0, -1.0, 0.0, 0.5], coupling: 1.2 }, &x);
    }

    #[test]
    fn validation() {
        assert!(Potential::Harmonic { stiffness: vec![1.0, 1.0], coupling: 0.0 }.validate(3).is_err());
        assert!(Potential::harmonic(-1.0).validate(1).is_err());
        assert!(Potential::Free { coupling: f64::NAN }.validate(2).is_err());
        assert!(Potential::polynomial(vec![f64::INFINITY]).validate(1).is_err());
    }

    #[test]
    fn json_shape() {
        let p: Potential = serde_json::from_str(r#"{"kind":"harmonic","stiffness":[2.0]}"#).unwrap();
        assert_eq!(p, Potential::harmonic(2.0));
        let p: Potential = serde_json::from_str(r#"{"kind":"free","coupling":0.5}"#).unwrap();
        assert_eq!(p.coupling(), 0.5);
        assert!(serde_json::from_str::<Potential>(r#"{"kind":"free","spring":1}"#).is_err());
    }

    #[test]
    fn hessians() {
        let h = Potential::Harmonic { stiffness: vec![2.0], coupling: 1.0 }.harmonic_hessian(2).unwrap();
        assert_eq!(h, DMatrix::from_row_slice(2, 2, &[3.0, -1.0, -1.0, 3.0]));
        assert!(Potential::polynomial(vec![0.0, 0.0, 0.0, 0.0, 1.0]).harmonic_hessian(1).is_none());
        assert_eq!(Potential::harmonic(4.0).gibbs_variance(0, 2.0), Some(0.5));
        assert_eq!(Potential::free().gibbs_variance(0, 2.0), None);
    }
}
