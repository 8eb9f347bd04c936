//! CHSH bench: quantum correlations of spin observables in the z-x plane,
//! the commutation structure of the four observables, and local
//! hidden-variable models whose outcomes are identified with measurement
//! outcomes.
//!
//! A hidden-variable [`OutcomeStream`] evaluates all four responses at every
//! draw of `lambda`, so the correlations of the locally incompatible pairs
//! `(A1, A2)` and `(B1, B2)` are as well defined as the cross pairs.

use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    commutator_norm, eigenvalues, tensor_product, trace_product, ComplexMatrix, DensityOperator, HermitianOperator,
};
use crate::par;
use crate::rng::{self, Domain};

/// Commutators at or below this norm count as vanishing.
pub const COMMUTATOR_TOL: f64 = 1e-12;

/// Measurement directions (radians in the z-x plane) for Alice's `A1`, `A2`
/// and Bob's `B1`, `B2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChshAngles {
    pub a1: f64,
    pub a2: f64,
    pub b1: f64,
    pub b2: f64,
}

impl ChshAngles {
    /// Settings attaining `|S| = 2 sqrt 2` on the singlet.
    pub const OPTIMAL: ChshAngles = ChshAngles { a1: 0.0, a2: PI / 2.0, b1: PI / 4.0, b2: -PI / 4.0 };

    pub fn new(a1: f64, a2: f64, b1: f64, b2: f64) -> Result<Self> {
        let angles = Self { a1, a2, b1, b2 };
        angles.validate()?;
        Ok(angles)
    }

    pub fn validate(&self) -> Result<()> {
        if [self.a1, self.a2, self.b1, self.b2].iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::Validation("CHSH angles must be finite".into()))
        }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.a1, self.a2, self.b1, self.b2]
    }
}

/// `cos(theta) sigma_z + sin(theta) sigma_x`
pub fn observable_from_angle(theta: f64) -> HermitianOperator {
    let (s, c) = theta.sin_cos();
    let m = ComplexMatrix::from_row_major(
        2,
        &[Complex64::new(c, 0.0), Complex64::new(s, 0.0), Complex64::new(s, 0.0), Complex64::new(-c, 0.0)],
    )
    .expect("finite 2x2");
    HermitianOperator::new(m).expect("real symmetric")
}

/// `|psi-><psi-|` with `psi- = (|01> - |10>)/sqrt 2`.
pub fn singlet_state() -> DensityOperator {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let psi = DVector::from_vec(vec![
        Complex64::new(0.0, 0.0),
        Complex64::new(s, 0.0),
        Complex64::new(-s, 0.0),
        Complex64::new(0.0, 0.0),
    ]);
    DensityOperator::pure(&psi).expect("unit vector")
}

/// `Tr rho (A(theta_a) (x) B(theta_b))`
pub fn quantum_correlation(rho: &DensityOperator, theta_a: f64, theta_b: f64) -> Result<f64> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch { left: rho.dim(), right: 4 });
    }
    let joint = tensor_product(&observable_from_angle(theta_a), &observable_from_angle(theta_b));
    trace_product(rho.operator(), &joint)
}

/// `E(a1,b1) + E(a1,b2) + E(a2,b1) - E(a2,b2)`
pub fn chsh_combination(e11: f64, e12: f64, e21: f64, e22: f64) -> f64 {
    e11 + e12 + e21 - e22
}

pub fn chsh_value(rho: &DensityOperator, angles: &ChshAngles) -> Result<f64> {
    angles.validate()?;
    let e = |a, b| quantum_correlation(rho, a, b);
    Ok(chsh_combination(e(angles.a1, angles.b1)?, e(angles.a1, angles.b2)?, e(angles.a2, angles.b1)?, e(angles.a2, angles.b2)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridMaximum {
    pub max_abs_s: f64,
    pub argmax: ChshAngles,
    pub points_per_axis: usize,
}

/// Maximum of `|S|` over the product grid of `points` equally spaced angles
/// in `[-pi/2, pi/2]` for each of the four settings. The correlation table
/// is computed once per (Alice angle, Bob angle) pair.
pub fn chsh_grid_max(rho: &DensityOperator, points: usize) -> Result<GridMaximum> {
    if points < 2 {
        return Err(Error::Validation("grid needs at least 2 points per axis".into()));
    }
    let grid: Vec<f64> = (0..points).map(|k| -PI / 2.0 + PI * k as f64 / (points - 1) as f64).collect();
    let mut table = vec![0.0; points * points];
    for (i, &a) in grid.iter().enumerate() {
        for (j, &b) in grid.iter().enumerate() {
            table[i * points + j] = quantum_correlation(rho, a, b)?;
        }
    }
    let e = |i: usize, j: usize| table[i * points + j];
    let mut best = (f64::NEG_INFINITY, [0usize; 4]);
    for i1 in 0..points {
        for i2 in 0..points {
            for j1 in 0..points {
                let partial = e(i1, j1) + e(i2, j1);
                for j2 in 0..points {
                    let s = (partial + e(i1, j2) - e(i2, j2)).abs();
                    if s > best.0 {
                        best = (s, [i1, i2, j1, j2]);
                    }
                }
            }
        }
    }
    let [i1, i2, j1, j2] = best.1;
    Ok(GridMaximum {
        max_abs_s: best.0,
        argmax: ChshAngles { a1: grid[i1], a2: grid[i2], b1: grid[j1], b2: grid[j2] },
        points_per_axis: points,
    })
}

/// Frobenius norms of the six commutators among `A_i (x) I` and `I (x) B_j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompatibilityReport {
    /// `[A1,B1], [A1,B2], [A2,B1], [A2,B2]`
    pub cross: [f64; 4],
    pub alice_local: f64,
    pub bob_local: f64,
    /// A local pair commutes, so no state can violate the classical bound.
    pub degenerate: bool,
}

impl CompatibilityReport {
    pub fn cross_compatible(&self) -> bool {
        self.cross.iter().all(|&c| c <= COMMUTATOR_TOL)
    }
}

pub fn compatibility_audit(angles: &ChshAngles) -> Result<CompatibilityReport> {
    angles.validate()?;
    let id = HermitianOperator::identity(2);
    let alice = |t: f64| tensor_product(&observable_from_angle(t), &id);
    let bob = |t: f64| tensor_product(&id, &observable_from_angle(t));
    let (a1, a2, b1, b2) = (alice(angles.a1), alice(angles.a2), bob(angles.b1), bob(angles.b2));
    let cross = [
        commutator_norm(&a1, &b1)?,
        commutator_norm(&a1, &b2)?,
        commutator_norm(&a2, &b1)?,
        commutator_norm(&a2, &b2)?,
    ];
    let alice_local = commutator_norm(&a1, &a2)?;
    let bob_local = commutator_norm(&b1, &b2)?;
    // ||[A(x), A(y)] (x) I||_F = 4 |sin(x - y)|; 1e-9 covers rounding of angles like b + pi
    let degenerate = alice_local <= 1e-9 || bob_local <= 1e-9;
    Ok(CompatibilityReport { cross, alice_local, bob_local, degenerate })
}

/// A `+1`/`-1` outcome.
pub type Outcome = i8;

fn sign(x: f64) -> Outcome {
    if x >= 0.0 { 1 } else { -1 }
}

/// A local hidden-variable model: a distribution of `lambda` and four
/// `+1`/`-1` response functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum HvStrategy {
    /// Fixed responses regardless of `lambda`.
    Constant { a1: Outcome, a2: Outcome, b1: Outcome, b2: Outcome },
    /// `lambda` uniform on the unit 2-sphere; response `sign(lambda . n(theta) - threshold)`
    /// with `n(theta) = (sin theta, 0, cos theta)`.
    SphereSign { angles: ChshAngles, thresholds: [f64; 4] },
    /// `lambda` picks one of the 16 deterministic assignments; index bits
    /// (a1, a2, b1, b2) from most to least significant, set bit = `-1`.
    Mixture { weights: Vec<f64> },
}

impl HvStrategy {
    /// Sign responses on the sphere with zero thresholds.
    pub fn sphere_sign(angles: ChshAngles) -> Self {
        HvStrategy::SphereSign { angles, thresholds: [0.0; 4] }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            HvStrategy::Constant { a1, a2, b1, b2 } => {
                if [a1, a2, b1, b2].iter().all(|o| **o == 1 || **o == -1) {
                    Ok(())
                } else {
                    Err(Error::InvalidStrategy("constant responses must be +1 or -1".into()))
                }
            }
            HvStrategy::SphereSign { angles, thresholds } => {
                angles.validate().map_err(|_| Error::InvalidStrategy("angles must be finite".into()))?;
                if thresholds.iter().all(|t| t.is_finite()) {
                    Ok(())
                } else {
                    Err(Error::InvalidStrategy("thresholds must be finite".into()))
                }
            }
            HvStrategy::Mixture { weights } => {
                if weights.len() != 16 {
                    return Err(Error::InvalidStrategy(format!("mixture needs 16 weights, got {}", weights.len())));
                }
                if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
                    return Err(Error::InvalidStrategy("mixture weights must be finite and non-negative".into()));
                }
                let total: f64 = weights.iter().sum();
                if (total - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidStrategy(format!("mixture weights sum to {total}, expected 1")));
                }
                Ok(())
            }
        }
    }

    fn respond<R: Rng + ?Sized>(&self, rng: &mut R) -> [Outcome; 4] {
        match self {
            HvStrategy::Constant { a1, a2, b1, b2 } => [*a1, *a2, *b1, *b2],
            HvStrategy::SphereSign { angles, thresholds } => {
                let lambda = uniform_on_sphere(rng);
                let settings = angles.as_array();
                std::array::from_fn(|k| {
                    let (s, c) = settings[k].sin_cos();
                    sign(lambda[0] * s + lambda[2] * c - thresholds[k])
                })
            }
            HvStrategy::Mixture { weights } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut pick = 15;
                for (k, w) in weights.iter().enumerate() {
                    acc += w;
                    if u < acc {
                        pick = k;
                        break;
                    }
                }
                deterministic_assignment(pick)
            }
        }
    }

    /// Closed-form correlation where one exists: constant responses, and sign
    /// responses with zero thresholds (`1 - 2 angle(n_x, n_y) / pi`).
    pub fn exact_correlation(&self, pair: Pair) -> Option<f64> {
        match self {
            HvStrategy::Constant { a1, a2, b1, b2 } => {
                let o = [*a1, *a2, *b1, *b2];
                let (i, j) = pair.indices();
                Some(f64::from(o[i] * o[j]))
            }
            HvStrategy::SphereSign { angles, thresholds } if thresholds.iter().all(|t| *t == 0.0) => {
                let a = angles.as_array();
                let (i, j) = pair.indices();
                let delta = (a[i] - a[j]).rem_euclid(2.0 * PI);
                let between = if delta > PI { 2.0 * PI - delta } else { delta };
                Some(1.0 - 2.0 * between / PI)
            }
            HvStrategy::Mixture { weights } => {
                let (i, j) = pair.indices();
                Some(
                    weights
                        .iter()
                        .enumerate()
                        .map(|(k, w)| {
                            let o = deterministic_assignment(k);
                            w * f64::from(o[i] * o[j])
                        })
                        .sum(),
                )
            }
            _ => None,
        }
    }
}

fn uniform_on_sphere<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    let z: f64 = 2.0 * rng.random::<f64>() - 1.0;
    let phi: f64 = 2.0 * PI * rng.random::<f64>();
    let r = (1.0 - z * z).max(0.0).sqrt();
    [r * phi.cos(), r * phi.sin(), z]
}

/// Outcomes `(a1, a2, b1, b2)` of deterministic assignment `index` in `0..16`.
pub fn deterministic_assignment(index: usize) -> [Outcome; 4] {
    std::array::from_fn(|k| if index >> (3 - k) & 1 == 1 { -1 } else { 1 })
}

/// The six observable pairs whose correlations a joint stream defines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pair {
    A1B1,
    A1B2,
    A2B1,
    A2B2,
    A1A2,
    B1B2,
}

impl Pair {
    pub const ALL: [Pair; 6] = [Pair::A1B1, Pair::A1B2, Pair::A2B1, Pair::A2B2, Pair::A1A2, Pair::B1B2];
    pub const CROSS: [Pair; 4] = [Pair::A1B1, Pair::A1B2, Pair::A2B1, Pair::A2B2];

    /// Record columns `(A1, A2, B1, B2)` = `(0, 1, 2, 3)`.
    pub fn indices(self) -> (usize, usize) {
        match self {
            Pair::A1B1 => (0, 2),
            Pair::A1B2 => (0, 3),
            Pair::A2B1 => (1, 2),
            Pair::A2B2 => (1, 3),
            Pair::A1A2 => (0, 1),
            Pair::B1B2 => (2, 3),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Pair::A1B1 => "A1B1",
            Pair::A1B2 => "A1B2",
            Pair::A2B1 => "A2B1",
            Pair::A2B2 => "A2B2",
            Pair::A1A2 => "A1A2",
            Pair::B1B2 => "B1B2",
        }
    }

    pub fn is_cross(self) -> bool {
        !matches!(self, Pair::A1A2 | Pair::B1B2)
    }

    /// Quantum prediction for the cross pairs; the local pairs have none.
    pub fn quantum_correlation(self, rho: &DensityOperator, angles: &ChshAngles) -> Result<Option<f64>> {
        let a = angles.as_array();
        let (i, j) = self.indices();
        if self.is_cross() { quantum_correlation(rho, a[i], a[j]).map(Some) } else { Ok(None) }
    }
}

/// `n` records of `(A1, A2, B1, B2)`, one `lambda` draw per record.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeStream {
    pub records: Vec<[Outcome; 4]>,
    pub seed: u64,
    pub strategy: HvStrategy,
}

impl OutcomeStream {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

pub fn hv_sample(strategy: &HvStrategy, n: usize, seed: u64) -> Result<OutcomeStream> {
    strategy.validate()?;
    if n == 0 {
        return Err(Error::Validation("stream length must be at least 1".into()));
    }
    let records = par::map_indexed(n, |k| {
        let mut rng = rng::stream(seed, Domain::HiddenVariables, k as u64);
        strategy.respond(&mut rng)
    });
    Ok(OutcomeStream { records, seed, strategy: strategy.clone() })
}

pub fn empirical_correlation(stream: &OutcomeStream, pair: Pair) -> Result<f64> {
    if stream.is_empty() {
        return Err(Error::Validation("empty outcome stream".into()));
    }
    let (i, j) = pair.indices();
    let total: i64 = stream.records.iter().map(|r| i64::from(r[i] * r[j])).sum();
    Ok(total as f64 / stream.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChshEstimate {
    pub s: f64,
    pub std_error: f64,
    pub n: usize,
}

/// CHSH combination from one joint stream. Each record contributes
/// `S_lambda = A1B1 + A1B2 + A2B1 - A2B2`, which is always `+2` or `-2`.
pub fn chsh_from_stream(stream: &OutcomeStream) -> Result<ChshEstimate> {
    if stream.is_empty() {
        return Err(Error::Validation("empty outcome stream".into()));
    }
    let per_record: Vec<f64> = stream
        .records
        .iter()
        .map(|r| f64::from(r[0] * r[2] + r[0] * r[3] + r[1] * r[2] - r[1] * r[3]))
        .collect();
    let est = crate::pcsft::MonteCarloEstimate::from_values(&per_record, stream.seed);
    Ok(ChshEstimate { s: est.mean, std_error: est.std_error, n: stream.len() })
}

/// CHSH combination where each cross pair is estimated from its own
/// quarter of the stream, as in four separate experiments.
pub fn chsh_from_split_streams(stream: &OutcomeStream) -> Result<ChshEstimate> {
    let quarter = stream.len() / 4;
    if quarter < 2 {
        return Err(Error::InsufficientSamples { got: stream.len(), need: 8 });
    }
    let mut s = 0.0;
    let mut var = 0.0;
    for (k, pair) in Pair::CROSS.iter().enumerate() {
        let (i, j) = pair.indices();
        let values: Vec<f64> =
            stream.records[k * quarter..(k + 1) * quarter].iter().map(|r| f64::from(r[i] * r[j])).collect();
        let est = crate::pcsft::MonteCarloEstimate::from_values(&values, stream.seed);
        s += if *pair == Pair::A2B2 { -est.mean } else { est.mean };
        var += est.std_error * est.std_error;
    }
    Ok(ChshEstimate { s, std_error: var.sqrt(), n: 4 * quarter })
}

/// CHSH value of every deterministic assignment and the maximum of `|S|`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeterministicBound {
    pub values: Vec<([Outcome; 4], i32)>,
    pub max_abs: i32,
}

pub fn deterministic_bound_enumeration() -> DeterministicBound {
    let values: Vec<([Outcome; 4], i32)> = (0..16)
        .map(|k| {
            let [a1, a2, b1, b2] = deterministic_assignment(k).map(i32::from);
            (deterministic_assignment(k), a1 * b1 + a1 * b2 + a2 * b1 - a2 * b2)
        })
        .collect();
    let max_abs = values.iter().map(|(_, s)| s.abs()).max().unwrap_or(0);
    DeterministicBound { values, max_abs }
}

/// Spectrum of an observable: the possible measurement outcomes.
pub fn outcome_range(theta: f64) -> Vec<f64> {
    eigenvalues(&observable_from_angle(theta))
}
