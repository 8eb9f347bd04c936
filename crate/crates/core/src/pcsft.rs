//! Classical random fields on `C^d` and their quadratic-form variables.
//!
//! A [`FieldMeasure`] is the zero-mean circular complex Gaussian with a
//! given covariance `B`. Variables are quadratic forms
//! `f(phi) = <phi|A|phi>` with Hermitian kernel `A`. Exact averages are
//! traces (`<f> = Tr A B`), Monte Carlo averages are sample means over a
//! counter-based stream, and the correspondence to the quantum description
//! is `rho = B / Tr B`, `A_f -> A`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    density_from_covariance, spectral_decomposition, trace_product, ComplexMatrix, CovarianceOperator,
    DensityOperator, HermitianOperator, DEGENERATE_TRACE,
};
use crate::par;
use crate::rng::{self, Domain};

/// One realization of the random field.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSample(pub DVector<Complex64>);

impl FieldSample {
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        if values.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Validation("field sample has non-finite entries".into()));
        }
        Ok(Self(DVector::from_vec(values)))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

/// Zero-mean circular complex Gaussian measure identified by its covariance.
#[derive(Debug, Clone)]
pub struct FieldMeasure {
    covariance: CovarianceOperator,
    /// `L` with `L L* = B`, built from the clamped spectrum.
    factor: DMatrix<Complex64>,
}

impl PartialEq for FieldMeasure {
    fn eq(&self, other: &Self) -> bool {
        self.covariance == other.covariance
    }
}

impl FieldMeasure {
    pub fn new(covariance: CovarianceOperator) -> Result<Self> {
        let d = covariance.dim();
        let mut factor = DMatrix::zeros(d, d);
        for (k, pair) in spectral_decomposition(covariance.operator()).into_iter().enumerate() {
            let scale = pair.value.max(0.0).sqrt();
            factor.set_column(k, &(pair.vector * Complex64::new(scale, 0.0)));
        }
        if factor.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Validation("covariance factorization produced non-finite entries".into()));
        }
        Ok(Self { covariance, factor })
    }

    pub fn covariance(&self) -> &CovarianceOperator {
        &self.covariance
    }

    pub fn dim(&self) -> usize {
        self.covariance.dim()
    }

    /// Draw sample `index` of the stream keyed by `seed`.
    pub fn sample_at(&self, seed: u64, index: u64) -> FieldSample {
        let mut rng = rng::stream(seed, Domain::FieldSamples, index);
        let d = self.dim();
        let half = std::f64::consts::FRAC_1_SQRT_2;
        let z = DVector::from_fn(d, |_, _| {
            let re = rng::standard_normal(&mut rng);
            let im = rng::standard_normal(&mut rng);
            Complex64::new(re * half, im * half)
        });
        FieldSample(&self.factor * z)
    }
}

/// A quadratic-form variable `phi -> <phi|A|phi>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QuadraticVariable {
    kernel: HermitianOperator,
}

impl QuadraticVariable {
    pub fn new(kernel: HermitianOperator) -> Self {
        Self { kernel }
    }

    pub fn kernel(&self) -> &HermitianOperator {
        &self.kernel
    }

    pub fn dim(&self) -> usize {
        self.kernel.dim()
    }

    /// The observable this variable corresponds to (identity on kernels).
    pub fn observable(&self) -> &HermitianOperator {
        &self.kernel
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: usize,
    pub seed: u64,
}

impl MonteCarloEstimate {
    /// Mean and unbiased standard error of `values`, summed in index order.
    pub fn from_values(values: &[f64], seed: u64) -> Self {
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        Self { mean, std_error: (var / n as f64).sqrt(), n_samples: n, seed }
    }

    /// `|mean - target|` in units of the standard error. Zero error with an
    /// exact hit counts as 0 sigma.
    pub fn sigma_distance(&self, target: f64) -> f64 {
        let diff = (self.mean - target).abs();
        if self.std_error > 0.0 {
            diff / self.std_error
        } else if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

fn check_dims(left: usize, right: usize) -> Result<()> {
    if left == right { Ok(()) } else { Err(Error::DimensionMismatch { left, right }) }
}

pub fn sample_fields(measure: &FieldMeasure, n: usize, seed: u64) -> Result<Vec<FieldSample>> {
    if n == 0 {
        return Err(Error::Validation("sample count must be at least 1".into()));
    }
    Ok(par::map_indexed(n, |k| measure.sample_at(seed, k as u64)))
}

pub fn quadratic_eval(v: &QuadraticVariable, phi: &FieldSample) -> Result<f64> {
    check_dims(v.dim(), phi.dim())?;
    Ok(quadratic_form(v.kernel.matrix().inner(), &phi.0))
}

#[inline]
fn quadratic_form(a: &DMatrix<Complex64>, phi: &DVector<Complex64>) -> f64 {
    // Hermitian kernel: the imaginary part is rounding residue
    phi.dotc(&(a * phi)).re
}

/// `||phi||^2`
pub fn field_energy(phi: &FieldSample) -> f64 {
    phi.0.iter().map(|z| z.norm_sqr()).sum()
}

/// `E_p = Tr B`
pub fn average_energy(measure: &FieldMeasure) -> f64 {
    measure.covariance.trace()
}

/// `<f>_p = Tr A B`
pub fn exact_average(v: &QuadraticVariable, measure: &FieldMeasure) -> Result<f64> {
    trace_product(v.kernel(), measure.covariance.operator())
}

pub fn mc_average(v: &QuadraticVariable, measure: &FieldMeasure, n: usize, seed: u64) -> Result<MonteCarloEstimate> {
    check_dims(v.dim(), measure.dim())?;
    if n < 2 {
        return Err(Error::Validation("Monte Carlo average needs at least 2 samples".into()));
    }
    let a = v.kernel.matrix().inner();
    let values = par::map_indexed(n, |k| quadratic_form(a, &measure.sample_at(seed, k as u64).0));
    Ok(MonteCarloEstimate::from_values(&values, seed))
}

/// Sample mean of `f(phi) g(phi)`.
pub fn mc_pair_correlation(
    v: &QuadraticVariable,
    w: &QuadraticVariable,
    measure: &FieldMeasure,
    n: usize,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    check_dims(v.dim(), measure.dim())?;
    check_dims(w.dim(), measure.dim())?;
    if n < 2 {
        return Err(Error::Validation("Monte Carlo average needs at least 2 samples".into()));
    }
    let (a, g) = (v.kernel.matrix().inner(), w.kernel.matrix().inner());
    let values = par::map_indexed(n, |k| {
        let phi = measure.sample_at(seed, k as u64).0;
        quadratic_form(a, &phi) * quadratic_form(g, &phi)
    });
    Ok(MonteCarloEstimate::from_values(&values, seed))
}

/// The field-to-state map `B -> B / Tr B`.
pub fn correspondence_state(measure: &FieldMeasure) -> Result<DensityOperator> {
    density_from_covariance(&measure.covariance)
}

/// Both sides of `<f>_p / E_p = Tr(rho_p A_f)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
}

pub fn normalized_coupling_check(v: &QuadraticVariable, measure: &FieldMeasure) -> Result<CouplingCheck> {
    let energy = nondegenerate_energy(measure)?;
    let lhs = exact_average(v, measure)? / energy;
    let rho = correspondence_state(measure)?;
    let rhs = trace_product(rho.operator(), v.observable())?;
    Ok(CouplingCheck { lhs, rhs, gap: (lhs - rhs).abs() })
}

/// `g_p = f / E_p`: the variable rescaled by the inverse field energy.
pub fn amplified_variable(v: &QuadraticVariable, measure: &FieldMeasure) -> Result<QuadraticVariable> {
    check_dims(v.dim(), measure.dim())?;
    let energy = nondegenerate_energy(measure)?;
    Ok(QuadraticVariable::new(v.kernel.scale(1.0 / energy)))
}

fn nondegenerate_energy(measure: &FieldMeasure) -> Result<f64> {
    let energy = average_energy(measure);
    if energy <= DEGENERATE_TRACE {
        return Err(Error::DegenerateMeasure { trace: energy, floor: DEGENERATE_TRACE });
    }
    Ok(energy)
}

/// `<f g>_p = Tr(AB) Tr(GB) + Tr(ABGB)` for the circular Gaussian measure
/// (fourth moment `E[phi_i* phi_j phi_k* phi_l] = B_ji B_lk + B_li B_jk`).
pub fn exact_pair_correlation(v: &QuadraticVariable, w: &QuadraticVariable, measure: &FieldMeasure) -> Result<f64> {
    check_dims(v.dim(), measure.dim())?;
    check_dims(w.dim(), measure.dim())?;
    let b = measure.covariance.operator();
    let ab = v.kernel.matrix().matmul(b.matrix())?;
    let gb = w.kernel.matrix().matmul(b.matrix())?;
    let disconnected = trace_product(v.kernel(), b)? * trace_product(w.kernel(), b)?;
    let connected = crate::linalg::trace_product_complex(&ab, &gb)?.re;
    Ok(disconnected + connected)
}

/// `(1/n) sum phi phi*`
pub fn empirical_covariance(samples: &[FieldSample]) -> Result<CovarianceOperator> {
    let first = samples.first().ok_or_else(|| Error::Validation("no samples".into()))?;
    let d = first.dim();
    let mut acc = DMatrix::<Complex64>::zeros(d, d);
    for s in samples {
        check_dims(d, s.dim())?;
        acc += &s.0 * s.0.adjoint();
    }
    acc /= Complex64::new(samples.len() as f64, 0.0);
    let h = HermitianOperator::hermitian_part(&ComplexMatrix::from_inner(acc)?);
    CovarianceOperator::new(h)
}

/// A finitely supported field distribution: `phi = points[k]` with
/// probability `weights[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteFieldMeasure {
    points: Vec<DVector<Complex64>>,
    weights: Vec<f64>,
}

impl DiscreteFieldMeasure {
    pub fn new(points: Vec<DVector<Complex64>>, weights: Vec<f64>) -> Result<Self> {
        let d = points.first().map(|p| p.len()).ok_or_else(|| Error::Validation("no support points".into()))?;
        if points.len() != weights.len() {
            return Err(Error::DimensionMismatch { left: points.len(), right: weights.len() });
        }
        if points.iter().any(|p| p.len() != d) {
            return Err(Error::Validation("support points differ in dimension".into()));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(Error::Validation("weights must be non-negative and sum to 1".into()));
        }
        Ok(Self { points, weights })
    }

    /// The `2d` points `+-sqrt(d lambda_k) v_k` with equal weights, whose
    /// covariance is `B` but which is not Gaussian.
    pub fn eigen_fixture(covariance: &CovarianceOperator) -> Result<Self> {
        let d = covariance.dim();
        let mut points = Vec::with_capacity(2 * d);
        for pair in spectral_decomposition(covariance.operator()) {
            let v = pair.vector * Complex64::new((d as f64 * pair.value.max(0.0)).sqrt(), 0.0);
            points.push(-&v);
            points.push(v);
        }
        Self::new(points, vec![1.0 / (2 * d) as f64; 2 * d])
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    /// `sum_k w_k phi_k phi_k*`
    pub fn covariance(&self) -> Result<CovarianceOperator> {
        let d = self.dim();
        let mut acc = DMatrix::<Complex64>::zeros(d, d);
        for (p, w) in self.points.iter().zip(&self.weights) {
            acc += p * p.adjoint() * Complex64::new(*w, 0.0);
        }
        CovarianceOperator::new(HermitianOperator::hermitian_part(&ComplexMatrix::from_inner(acc)?))
    }

    pub fn sample_at(&self, seed: u64, index: u64) -> FieldSample {
        use rand::Rng;
        let mut rng = rng::stream(seed, Domain::FieldSamples, index);
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut pick = self.points.len() - 1;
        for (k, w) in self.weights.iter().enumerate() {
            acc += w;
            if u < acc {
                pick = k;
                break;
            }
        }
        FieldSample(self.points[pick].clone())
    }

    pub fn sample(&self, n: usize, seed: u64) -> Vec<FieldSample> {
        par::map_indexed(n, |k| self.sample_at(seed, k as u64))
    }
}
