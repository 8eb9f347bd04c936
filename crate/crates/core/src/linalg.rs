//! Finite-dimensional complex Hilbert space operators.
//!
//! [`ComplexMatrix`] is a square matrix with finite entries. The validated
//! wrappers [`HermitianOperator`], [`DensityOperator`] and
//! [`CovarianceOperator`] carry the invariants the rest of the crate relies
//! on, so functions taking them never re-check.
//!
//! Matrices serialize as `{"dim": d, "re": [[..]], "im": [[..]]}` in
//! row-major order.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute entrywise tolerance for `A == A*`.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Smallest eigenvalue accepted for positive semidefinite operators.
pub const EIGENVALUE_FLOOR: f64 = -1e-10;
/// Allowed deviation of a density operator's trace from one.
pub const TRACE_TOL: f64 = 1e-12;
/// Covariance traces at or below this are treated as a degenerate measure.
pub const DEGENERATE_TRACE: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct ComplexMatrix(DMatrix<Complex64>);

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixJson {
    dim: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl TryFrom<MatrixJson> for ComplexMatrix {
    type Error = Error;

    fn try_from(json: MatrixJson) -> Result<Self> {
        let d = json.dim;
        let rows_ok = |rows: &Vec<Vec<f64>>| rows.len() == d && rows.iter().all(|r| r.len() == d);
        if !rows_ok(&json.re) || !rows_ok(&json.im) {
            return Err(Error::Validation(format!(
                "matrix json: \"re\" and \"im\" must both be {d}x{d}"
            )));
        }
        ComplexMatrix::from_fn(d, |i, j| Complex64::new(json.re[i][j], json.im[i][j]))
    }
}

impl From<ComplexMatrix> for MatrixJson {
    fn from(m: ComplexMatrix) -> Self {
        let d = m.dim();
        let re = (0..d).map(|i| (0..d).map(|j| m.0[(i, j)].re).collect()).collect();
        let im = (0..d).map(|i| (0..d).map(|j| m.0[(i, j)].im).collect()).collect();
        MatrixJson { dim: d, re, im }
    }
}

impl ComplexMatrix {
    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> Complex64) -> Result<Self> {
        Self::from_inner(DMatrix::from_fn(dim, dim, f))
    }

    /// Row-major entries.
    pub fn from_row_major(dim: usize, entries: &[Complex64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::Validation(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                entries.len()
            )));
        }
        Self::from_inner(DMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn from_inner(m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() == 0 || m.nrows() != m.ncols() {
            return Err(Error::Validation(format!(
                "matrix must be square with dim >= 1, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if let Some((k, _)) = m.iter().enumerate().find(|(_, z)| !(z.re.is_finite() && z.im.is_finite())) {
            // nalgebra storage is column-major
            let (row, col) = (k % m.nrows(), k / m.nrows());
            return Err(Error::Validation(format!("non-finite entry at ({row}, {col})")));
        }
        Ok(Self(m))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn diag(values: &[f64]) -> Self {
        let d = values.len();
        Self(DMatrix::from_fn(d, d, |i, j| {
            if i == j { Complex64::new(values[i], 0.0) } else { Complex64::new(0.0, 0.0) }
        }))
    }

    /// `|v><v|`
    pub fn outer(v: &DVector<Complex64>) -> Self {
        Self(v * v.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0[(row, col)]
    }

    pub fn inner(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self(self.0.map(|z| z * factor))
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        same_dim(self.dim(), other.dim())?;
        Ok(Self(&self.0 * &other.0))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        same_dim(self.dim(), other.dim())?;
        Ok(Self(&self.0 - &other.0))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        same_dim(self.dim(), other.dim())?;
        Ok(Self(&self.0 + &other.0))
    }

    /// Largest entrywise absolute difference.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        same_dim(self.dim(), other.dim())?;
        Ok(self.0.iter().zip(other.0.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }

    /// Kronecker product.
    pub fn kron(&self, other: &Self) -> Self {
        Self(self.0.kronecker(&other.0))
    }
}

fn same_dim(left: usize, right: usize) -> Result<()> {
    if left == right { Ok(()) } else { Err(Error::DimensionMismatch { left, right }) }
}

/// A matrix equal to its conjugate transpose within [`HERMITIAN_TOL`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ComplexMatrix", into = "ComplexMatrix")]
pub struct HermitianOperator(ComplexMatrix);

impl TryFrom<ComplexMatrix> for HermitianOperator {
    type Error = Error;
    fn try_from(m: ComplexMatrix) -> Result<Self> {
        Self::new(m)
    }
}

impl From<HermitianOperator> for ComplexMatrix {
    fn from(h: HermitianOperator) -> Self {
        h.0
    }
}

impl HermitianOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let d = matrix.dim();
        let m = matrix.inner();
        for i in 0..d {
            for j in i..d {
                let deviation = (m[(i, j)] - m[(j, i)].conj()).norm();
                if deviation > HERMITIAN_TOL {
                    return Err(Error::NotHermitian { row: i, col: j, deviation });
                }
            }
        }
        Ok(Self(matrix))
    }

    /// Hermitian part `(M + M*)/2` of an arbitrary matrix.
    pub fn hermitian_part(matrix: &ComplexMatrix) -> Self {
        let m = matrix.inner();
        Self(ComplexMatrix((m + m.adjoint()) * Complex64::new(0.5, 0.0)))
    }

    pub fn identity(dim: usize) -> Self {
        Self(ComplexMatrix::identity(dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(ComplexMatrix::zeros(dim))
    }

    pub fn diag(values: &[f64]) -> Self {
        Self(ComplexMatrix::diag(values))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self(self.0.scale(factor))
    }
}

/// One eigenpair of a Hermitian operator.
#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub value: f64,
    pub vector: DVector<Complex64>,
}

/// Eigenvalues in ascending order with orthonormal eigenvectors.
pub fn spectral_decomposition(h: &HermitianOperator) -> Vec<Eigenpair> {
    let eig = h.0.inner().clone().symmetric_eigen();
    let mut pairs: Vec<Eigenpair> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(k, &value)| Eigenpair { value, vector: eig.eigenvectors.column(k).into_owned() })
        .collect();
    pairs.sort_by(|a, b| a.value.total_cmp(&b.value));
    pairs
}

/// Eigenvalues only, ascending.
pub fn eigenvalues(h: &HermitianOperator) -> Vec<f64> {
    let mut values: Vec<f64> = h.0.inner().clone().symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

/// `Tr(AB)` as a complex number, summed directly over entries.
pub fn trace_product_complex(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<Complex64> {
    same_dim(a.dim(), b.dim())?;
    let (a, b) = (a.inner(), b.inner());
    let d = a.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..d {
        for j in 0..d {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    Ok(acc)
}

/// `Tr(AB)` for Hermitian `A`, `B`. The trace of a product of two Hermitian
/// matrices is real; the rounding residue in the imaginary part is dropped.
pub fn trace_product(a: &HermitianOperator, b: &HermitianOperator) -> Result<f64> {
    Ok(trace_product_complex(a.matrix(), b.matrix())?.re)
}

/// Frobenius norm of `AB - BA`.
pub fn commutator_norm(a: &HermitianOperator, b: &HermitianOperator) -> Result<f64> {
    let ab = a.matrix().matmul(b.matrix())?;
    let ba = b.matrix().matmul(a.matrix())?;
    Ok(ab.sub(&ba)?.frobenius_norm())
}

pub fn tensor_product(a: &HermitianOperator, b: &HermitianOperator) -> HermitianOperator {
    // the Kronecker product of Hermitian matrices is Hermitian
    HermitianOperator(a.matrix().kron(b.matrix()))
}

fn check_psd(h: &HermitianOperator) -> Result<()> {
    let lowest = eigenvalues(h)[0];
    if lowest < EIGENVALUE_FLOOR {
        return Err(Error::NotPositive { eigenvalue: lowest });
    }
    Ok(())
}

/// Positive semidefinite Hermitian operator with unit trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HermitianOperator", into = "HermitianOperator")]
pub struct DensityOperator(HermitianOperator);

impl TryFrom<HermitianOperator> for DensityOperator {
    type Error = Error;
    fn try_from(h: HermitianOperator) -> Result<Self> {
        Self::new(h)
    }
}

impl From<DensityOperator> for HermitianOperator {
    fn from(d: DensityOperator) -> Self {
        d.0
    }
}

impl DensityOperator {
    pub fn new(h: HermitianOperator) -> Result<Self> {
        let trace = h.trace();
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::TraceNotUnit { trace });
        }
        check_psd(&h)?;
        Ok(Self(h))
    }

    /// `|psi><psi|` for a vector normalized here.
    pub fn pure(psi: &DVector<Complex64>) -> Result<Self> {
        let norm = psi.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Validation("pure state vector must be non-zero and finite".into()));
        }
        let unit = psi / Complex64::new(norm, 0.0);
        Self::new(HermitianOperator(ComplexMatrix::outer(&unit)))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self(HermitianOperator::identity(dim).scale(1.0 / dim as f64))
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    /// `Tr(rho^2)`
    pub fn purity(&self) -> f64 {
        trace_product(&self.0, &self.0).expect("same operator")
    }
}

/// Positive semidefinite Hermitian operator with non-negative trace. A zero
/// covariance is a valid (degenerate) measure; maps that divide by the trace
/// reject it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HermitianOperator", into = "HermitianOperator")]
pub struct CovarianceOperator(HermitianOperator);

impl TryFrom<HermitianOperator> for CovarianceOperator {
    type Error = Error;
    fn try_from(h: HermitianOperator) -> Result<Self> {
        Self::new(h)
    }
}

impl From<CovarianceOperator> for HermitianOperator {
    fn from(c: CovarianceOperator) -> Self {
        c.0
    }
}

impl CovarianceOperator {
    pub fn new(h: HermitianOperator) -> Result<Self> {
        check_psd(&h)?;
        Ok(Self(h))
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }
}

/// `B / Tr B`
pub fn density_from_covariance(b: &CovarianceOperator) -> Result<DensityOperator> {
    let trace = b.trace();
    if trace <= DEGENERATE_TRACE {
        return Err(Error::DegenerateMeasure { trace, floor: DEGENERATE_TRACE });
    }
    DensityOperator::new(b.0.scale(1.0 / trace))
}

/// Random Hermitian operator `(G + G*)/2` with standard complex Gaussian `G`.
pub fn random_hermitian<R: rand::Rng + ?Sized>(dim: usize, rng: &mut R) -> HermitianOperator {
    let g = gaussian_matrix(dim, rng);
    HermitianOperator::hermitian_part(&g)
}

/// Random full-rank covariance `G G* / dim`.
pub fn random_covariance<R: rand::Rng + ?Sized>(dim: usize, rng: &mut R) -> CovarianceOperator {
    let g = gaussian_matrix(dim, rng).into_inner();
    let b = (&g * g.adjoint()) / Complex64::new(dim as f64, 0.0);
    // symmetrize away rounding so the Hermitian check cannot trip
    let h = HermitianOperator::hermitian_part(&ComplexMatrix(b));
    CovarianceOperator::new(h).expect("G G* is positive semidefinite")
}

fn gaussian_matrix<R: rand::Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix(DMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(crate::rng::standard_normal(rng), crate::rng::standard_normal(rng))
    }))
}
