//! Dense complex Hermitian linear algebra.
//!
//! Every witness in the crate reduces to a spectral computation on a small
//! Hermitian matrix, so the carrier types here keep a symmetrized matrix and
//! expose eigenvalue-based norms and matrix functions.

pub(crate) mod divergence;
pub mod pauli;
pub mod random;

pub use divergence::{
    fidelity, relative_entropy, renyi_relative_entropy, skew_information, trace_distance, tsallis_relative_entropy,
    von_neumann_entropy,
};

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Relative Hermiticity tolerance for [`HermitianOperator::new`].
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Trace and positivity tolerance for [`DensityMatrix::new`].
pub const STATE_TOL: f64 = 1e-10;
/// Most negative eigenvalue accepted before a matrix function refuses its input.
pub const PSD_TOL: f64 = 1e-8;
/// Eigenvalues below this (relative to the operator norm) count as exact zeros.
pub const ZERO_TOL: f64 = 1e-12;
/// Eigenvalue threshold of the support-containment test in divergences.
pub const SUPPORT_TOL: f64 = 1e-10;

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator(CMatrix);

impl HermitianOperator {
    /// Validates Hermiticity within [`HERMITIAN_TOL`] of the largest entry and
    /// stores the exactly symmetrized matrix.
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
        }
        let scale = max_abs(&m);
        let deviation = max_abs(&(&m - m.adjoint()));
        if deviation > HERMITIAN_TOL * scale {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self::hermitian_part(&m))
    }

    /// `(m + m†) / 2`, for matrices that are Hermitian up to round-off.
    pub fn hermitian_part(m: &CMatrix) -> Self {
        Self((m + m.adjoint()).scale(0.5))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(CMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(CMatrix::identity(dim, dim))
    }

    pub fn from_diagonal(values: &[f64]) -> Self {
        let d = values.len();
        Self(CMatrix::from_fn(d, d, |i, j| if i == j { C64::new(values[i], 0.0) } else { C64::new(0.0, 0.0) }))
    }

    /// `|ψ⟩⟨ψ|` without normalizing `ψ`.
    pub fn outer(ket: &CVector) -> Self {
        Self::hermitian_part(&(ket * ket.adjoint()))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn scale(&self, c: f64) -> Self {
        Self(self.0.scale(c))
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self(self.0.kronecker(&other.0))
    }

    /// `⟨ψ|A|ψ⟩`.
    pub fn expectation(&self, ket: &CVector) -> f64 {
        (ket.adjoint() * &self.0 * ket)[(0, 0)].re
    }

    /// Real eigenvalues in descending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.0.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().last().copied().unwrap_or(0.0)
    }

    pub fn spectral(&self) -> SpectralDecomposition {
        let eig = SymmetricEigen::new(self.0.clone());
        let d = self.dim();
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let eigenvectors = CMatrix::from_fn(d, d, |i, j| eig.eigenvectors[(i, order[j])]);
        SpectralDecomposition { eigenvalues, eigenvectors }
    }

    /// Largest absolute entry difference.
    pub fn distance(&self, other: &Self) -> f64 {
        max_abs(&(&self.0 - &other.0))
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(())
    }
}

impl Add for &HermitianOperator {
    type Output = HermitianOperator;
    fn add(self, rhs: Self) -> HermitianOperator {
        HermitianOperator(&self.0 + &rhs.0)
    }
}

impl Sub for &HermitianOperator {
    type Output = HermitianOperator;
    fn sub(self, rhs: Self) -> HermitianOperator {
        HermitianOperator(&self.0 - &rhs.0)
    }
}

impl Mul<f64> for &HermitianOperator {
    type Output = HermitianOperator;
    fn mul(self, rhs: f64) -> HermitianOperator {
        self.scale(rhs)
    }
}

/// Eigenvalues in descending order with matching orthonormal eigenvector columns.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl SpectralDecomposition {
    pub fn reconstruct(&self) -> CMatrix {
        self.map(|x| x)
    }

    /// `U f(Λ) U†`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let u = &self.eigenvectors;
        let d = self.eigenvalues.len();
        let mut scaled = u.clone();
        for j in 0..d {
            let fj = f(self.eigenvalues[j]);
            scaled.column_mut(j).scale_mut(fj);
        }
        scaled * u.adjoint()
    }

    pub fn eigenvector(&self, k: usize) -> CVector {
        self.eigenvectors.column(k).into_owned()
    }
}

/// A positive semidefinite, unit-trace [`HermitianOperator`].
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(HermitianOperator);

impl DensityMatrix {
    pub fn new(op: HermitianOperator) -> Result<Self> {
        Self::with_tolerance(op, STATE_TOL)
    }

    /// Same checks as [`DensityMatrix::new`] with a caller-chosen tolerance,
    /// used for states produced by numerical evolution.
    pub fn with_tolerance(op: HermitianOperator, tol: f64) -> Result<Self> {
        let tr = op.trace();
        if (tr - 1.0).abs() > tol {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min = op.min_eigenvalue();
        if min < -tol {
            return Err(Error::InvalidState(format!("minimum eigenvalue {min:e} is negative")));
        }
        Ok(Self(op))
    }

    pub fn from_matrix(m: CMatrix) -> Result<Self> {
        Self::new(HermitianOperator::new(m)?)
    }

    /// `|ψ⟩⟨ψ| / ⟨ψ|ψ⟩`.
    pub fn pure(ket: &CVector) -> Result<Self> {
        let n = ket.norm();
        if n == 0.0 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        Ok(Self(HermitianOperator::outer(&ket.unscale(n))))
    }

    /// Computational basis state `|k⟩⟨k|`.
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut ket = CVector::zeros(dim);
        ket[k] = C64::new(1.0, 0.0);
        Self(HermitianOperator::outer(&ket))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self(HermitianOperator::identity(dim).scale(1.0 / dim as f64))
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.0
    }

    pub fn matrix(&self) -> &CMatrix {
        self.0.matrix()
    }

    pub fn into_operator(self) -> HermitianOperator {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn purity(&self) -> f64 {
        (self.matrix() * self.matrix()).trace().re
    }
}

pub fn trace_norm(a: &HermitianOperator) -> f64 {
    a.eigenvalues().iter().map(|x| x.abs()).sum()
}

pub fn operator_norm(a: &HermitianOperator) -> f64 {
    a.eigenvalues().iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MatrixFunction {
    Sqrt,
    Log,
    Power(f64),
}

impl MatrixFunction {
    /// Scalar version; `x` is already clamped, zeros map to zero.
    fn apply(self, x: f64) -> f64 {
        if x == 0.0 {
            return 0.0;
        }
        match self {
            MatrixFunction::Sqrt => x.sqrt(),
            MatrixFunction::Log => x.ln(),
            MatrixFunction::Power(p) => x.powf(p),
        }
    }
}

/// Clamps an eigenvalue list of a PSD operator: values below
/// `ZERO_TOL * max(λ)` (including small negatives) become exact zeros.
pub(crate) fn clamp_spectrum(values: &[f64]) -> Result<Vec<f64>> {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -PSD_TOL {
        return Err(Error::NotPsd { min_eigenvalue: min });
    }
    let top = values.iter().copied().fold(0.0, f64::max);
    let cut = ZERO_TOL * top.max(f64::MIN_POSITIVE);
    Ok(values.iter().map(|&x| if x < cut { 0.0 } else { x }).collect())
}

/// `U f(Λ) U†` of a PSD operator. Zero eigenvalues map to zero for every `f`
/// (including `log` and negative powers); divergences own the support logic.
pub fn matrix_function(a: &HermitianOperator, f: MatrixFunction) -> Result<HermitianOperator> {
    let mut spec = a.spectral();
    spec.eigenvalues = clamp_spectrum(&spec.eigenvalues)?;
    Ok(HermitianOperator::hermitian_part(&spec.map(|x| f.apply(x))))
}

/// `|φ⁺⟩⟨φ⁺|` with `|φ⁺⟩ = d^{-1/2} Σ_i |i⟩⊗|i⟩`.
pub fn max_entangled_projector(dim: usize) -> Result<DensityMatrix> {
    if dim == 0 {
        return Err(Error::DimensionMismatch { expected: 1, found: 0 });
    }
    let mut ket = CVector::zeros(dim * dim);
    let amp = C64::new(1.0 / (dim as f64).sqrt(), 0.0);
    for i in 0..dim {
        ket[i * dim + i] = amp;
    }
    Ok(DensityMatrix(HermitianOperator::outer(&ket)))
}

#[cfg(test)]
mod tests {
    use super::pauli::*;
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn trace_norm_examples() {
        assert_eq!(trace_norm(&HermitianOperator::zeros(3)), 0.0);
        assert_abs_diff_eq!(trace_norm(&sigma_x_op()), 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(trace_norm(&HermitianOperator::from_diagonal(&[0.7, -0.3])), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn operator_norm_examples() {
        assert_abs_diff_eq!(operator_norm(&HermitianOperator::identity(2)), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(operator_norm(&sigma_z_op()), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(operator_norm(&HermitianOperator::from_diagonal(&[3.0, -5.0])), 5.0, epsilon = 1e-14);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)],
        );
        assert!(matches!(HermitianOperator::new(m), Err(Error::NotHermitian { .. })));
        let r = CMatrix::zeros(2, 3);
        assert!(matches!(HermitianOperator::new(r), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn matrix_function_examples() {
        let s = matrix_function(&HermitianOperator::from_diagonal(&[4.0, 9.0]), MatrixFunction::Sqrt).unwrap();
        assert!(s.distance(&HermitianOperator::from_diagonal(&[2.0, 3.0])) < 1e-14);

        let id = HermitianOperator::identity(2);
        let p = matrix_function(&id, MatrixFunction::Power(0.5)).unwrap();
        assert!(p.distance(&id) < 1e-14);

        let proj = (&id + &sigma_x_op()).scale(0.5);
        let sp = matrix_function(&proj, MatrixFunction::Sqrt).unwrap();
        assert!(sp.distance(&proj) < 1e-12);
    }

    #[test]
    fn matrix_function_rejects_negative() {
        let a = HermitianOperator::from_diagonal(&[1.0, -1e-6]);
        assert!(matches!(matrix_function(&a, MatrixFunction::Sqrt), Err(Error::NotPsd { .. })));
        // within the PSD tolerance: clamped
        let b = HermitianOperator::from_diagonal(&[1.0, -1e-9]);
        let s = matrix_function(&b, MatrixFunction::Log).unwrap();
        assert!(s.distance(&HermitianOperator::zeros(2)) < 1e-14);
    }

    #[test]
    fn spectral_reconstruction() {
        let a = HermitianOperator::new(CMatrix::from_row_slice(
            3,
            3,
            &[
                C64::new(1.0, 0.0),
                C64::new(0.5, -0.2),
                C64::new(0.0, 0.3),
                C64::new(0.5, 0.2),
                C64::new(-2.0, 0.0),
                C64::new(0.1, 0.0),
                C64::new(0.0, -0.3),
                C64::new(0.1, 0.0),
                C64::new(0.4, 0.0),
            ],
        ))
        .unwrap();
        let s = a.spectral();
        assert!(s.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        assert!(max_abs(&(s.reconstruct() - a.matrix())) < 1e-12);
        let gram = s.eigenvectors.adjoint() * &s.eigenvectors;
        assert!(max_abs(&(gram - CMatrix::identity(3, 3))) < 1e-12);
    }

    #[test]
    fn max_entangled_projector_qubit() {
        let p = max_entangled_projector(2).unwrap();
        let m = p.matrix();
        for (i, j) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
            assert_abs_diff_eq!(m[(i, j)].re, 0.5, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(max_abs(m), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p.operator().trace(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.purity(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::new(HermitianOperator::from_diagonal(&[0.6, 0.6])).is_err());
        assert!(DensityMatrix::new(HermitianOperator::from_diagonal(&[1.1, -0.1])).is_err());
        assert!(DensityMatrix::new(HermitianOperator::from_diagonal(&[0.25, 0.75])).is_ok());
    }
}
