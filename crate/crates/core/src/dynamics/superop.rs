//! Linear maps on `d×d` operators as `d²×d²` matrices acting on
//! column-major vectorizations: `vec(ρ)[i + j·d] = ρ_ij`, so that
//! `vec(A X B) = (Bᵀ ⊗ A) vec(X)`.

use nalgebra::SVD;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::operator::{CMatrix, CVector, HermitianOperator};

/// Condition-number guard for propagator inversion.
pub const MAX_CONDITION: f64 = 1e10;

#[derive(Clone, Debug, PartialEq)]
pub struct Superoperator {
    dim: usize,
    matrix: CMatrix,
}

impl Superoperator {
    pub fn new(dim: usize, matrix: CMatrix) -> Result<Self> {
        let n = dim * dim;
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: matrix.nrows().max(matrix.ncols()) });
        }
        Ok(Self { dim, matrix })
    }

    pub(crate) fn from_parts(dim: usize, matrix: CMatrix) -> Self {
        debug_assert_eq!(matrix.nrows(), dim * dim);
        Self { dim, matrix }
    }

    pub fn identity(dim: usize) -> Self {
        Self { dim, matrix: CMatrix::identity(dim * dim, dim * dim) }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { dim, matrix: CMatrix::zeros(dim * dim, dim * dim) }
    }

    /// `X ↦ A X B`.
    pub fn sandwich(a: &CMatrix, b: &CMatrix) -> Self {
        Self { dim: a.nrows(), matrix: b.transpose().kronecker(a) }
    }

    /// `X ↦ A X`.
    pub fn left(a: &CMatrix) -> Self {
        Self::sandwich(a, &CMatrix::identity(a.nrows(), a.nrows()))
    }

    /// `X ↦ X B`.
    pub fn right(b: &CMatrix) -> Self {
        Self::sandwich(&CMatrix::identity(b.nrows(), b.nrows()), b)
    }

    /// `X ↦ ω Tr X`.
    pub fn replacement(omega: &CMatrix) -> Self {
        let d = omega.nrows();
        let w = CVector::from_column_slice(omega.as_slice());
        let id = CMatrix::identity(d, d);
        let i = CVector::from_column_slice(id.as_slice());
        Self { dim: d, matrix: w * i.transpose() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        let v = CVector::from_column_slice(x.as_slice());
        let out = &self.matrix * v;
        CMatrix::from_column_slice(self.dim, self.dim, out.as_slice())
    }

    pub fn apply_hermitian(&self, x: &HermitianOperator) -> HermitianOperator {
        HermitianOperator::hermitian_part(&self.apply(x.matrix()))
    }

    /// `(id ⊗ Λ) X` for `X` on the doubled space (reference factor first).
    pub fn apply_extended(&self, x: &CMatrix) -> CMatrix {
        let d = self.dim;
        let mut out = CMatrix::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                let block = x.view((i * d, j * d), (d, d)).into_owned();
                out.view_mut((i * d, j * d), (d, d)).copy_from(&self.apply(&block));
            }
        }
        out
    }

    pub fn apply_extended_hermitian(&self, x: &HermitianOperator) -> HermitianOperator {
        HermitianOperator::hermitian_part(&self.apply_extended(x.matrix()))
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        Self { dim: self.dim, matrix: &self.matrix * &other.matrix }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { dim: self.dim, matrix: &self.matrix + &other.matrix }
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { dim: self.dim, matrix: self.matrix.scale(c) }
    }

    pub fn scale_complex(&self, c: C64) -> Self {
        Self { dim: self.dim, matrix: &self.matrix * c }
    }

    /// Heisenberg-picture dual, `Tr(Λ(ρ) X) = Tr(ρ Λ*(X))`. For Hermiticity-preserving
    /// maps this is the Hilbert-Schmidt adjoint.
    pub fn dual(&self) -> Self {
        Self { dim: self.dim, matrix: self.matrix.adjoint() }
    }

    /// `Σ_ij |i⟩⟨j| ⊗ Λ(|i⟩⟨j|)`.
    pub fn choi(&self) -> HermitianOperator {
        let d = self.dim;
        let c = CMatrix::from_fn(d * d, d * d, |r, s| {
            let (i, k) = (r / d, r % d);
            let (j, l) = (s / d, s % d);
            self.matrix[(k + l * d, i + j * d)]
        });
        HermitianOperator::hermitian_part(&c)
    }

    /// Largest deviation of `Tr Λ(E_ij)` from `δ_ij`.
    pub fn trace_deviation(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0f64;
        for col in 0..d * d {
            let tr: C64 = (0..d).map(|k| self.matrix[(k + k * d, col)]).sum();
            let (i, j) = (col % d, col / d);
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((tr - target).norm());
        }
        worst
    }

    pub fn singular_values(&self) -> Vec<f64> {
        SVD::new(self.matrix.clone(), false, false).singular_values.iter().copied().collect()
    }

    pub fn condition_number(&self) -> f64 {
        let sv = self.singular_values();
        let max = sv.iter().copied().fold(0.0, f64::max);
        let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
        if min == 0.0 {
            f64::INFINITY
        } else {
            max / min
        }
    }

    /// Inverse through the SVD, refused when the condition number exceeds
    /// [`MAX_CONDITION`]. `t` only labels the error.
    pub fn inverse(&self, t: f64) -> Result<Self> {
        let svd = SVD::new(self.matrix.clone(), true, true);
        let max = svd.singular_values.iter().copied().fold(0.0, f64::max);
        let min = svd.singular_values.iter().copied().fold(f64::INFINITY, f64::min);
        let condition = if min == 0.0 { f64::INFINITY } else { max / min };
        if condition.is_nan() || condition > MAX_CONDITION {
            return Err(Error::SingularPropagator { t, condition });
        }
        let u = svd.u.as_ref().expect("u computed");
        let v_t = svd.v_t.as_ref().expect("v_t computed");
        let mut v = v_t.adjoint();
        for (k, s) in svd.singular_values.iter().enumerate() {
            v.column_mut(k).scale_mut(1.0 / s);
        }
        Ok(Self { dim: self.dim, matrix: v * u.adjoint() })
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (&self.matrix - &other.matrix).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Frobenius norm of the difference.
    pub fn distance(&self, other: &Self) -> f64 {
        (&self.matrix - &other.matrix).norm()
    }
}
