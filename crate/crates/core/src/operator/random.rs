//! Random operators and states from Gaussian ensembles.

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{CMatrix, CVector, DensityMatrix, HermitianOperator};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Hermitian part of a complex Gaussian matrix.
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> HermitianOperator {
    let g = CMatrix::from_fn(dim, dim, |_, _| gaussian(rng));
    HermitianOperator::hermitian_part(&g)
}

/// Haar-random unit vector.
pub fn random_ket<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CVector {
    let v = CVector::from_fn(dim, |_, _| gaussian(rng));
    let n = v.norm();
    v.unscale(n)
}

/// `G G† / Tr G G†` for a Ginibre matrix `G` (Hilbert-Schmidt measure).
pub fn random_density_matrix<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DensityMatrix {
    let g = CMatrix::from_fn(dim, dim, |_, _| gaussian(rng));
    let w = &g * g.adjoint();
    let tr = w.trace().re;
    DensityMatrix::with_tolerance(HermitianOperator::hermitian_part(&w.unscale(tr)), 1e-9)
        .expect("Wishart matrices are positive")
}
