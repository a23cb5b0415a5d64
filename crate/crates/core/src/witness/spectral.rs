//! Time-independent eigenoperators of a commutative map family.

use nalgebra::Schur;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{violation_intervals, ViolationInterval, DETECTION_THRESHOLD};
use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::operator::{CMatrix, CVector};

/// Residual of `Λ_t f − μ f` above which the family is not commutative.
pub const MODE_RESIDUAL_TOL: f64 = 1e-6;
const COMBINATION_SEED: u64 = 0x6d6f646573;

#[derive(Clone, Debug)]
pub struct SpectralMode {
    /// `f_α` as a `d×d` operator with unit Hilbert-Schmidt norm.
    pub eigenoperator: CMatrix,
    /// `μ_α(t_k) = ⟨f_α, Λ_{t_k} f_α⟩`.
    pub eigenvalues: Vec<C64>,
    /// Largest `‖Λ_{t_k} f_α − μ_α(t_k) f_α‖` over the grid.
    pub max_residual: f64,
    /// Runs of interior nodes with `d|μ_α|/dt > 0`.
    pub monotonicity_violations: Vec<ViolationInterval>,
}

#[derive(Clone, Debug)]
pub struct SpectralModes {
    pub modes: Vec<SpectralMode>,
    /// All eigenoperators verified at every node.
    pub commutative: bool,
}

impl SpectralModes {
    pub fn monotone(&self) -> bool {
        self.modes.iter().all(|m| m.monotonicity_violations.is_empty())
    }
}

/// Eigenoperators are taken from a random positive combination of the maps
/// on the grid, which separates eigenvalues that coincide at any single node
/// but differ elsewhere, then checked node by node.
pub fn spectral_modes(traj: &Trajectory) -> Result<SpectralModes> {
    let n = traj.len();
    if n < 3 {
        return Err(Error::InvalidGrid("spectral modes need at least 3 nodes".into()));
    }
    let d2 = traj.dim() * traj.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(COMBINATION_SEED);
    let mut mix = CMatrix::zeros(d2, d2);
    for lam in &traj.maps()[1..] {
        mix += lam.matrix() * C64::new(rng.random_range(0.5..1.5), 0.0);
    }
    let scale = mix.norm().max(f64::MIN_POSITIVE);
    let schur = Schur::try_new(mix.clone(), f64::EPSILON, 100_000)
        .ok_or_else(|| Error::InvalidTrajectory("Schur decomposition did not converge".into()))?;
    let (_, upper) = schur.unpack();
    let mut clusters: Vec<(C64, usize)> = Vec::new();
    for &mu in upper.diagonal().iter() {
        match clusters.iter_mut().find(|(c, _)| (c - mu).norm() <= 1e-9 * scale) {
            Some(c) => c.1 += 1,
            None => clusters.push((mu, 1)),
        }
    }

    let mut vectors: Vec<CVector> = Vec::with_capacity(d2);
    for &(mu, count) in &clusters {
        let shifted = &mix - CMatrix::identity(d2, d2) * mu;
        let svd = shifted.svd(false, true);
        let v_t = svd.v_t.expect("requested");
        let null: Vec<CVector> = svd
            .singular_values
            .iter()
            .enumerate()
            .filter(|(_, &s)| s <= 1e-8 * scale)
            .map(|(i, _)| v_t.row(i).adjoint())
            .collect();
        if null.len() != count {
            return Err(Error::UnmatchedSubspace { eigenvalue: mu / C64::new(scale, 0.0) });
        }
        vectors.extend(null);
    }

    let times = traj.times();
    let d = traj.dim();
    let mut commutative = true;
    let mut modes = Vec::with_capacity(vectors.len());
    for f in vectors {
        let mut eigenvalues = Vec::with_capacity(n);
        let mut max_residual = 0.0f64;
        for lam in traj.maps() {
            let image = lam.matrix() * &f;
            let mu = f.dotc(&image);
            max_residual = max_residual.max((image - &f * mu).norm());
            eigenvalues.push(mu);
        }
        commutative &= max_residual < MODE_RESIDUAL_TOL;
        let modulus: Vec<f64> = eigenvalues.iter().map(|z| z.norm()).collect();
        let slopes: Vec<f64> =
            (1..n - 1).map(|k| (modulus[k + 1] - modulus[k - 1]) / (times[k + 1] - times[k - 1])).collect();
        let monotonicity_violations = violation_intervals(&times[1..n - 1], &slopes, DETECTION_THRESHOLD, 0.0);
        modes.push(SpectralMode {
            eigenoperator: CMatrix::from_column_slice(d, d, f.as_slice()),
            eigenvalues,
            max_residual,
            monotonicity_violations,
        });
    }
    Ok(SpectralModes { modes, commutative })
}
