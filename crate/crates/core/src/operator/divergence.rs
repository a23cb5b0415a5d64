//! Distances, entropies and skew information on density matrices.
//!
//! Natural logarithms throughout. Divergences are evaluated in the joint
//! eigenbasis form `Σ_ij f(p_i, q_j) |⟨u_i|v_j⟩|²`, which keeps the support
//! bookkeeping explicit.

use super::{
    clamp_spectrum, matrix_function, trace_norm, DensityMatrix, HermitianOperator, MatrixFunction,
    SpectralDecomposition, SUPPORT_TOL,
};
use crate::error::{Error, Result};

fn same_dim(a: &DensityMatrix, b: &DensityMatrix) -> Result<()> {
    a.operator().check_dim(b.operator())
}

struct Clamped {
    values: Vec<f64>,
    spec: SpectralDecomposition,
}

fn clamped(rho: &HermitianOperator) -> Result<Clamped> {
    let spec = rho.spectral();
    let values = clamp_spectrum(&spec.eigenvalues)?;
    Ok(Clamped { values, spec })
}

/// `|⟨u_i|v_j⟩|²` for the two eigenbases.
fn overlaps(a: &SpectralDecomposition, b: &SpectralDecomposition) -> Vec<Vec<f64>> {
    let m = a.eigenvectors.adjoint() * &b.eigenvectors;
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)].norm_sqr()).collect()).collect()
}

/// True when some eigenvector of `σ` with eigenvalue below [`SUPPORT_TOL`]
/// carries weight of `ρ`.
fn support_violated(rho: &Clamped, sigma: &Clamped, ov: &[Vec<f64>]) -> bool {
    (0..sigma.values.len()).any(|j| {
        sigma.values[j] < SUPPORT_TOL && {
            let weight: f64 = (0..rho.values.len()).map(|i| rho.values[i] * ov[i][j]).sum();
            weight > SUPPORT_TOL
        }
    })
}

pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    same_dim(rho, sigma)?;
    Ok(0.5 * trace_norm(&(rho.operator() - sigma.operator())))
}

/// Uhlmann fidelity `(Tr √(√ρ σ √ρ))²`.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    same_dim(rho, sigma)?;
    Ok(fidelity_raw(rho.operator(), sigma.operator())?.clamp(0.0, 1.0))
}

pub(crate) fn fidelity_raw(rho: &HermitianOperator, sigma: &HermitianOperator) -> Result<f64> {
    let s = matrix_function(rho, MatrixFunction::Sqrt)?;
    let inner = HermitianOperator::hermitian_part(&(s.matrix() * sigma.matrix() * s.matrix()));
    let root: f64 = inner.eigenvalues().iter().map(|&x| x.max(0.0).sqrt()).sum();
    Ok(root * root)
}

pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    von_neumann_raw(rho.operator())
}

pub(crate) fn von_neumann_raw(rho: &HermitianOperator) -> Result<f64> {
    let values = clamp_spectrum(&rho.eigenvalues())?;
    Ok(-values.iter().filter(|&&p| p > 0.0).map(|&p| p * p.ln()).sum::<f64>())
}

/// `Tr ρ(log ρ − log σ)`; `+∞` when `supp ρ ⊄ supp σ`.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    same_dim(rho, sigma)?;
    relative_entropy_raw(rho.operator(), sigma.operator())
}

pub(crate) fn relative_entropy_raw(rho: &HermitianOperator, sigma: &HermitianOperator) -> Result<f64> {
    let r = clamped(rho)?;
    let s = clamped(sigma)?;
    let ov = overlaps(&r.spec, &s.spec);
    if support_violated(&r, &s, &ov) {
        return Ok(f64::INFINITY);
    }
    let mut total = 0.0;
    for (i, &p) in r.values.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        total += p * p.ln();
        for (j, &q) in s.values.iter().enumerate() {
            if q > 0.0 {
                total -= p * q.ln() * ov[i][j];
            }
        }
    }
    Ok(total.max(0.0))
}

/// `Tr ρ^α σ^{1−α}` on the supports, or `None` when it diverges (`α > 1`
/// with a support violation).
fn petz_trace(rho: &HermitianOperator, sigma: &HermitianOperator, alpha: f64) -> Result<Option<f64>> {
    let r = clamped(rho)?;
    let s = clamped(sigma)?;
    let ov = overlaps(&r.spec, &s.spec);
    if alpha > 1.0 && support_violated(&r, &s, &ov) {
        return Ok(None);
    }
    let mut q_sum = 0.0;
    for (i, &p) in r.values.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        for (j, &q) in s.values.iter().enumerate() {
            if q == 0.0 {
                continue;
            }
            q_sum += p.powf(alpha) * q.powf(1.0 - alpha) * ov[i][j];
        }
    }
    Ok(Some(q_sum))
}

/// Rényi divergence `(α−1)⁻¹ log Tr ρ^α σ^{1−α}` for `α ∈ [0,1) ∪ (1,2]`.
pub fn renyi_relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix, alpha: f64) -> Result<f64> {
    same_dim(rho, sigma)?;
    renyi_raw(rho.operator(), sigma.operator(), alpha)
}

pub(crate) fn check_renyi_alpha(alpha: f64) -> Result<()> {
    if !(0.0..=2.0).contains(&alpha) || alpha == 1.0 {
        return Err(Error::ParameterOutOfRange { name: "alpha", value: alpha, range: "[0,1) U (1,2]" });
    }
    Ok(())
}

pub(crate) fn renyi_raw(rho: &HermitianOperator, sigma: &HermitianOperator, alpha: f64) -> Result<f64> {
    check_renyi_alpha(alpha)?;
    match petz_trace(rho, sigma, alpha)? {
        None => Ok(f64::INFINITY),
        Some(q) if q <= 0.0 => Ok(f64::INFINITY),
        Some(q) => Ok(q.ln() / (alpha - 1.0)),
    }
}

/// Tsallis divergence `(1−q)⁻¹ (1 − Tr ρ^q σ^{1−q})` for `q ∈ [0,1)`.
pub fn tsallis_relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix, q: f64) -> Result<f64> {
    same_dim(rho, sigma)?;
    tsallis_raw(rho.operator(), sigma.operator(), q)
}

pub(crate) fn check_tsallis_q(q: f64) -> Result<()> {
    if !(0.0..1.0).contains(&q) {
        return Err(Error::ParameterOutOfRange { name: "q", value: q, range: "[0,1)" });
    }
    Ok(())
}

pub(crate) fn tsallis_raw(rho: &HermitianOperator, sigma: &HermitianOperator, q: f64) -> Result<f64> {
    check_tsallis_q(q)?;
    let tr = petz_trace(rho, sigma, q)?.unwrap_or(0.0);
    Ok((1.0 - tr) / (1.0 - q))
}

/// Wigner-Yanase-Dyson skew information `−½ Tr [ρ^p, X][ρ^{1−p}, X]`.
pub fn skew_information(rho: &DensityMatrix, x: &HermitianOperator, p: f64) -> Result<f64> {
    rho.operator().check_dim(x)?;
    skew_raw(rho.operator(), x, p)
}

pub(crate) fn check_skew_p(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::ParameterOutOfRange { name: "p", value: p, range: "(0,1)" });
    }
    Ok(())
}

/// Evaluated as `Σ_ij |X̃_ij|² (p_i − p_i^p p_j^{1−p})` in the eigenbasis of ρ.
pub(crate) fn skew_raw(rho: &HermitianOperator, x: &HermitianOperator, p: f64) -> Result<f64> {
    check_skew_p(p)?;
    let r = clamped(rho)?;
    let xt = r.spec.eigenvectors.adjoint() * x.matrix() * &r.spec.eigenvectors;
    let pw = |v: f64, e: f64| if v == 0.0 { 0.0 } else { v.powf(e) };
    let n = r.values.len();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            let w = xt[(i, j)].norm_sqr();
            total += w * (r.values[i] - pw(r.values[i], p) * pw(r.values[j], 1.0 - p));
        }
    }
    Ok(total)
}
