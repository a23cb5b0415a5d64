//! Closed-form entropy production for qubits.

use super::{estimate, series, Sample, Signature, WitnessSpec, DETECTION_THRESHOLD};
use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::operator::DensityMatrix;

#[derive(Clone, Debug)]
pub struct QubitEntropyFlow {
    /// Interior grid nodes.
    pub times: Vec<f64>,
    /// `dS(ρ_t)/dt = −λ̇⁺ log(λ⁺/λ⁻)`.
    pub closed_form: Vec<f64>,
    /// `−d/dt S(ρ_t ‖ I/2)`, which equals `dS(ρ_t)/dt` because the two
    /// differ by the constant `log 2`.
    pub generic: Vec<f64>,
    pub max_discrepancy: f64,
    /// Both series have the same sign wherever either exceeds the detection
    /// threshold.
    pub signs_agree: bool,
}

fn eigen_pair(rho: &crate::operator::HermitianOperator) -> (f64, f64) {
    let e = rho.eigenvalues();
    (e[0], e[1])
}

pub fn qubit_entropy_flow(traj: &Trajectory, rho: &DensityMatrix) -> Result<QubitEntropyFlow> {
    if traj.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: traj.dim() });
    }
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: rho.dim() });
    }
    let times = traj.times();
    let n = times.len();
    let pairs: Vec<(f64, f64)> = traj.maps().iter().map(|m| eigen_pair(&m.apply_hermitian(rho.operator()))).collect();
    let upper: Vec<Sample> = pairs.iter().map(|&(hi, _)| Sample { value: hi, signature: Signature::Smooth }).collect();
    let mut closed_form = Vec::with_capacity(n.saturating_sub(2));
    for k in 1..n - 1 {
        let lo = k.saturating_sub(2);
        let hi = (k + 2).min(n - 1);
        let rate = estimate(&times[lo..=hi], &upper[lo..=hi], k - lo);
        let (lp, lm) = pairs[k];
        let value = if lp - lm <= 1e-12 || rate == 0.0 {
            0.0
        } else if lm <= 0.0 {
            return Err(Error::NonFinite { t: times[k] });
        } else {
            -rate * (lp / lm).ln()
        };
        closed_form.push(value);
    }
    let spec = WitnessSpec::relative_entropy(rho.clone(), DensityMatrix::maximally_mixed(2))?;
    let generic: Vec<f64> = series(traj, &spec)?.values.iter().map(|v| -v).collect();
    let max_discrepancy = closed_form.iter().zip(&generic).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let signs_agree = closed_form
        .iter()
        .zip(&generic)
        .all(|(&a, &b)| (a.abs() <= DETECTION_THRESHOLD && b.abs() <= DETECTION_THRESHOLD) || a.signum() == b.signum());
    Ok(QubitEntropyFlow { times: times[1..n - 1].to_vec(), closed_form, generic, max_discrepancy, signs_agree })
}

/// Eigenvalues of a dephased qubit state with coherence damped by `e^{−Γ}`.
pub fn dephasing_eigenvalues(rho: &DensityMatrix, gamma_integral: f64) -> (f64, f64) {
    eigenvalue_formula(rho, gamma_integral, 4.0)
}

/// Same, with the off-diagonal weight entering without the factor 4 of the
/// 2×2 discriminant. Agrees with [`dephasing_eigenvalues`] only when
/// `ρ₁₂ = 0`.
pub fn printed_dephasing_eigenvalues(rho: &DensityMatrix, gamma_integral: f64) -> (f64, f64) {
    eigenvalue_formula(rho, gamma_integral, 1.0)
}

fn eigenvalue_formula(rho: &DensityMatrix, gamma_integral: f64, weight: f64) -> (f64, f64) {
    let m = rho.matrix();
    let pop = m[(0, 0)].re - m[(1, 1)].re;
    let coh = m[(0, 1)].norm_sqr() * (-2.0 * gamma_integral).exp();
    let root = (pop * pop + weight * coh).sqrt();
    (0.5 * (1.0 + root), 0.5 * (1.0 - root))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{evolve, Backend, GeneratorModel, OdeOptions, ScalarFn, TimeGrid};
    use crate::operator::{CMatrix, CVector};
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64 as C64;
    use std::f64::consts::PI;

    fn sine_dephasing(nodes: usize) -> Trajectory {
        let grid = TimeGrid::uniform(2.0 * PI, nodes).unwrap();
        let model = GeneratorModel::dephasing(ScalarFn::sine(1.0, 1.0, 0.0));
        evolve(&model, &grid, Backend::Analytic, &OdeOptions::default()).unwrap()
    }

    fn state(a: f64, re: f64, im: f64) -> DensityMatrix {
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[C64::new(a, 0.0), C64::new(re, im), C64::new(re, -im), C64::new(1.0 - a, 0.0)],
        );
        DensityMatrix::from_matrix(m).unwrap()
    }

    #[test]
    fn maximally_mixed_has_zero_flow() {
        let traj = sine_dephasing(129);
        let f = qubit_entropy_flow(&traj, &DensityMatrix::maximally_mixed(2)).unwrap();
        assert!(f.closed_form.iter().chain(&f.generic).all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn plus_state_entropy_decreases_on_second_half() {
        let traj = sine_dephasing(257);
        let ket = CVector::from_vec(vec![C64::new(0.5f64.sqrt(), 0.0); 2]);
        let f = qubit_entropy_flow(&traj, &DensityMatrix::pure(&ket).unwrap()).unwrap();
        assert!(f.signs_agree);
        let negative =
            f.times.iter().zip(&f.closed_form).any(|(&t, &v)| t > PI && t < 2.0 * PI && v < -DETECTION_THRESHOLD);
        assert!(negative);
        assert!(f.times.iter().zip(&f.closed_form).filter(|(&t, _)| t < PI - 0.1).all(|(_, &v)| v > 0.0));
    }

    #[test]
    fn closed_form_matches_generic_flow() {
        let traj = sine_dephasing(2049);
        let f = qubit_entropy_flow(&traj, &state(0.6, 0.3, 0.1)).unwrap();
        assert!(f.signs_agree);
        assert!(f.max_discrepancy < 1e-6, "{}", f.max_discrepancy);
    }

    #[test]
    fn eigenvalue_formulas_against_diagonalization() {
        let rho = state(0.7, 0.2, -0.25);
        for &g in &[0.0f64, 0.3, 1.7] {
            let damp = (-g).exp();
            let m = rho.matrix();
            let damped = CMatrix::from_row_slice(2, 2, &[m[(0, 0)], m[(0, 1)] * damp, m[(1, 0)] * damp, m[(1, 1)]]);
            let e = DensityMatrix::from_matrix(damped).unwrap().operator().eigenvalues();
            let (hi, lo) = dephasing_eigenvalues(&rho, g);
            assert_abs_diff_eq!(hi, e[0], epsilon = 1e-12);
            assert_abs_diff_eq!(lo, e[1], epsilon = 1e-12);
            let (phi, _) = printed_dephasing_eigenvalues(&rho, g);
            assert!((phi - e[0]).abs() > 1e-3);
        }
        let diag = state(0.8, 0.0, 0.0);
        assert_eq!(printed_dephasing_eigenvalues(&diag, 0.4), dephasing_eigenvalues(&diag, 0.4));
    }
}
