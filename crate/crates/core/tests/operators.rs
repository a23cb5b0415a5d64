use num_complex::Complex64 as C64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use nonmarkov::operator::random::{random_density_matrix, random_hermitian, random_ket};
use nonmarkov::operator::{
    fidelity, matrix_function, operator_norm, relative_entropy, renyi_relative_entropy, skew_information,
    trace_distance, trace_norm, tsallis_relative_entropy, CMatrix, DensityMatrix, HermitianOperator, MatrixFunction,
};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn conjugate(u: &CMatrix, rho: &DensityMatrix) -> DensityMatrix {
    DensityMatrix::with_tolerance(HermitianOperator::hermitian_part(&(u * rho.matrix() * u.adjoint())), 1e-9).unwrap()
}

/// Unitary from the QR factor of a complex Gaussian matrix.
fn random_unitary(d: usize, r: &mut ChaCha8Rng) -> CMatrix {
    let a = random_hermitian(d, r);
    let b = random_hermitian(d, r);
    let m = a.matrix() + b.matrix() * C64::i();
    m.qr().q()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trace_norm_sandwiches_operator_norm(seed in any::<u64>(), d in 2usize..6) {
        let a = random_hermitian(d, &mut rng(seed));
        let (t, o) = (trace_norm(&a), operator_norm(&a));
        prop_assert!(t >= o - 1e-12);
        prop_assert!(t <= d as f64 * o + 1e-12);
    }

    #[test]
    fn sqrt_squares_back(seed in any::<u64>(), d in 2usize..5) {
        let rho = random_density_matrix(d, &mut rng(seed));
        let s = matrix_function(rho.operator(), MatrixFunction::Sqrt).unwrap();
        let back = s.matrix() * s.matrix();
        prop_assert!((back - rho.matrix()).norm() <= 1e-9 * rho.matrix().norm());
    }

    #[test]
    fn eigendecomposition_reconstructs(seed in any::<u64>(), d in 2usize..6) {
        let a = random_hermitian(d, &mut rng(seed));
        let spec = a.spectral();
        prop_assert!((spec.reconstruct() - a.matrix()).norm() <= 1e-10 * a.matrix().norm());
    }

    #[test]
    fn relative_entropy_nonnegative(seed in any::<u64>(), d in 2usize..5) {
        let mut r = rng(seed);
        let rho = random_density_matrix(d, &mut r);
        let sigma = random_density_matrix(d, &mut r);
        prop_assert!(relative_entropy(&rho, &sigma).unwrap() >= -1e-9);
        prop_assert!(relative_entropy(&rho, &rho).unwrap().abs() <= 1e-9);
    }

    #[test]
    fn qubit_fidelity_distance_bounds(seed in any::<u64>(), pure in any::<bool>()) {
        let mut r = rng(seed);
        let rho = if pure { DensityMatrix::pure(&random_ket(2, &mut r)).unwrap() } else { random_density_matrix(2, &mut r) };
        let sigma = random_density_matrix(2, &mut r);
        let f = fidelity(&rho, &sigma).unwrap();
        let d = trace_distance(&rho, &sigma).unwrap();
        prop_assert!(1.0 - f <= d + 1e-10);
        prop_assert!(d <= (1.0 - f * f).max(0.0).sqrt() + 1e-10);
    }

    #[test]
    fn standard_fidelity_bounds_any_dimension(seed in any::<u64>(), d in 2usize..5) {
        let mut r = rng(seed);
        let rho = random_density_matrix(d, &mut r);
        let sigma = random_density_matrix(d, &mut r);
        let f = fidelity(&rho, &sigma).unwrap();
        let dist = trace_distance(&rho, &sigma).unwrap();
        prop_assert!(1.0 - f.sqrt() <= dist + 1e-10);
        prop_assert!(dist <= (1.0 - f).max(0.0).sqrt() + 1e-10);
        prop_assert!(dist <= (1.0 - f * f).max(0.0).sqrt() + 1e-10);
    }

    #[test]
    fn skew_information_is_nonnegative(seed in any::<u64>(), d in 2usize..5, p in 0.01..0.99f64) {
        let mut r = rng(seed);
        let rho = random_density_matrix(d, &mut r);
        let x = random_hermitian(d, &mut r);
        prop_assert!(skew_information(&rho, &x, p).unwrap() >= -1e-10);
    }

    #[test]
    fn pure_state_skew_information_is_variance(seed in any::<u64>(), d in 2usize..5, p in 0.01..0.99f64) {
        let mut r = rng(seed);
        let psi = random_ket(d, &mut r);
        let x = random_hermitian(d, &mut r);
        let x2 = HermitianOperator::hermitian_part(&(x.matrix() * x.matrix()));
        let variance = x2.expectation(&psi) - x.expectation(&psi).powi(2);
        let skew = skew_information(&DensityMatrix::pure(&psi).unwrap(), &x, p).unwrap();
        prop_assert!((skew - variance).abs() <= 1e-9);
    }

    #[test]
    fn divergences_are_unitarily_invariant(seed in any::<u64>(), d in 2usize..4) {
        let mut r = rng(seed);
        let rho = random_density_matrix(d, &mut r);
        let sigma = random_density_matrix(d, &mut r);
        let u = random_unitary(d, &mut r);
        let (ur, us) = (conjugate(&u, &rho), conjugate(&u, &sigma));
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * (1.0 + a.abs());
        prop_assert!(close(relative_entropy(&rho, &sigma).unwrap(), relative_entropy(&ur, &us).unwrap()));
        prop_assert!(close(renyi_relative_entropy(&rho, &sigma, 0.5).unwrap(), renyi_relative_entropy(&ur, &us, 0.5).unwrap()));
        prop_assert!(close(renyi_relative_entropy(&rho, &sigma, 2.0).unwrap(), renyi_relative_entropy(&ur, &us, 2.0).unwrap()));
        prop_assert!(close(tsallis_relative_entropy(&rho, &sigma, 0.4).unwrap(), tsallis_relative_entropy(&ur, &us, 0.4).unwrap()));
        prop_assert!(close(fidelity(&rho, &sigma).unwrap(), fidelity(&ur, &us).unwrap()));
        prop_assert!(close(trace_distance(&rho, &sigma).unwrap(), trace_distance(&ur, &us).unwrap()));
    }
}

/// The lower bound `1 − F ≤ D` with squared fidelity needs `d = 2`: commuting
/// qutrit states already break it.
#[test]
fn squared_fidelity_lower_bound_fails_for_qutrits() {
    let rho = DensityMatrix::new(HermitianOperator::from_diagonal(&[0.5, 0.5, 0.0])).unwrap();
    let sigma = DensityMatrix::new(HermitianOperator::from_diagonal(&[0.5, 0.0, 0.5])).unwrap();
    let f = fidelity(&rho, &sigma).unwrap();
    let d = trace_distance(&rho, &sigma).unwrap();
    assert!((f - 0.25).abs() < 1e-12);
    assert!((d - 0.5).abs() < 1e-12);
    assert!(1.0 - f > d);
    assert!(1.0 - f.sqrt() <= d + 1e-12);
}
