//! Pauli matrices, ladder operators and generalized Gell-Mann bases.

use num_complex::Complex64 as C64;

use super::{CMatrix, CVector, HermitianOperator};

const O: C64 = C64::new(0.0, 0.0);
const I1: C64 = C64::new(1.0, 0.0);
const IM: C64 = C64::new(0.0, 1.0);

pub fn sigma_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[O, I1, I1, O])
}

pub fn sigma_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[O, -IM, IM, O])
}

pub fn sigma_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[I1, O, O, -I1])
}

pub fn sigma_x_op() -> HermitianOperator {
    HermitianOperator::hermitian_part(&sigma_x())
}

pub fn sigma_y_op() -> HermitianOperator {
    HermitianOperator::hermitian_part(&sigma_y())
}

pub fn sigma_z_op() -> HermitianOperator {
    HermitianOperator::hermitian_part(&sigma_z())
}

/// `σ₊ = |2⟩⟨1|` with `|1⟩` the ground state (index 0).
pub fn sigma_plus() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[O, O, I1, O])
}

/// `σ₋ = |1⟩⟨2|`.
pub fn sigma_minus() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[O, I1, O, O])
}

/// Single-qubit Pauli by letter (`i`, `x`, `y`, `z`, case-insensitive).
pub fn pauli(letter: char) -> Option<CMatrix> {
    match letter.to_ascii_lowercase() {
        'i' => Some(CMatrix::identity(2, 2)),
        'x' => Some(sigma_x()),
        'y' => Some(sigma_y()),
        'z' => Some(sigma_z()),
        _ => None,
    }
}

/// Tensor product of Paulis, e.g. `"xx"` for `σ_x ⊗ σ_x`.
pub fn pauli_string(letters: &str) -> Option<HermitianOperator> {
    let mut acc = CMatrix::identity(1, 1);
    for c in letters.chars() {
        acc = acc.kronecker(&pauli(c)?);
    }
    Some(HermitianOperator::hermitian_part(&acc))
}

/// Traceless Hermitian basis of `d×d` matrices (generalized Gell-Mann), `d² − 1`
/// elements, each with Hilbert-Schmidt norm √2. For `d = 2` these are `σ_x, σ_y, σ_z`
/// up to ordering.
pub fn gell_mann(dim: usize) -> Vec<HermitianOperator> {
    let mut out = Vec::with_capacity(dim * dim - 1);
    for j in 0..dim {
        for k in (j + 1)..dim {
            let mut s = CMatrix::zeros(dim, dim);
            s[(j, k)] = I1;
            s[(k, j)] = I1;
            out.push(HermitianOperator::hermitian_part(&s));
            let mut a = CMatrix::zeros(dim, dim);
            a[(j, k)] = -IM;
            a[(k, j)] = IM;
            out.push(HermitianOperator::hermitian_part(&a));
        }
    }
    for l in 1..dim {
        let norm = (2.0 / (l * (l + 1)) as f64).sqrt();
        let mut diag = vec![0.0; dim];
        for v in diag.iter_mut().take(l) {
            *v = norm;
        }
        diag[l] = -(l as f64) * norm;
        out.push(HermitianOperator::from_diagonal(&diag));
    }
    out
}

/// Computational basis ket `|k⟩`.
pub fn ket(dim: usize, k: usize) -> CVector {
    let mut v = CVector::zeros(dim);
    v[k] = I1;
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gell_mann_is_orthogonal_and_traceless() {
        for d in 2..5 {
            let basis = gell_mann(d);
            assert_eq!(basis.len(), d * d - 1);
            for (a, x) in basis.iter().enumerate() {
                assert!(x.trace().abs() < 1e-14);
                for (b, y) in basis.iter().enumerate() {
                    let hs = (x.matrix() * y.matrix()).trace().re;
                    let expect = if a == b { 2.0 } else { 0.0 };
                    assert!((hs - expect).abs() < 1e-12, "d={d} a={a} b={b} hs={hs}");
                }
            }
        }
    }

    #[test]
    fn ladder_operators() {
        let n = sigma_plus() * sigma_minus();
        assert_eq!(n[(1, 1)], I1);
        assert_eq!(n[(0, 0)], O);
    }
}
