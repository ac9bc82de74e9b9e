//! Fixture generators for the two sharpness families used by the CLI and the
//! test suite.

use crate::error::{Error, Result};
use crate::matrix::{hermitian_basis, BipartiteOperator, CMatrix, HermitianMatrix, C64};

/// `γ_1⊗γ_1 + d_2 γ_2⊗γ_2 + d_3 γ_3⊗γ_3 + d_4 γ_4⊗γ_4` in the normalized
/// Pauli basis of `M_2` (`γ_1 = Id/√2`). Deterministic: reproduces the same
/// bytes for the same parameters.
pub fn gen_pauli_family(d2: f64, d3: f64, d4: f64) -> BipartiteOperator {
    let basis = hermitian_basis(2);
    let mut acc = BipartiteOperator::product(&basis[0], &basis[0]);
    for (coeff, idx) in [(d2, 1), (d3, 2), (d4, 3)] {
        if coeff != 0.0 {
            acc = acc.add(&BipartiteOperator::product(&basis[idx], &basis[idx]).scale(coeff));
        }
    }
    acc
}

/// The diagonal family `A(n) = λ_1 γ_1⊗γ_1 + λ_2 γ_2⊗(−γ_2)` in
/// `M_{n+1} ⊗ M_{n+1}` with
/// `γ_1 = Id/√(n+1)` and `γ_2 = diag(n, −1, …, −1)/√(n²+n)`.
///
/// Positive semidefinite exactly when `λ_1 ≥ n·λ_2`.
pub fn gen_an_family(n: usize, lambda1: f64, lambda2: f64) -> Result<BipartiteOperator> {
    if n < 1 {
        return Err(Error::InvalidParameter("A(n) requires n >= 1".into()));
    }
    if lambda1 <= 0.0 || lambda2 <= 0.0 || lambda1.is_nan() || lambda2.is_nan() {
        return Err(Error::InvalidParameter(
            "A(n) requires positive lambda1 and lambda2".into(),
        ));
    }
    let d = n + 1;
    let g1 = HermitianMatrix::identity(d).scale(1.0 / (d as f64).sqrt());
    let mut g2m = CMatrix::zeros(d, d);
    let norm = 1.0 / ((n * n + n) as f64).sqrt();
    g2m[(0, 0)] = C64::new(n as f64 * norm, 0.0);
    for i in 1..d {
        g2m[(i, i)] = C64::new(-norm, 0.0);
    }
    let g2 = HermitianMatrix::new_unchecked(g2m);
    let a = BipartiteOperator::product(&g1, &g1).scale(lambda1);
    let b = BipartiteOperator::product(&g2, &g2).scale(-lambda2);
    Ok(a.add(&b))
}
