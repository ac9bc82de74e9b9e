//! The generalized Schur product (`*`-product) on tensor-factored vectors and
//! operators, its identity element and the Choi complete-positivity test.
//!
//! For `A = Σ A_i ⊗ D_i` in `M_n ⊗ M_m` and `B = Σ B_j ⊗ C_j` in `M_m ⊗ M_l`
//! the product is `A * B = Σ_{i,j} A_i ⊗ C_j tr(D_i B_j^t)`. It is evaluated
//! here by direct index contraction (equivalently `F_A((·)^t) ⊗ Id` applied to
//! `B`), so no decomposition of either operand is ever computed:
//!
//! `(A*B)[(i,r),(j,s)] = Σ_{p,q} A[(i,p),(j,q)] · B[(p,r),(q,s)]`.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::matrix::{is_psd, BipartiteOperator, CMatrix, ToleranceConfig, C64, ONE, ZERO};

/// The `*`-product identity `u·ū^t` in `M_m ⊗ M_m`, where `u = Σ e_i ⊗ e_i`.
///
/// Rank one, PSD, trace `m`; entrywise `Σ_{i,j} e_ie_j^t ⊗ e_ie_j^t`.
#[derive(Debug, Clone)]
pub struct StarIdentity {
    pub m: usize,
    pub matrix: BipartiteOperator,
}

/// The maximally entangled (unnormalized) vector `u = Σ_{i=1}^m e_i ⊗ e_i`.
pub fn identity_vector(m: usize) -> DVector<C64> {
    let mut u = DVector::from_element(m * m, ZERO);
    for i in 0..m {
        u[i * m + i] = ONE;
    }
    u
}

pub fn star_identity(m: usize) -> StarIdentity {
    let mat = CMatrix::from_fn(m * m, m * m, |row, col| {
        let (i, p) = (row / m, row % m);
        let (j, q) = (col / m, col % m);
        if i == p && j == q {
            ONE
        } else {
            ZERO
        }
    });
    StarIdentity {
        m,
        matrix: BipartiteOperator::new_unchecked(m, m, mat),
    }
}

/// `*`-product of vectors: for `v ∈ C^n ⊗ C^m` and `w ∈ C^m ⊗ C^l`,
/// `v * w = Σ_{i,j} v_i ⊗ s_j tr(w_j r_i^t)`. With `v` reshaped as an `n×m`
/// array and `w` as `m×l`, this is the matrix product contracted over the
/// shared middle index.
pub fn star_vec(
    v: &DVector<C64>,
    n: usize,
    m: usize,
    w: &DVector<C64>,
    l: usize,
) -> Result<DVector<C64>> {
    if v.len() != n * m {
        return Err(Error::DimensionMismatch {
            context: "star_vec left operand",
            expected: n * m,
            got: v.len(),
        });
    }
    if w.len() != m * l {
        return Err(Error::DimensionMismatch {
            context: "star_vec right operand",
            expected: m * l,
            got: w.len(),
        });
    }
    let mut out = DVector::from_element(n * l, ZERO);
    for i in 0..n {
        for r in 0..l {
            let mut acc = ZERO;
            for p in 0..m {
                acc += v[i * m + p] * w[p * l + r];
            }
            out[i * l + r] = acc;
        }
    }
    Ok(out)
}

/// `*`-product on raw `M_n ⊗ M_m` matrices (no hermiticity assumed):
/// `a` is `nm × nm` read as an operator on `C^n ⊗ C^m`, `b` is `ml × ml`.
pub fn star_mat_general(
    a: &CMatrix,
    n: usize,
    m: usize,
    b: &CMatrix,
    l: usize,
) -> Result<CMatrix> {
    if a.nrows() != n * m || a.ncols() != n * m {
        return Err(Error::DimensionMismatch {
            context: "star_mat left operand",
            expected: n * m,
            got: a.nrows(),
        });
    }
    if b.nrows() != m * l || b.ncols() != m * l {
        return Err(Error::DimensionMismatch {
            context: "star_mat right operand",
            expected: m * l,
            got: b.nrows(),
        });
    }
    Ok(CMatrix::from_fn(n * l, n * l, |row, col| {
        let (i, r) = (row / l, row % l);
        let (j, s) = (col / l, col % l);
        let mut acc = ZERO;
        for p in 0..m {
            for q in 0..m {
                acc += a[(i * m + p, j * m + q)] * b[(p * l + r, q * l + s)];
            }
        }
        acc
    }))
}

/// `*`-product of operators: `A ∈ M_n ⊗ M_m`, `B ∈ M_m ⊗ M_l` gives
/// `A * B ∈ M_n ⊗ M_l`. Bilinear, associative, with [`star_identity`] as unit;
/// maps PSD pairs to PSD results and Hermitian pairs to Hermitian results.
pub fn star_mat(a: &BipartiteOperator, b: &BipartiteOperator) -> Result<BipartiteOperator> {
    if a.m() != b.k() {
        return Err(Error::DimensionMismatch {
            context: "star_mat middle factor",
            expected: a.m(),
            got: b.k(),
        });
    }
    let mat = star_mat_general(a.as_matrix(), a.k(), a.m(), b.as_matrix(), b.m())?;
    Ok(BipartiteOperator::new_unchecked(a.k(), b.m(), mat))
}

/// Choi criterion: a map `T: M_m → M_n` is completely positive iff its Choi
/// matrix `T ⊗ Id (u·ū^t)` is positive semidefinite.
pub fn is_completely_positive(choi: &BipartiteOperator, cfg: &ToleranceConfig) -> bool {
    is_psd(choi.hermitian(), cfg).0
}
