//! Hermitian Schmidt decomposition of bipartite Hermitian operators, the
//! induced supports and the tensor rank.
//!
//! The decomposition `A = Σ λ_i γ_i ⊗ δ_i` (positive descending `λ_i`,
//! orthonormal Hermitian factor sets under the trace inner product) is
//! computed from the real coefficient matrix of `A` in orthonormal Hermitian
//! product bases, via a real SVD. This route agrees with diagonalizing
//! `F_A ∘ G_A` and stays stable when coefficients are degenerate.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::matrix::{
    f_map, hermitian_basis, BipartiteOperator, HermitianMatrix, ToleranceConfig,
};

/// `A = Σ λ_i γ_i ⊗ δ_i` with `λ_1 ≥ … ≥ λ_n > 0`, `{γ_i}` and `{δ_i}`
/// orthonormal Hermitian sets. Each pair `(γ_i, δ_i)` is sign-canonical: the
/// real part of the largest-modulus entry of `γ_i` is positive (ties broken by
/// the smallest row-major index, purely imaginary entries by positive
/// imaginary part).
#[derive(Debug, Clone)]
pub struct SchmidtDecomposition {
    pub lambdas: Vec<f64>,
    pub gammas: Vec<HermitianMatrix>,
    pub deltas: Vec<HermitianMatrix>,
    pub k: usize,
    pub m: usize,
}

impl SchmidtDecomposition {
    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    /// `Σ λ_i γ_i ⊗ δ_i` as a bipartite operator.
    pub fn reconstruct(&self) -> BipartiteOperator {
        let mut acc = BipartiteOperator::new_unchecked(
            self.k,
            self.m,
            crate::matrix::CMatrix::zeros(self.k * self.m, self.k * self.m),
        );
        for i in 0..self.len() {
            let term = BipartiteOperator::product(&self.gammas[i], &self.deltas[i])
                .scale(self.lambdas[i]);
            acc = acc.add(&term);
        }
        acc
    }

    /// Size of the top coefficient cluster
    /// `{i : λ_1 − λ_i ≤ degeneracy_tol · λ_1}`.
    pub fn top_cluster_size(&self, cfg: &ToleranceConfig) -> usize {
        if self.lambdas.is_empty() {
            return 0;
        }
        let top = self.lambdas[0];
        self.lambdas
            .iter()
            .take_while(|&&l| top - l <= cfg.degeneracy_tol * top)
            .count()
    }
}

/// Orthonormal Hermitian bases of the two supports of `A`; both have
/// cardinality equal to the tensor rank.
#[derive(Debug, Clone)]
pub struct SupportPair {
    pub basis1: Vec<HermitianMatrix>,
    pub basis2: Vec<HermitianMatrix>,
}

/// Real coefficient matrix `C[a,b] = tr(A · (σ_a ⊗ τ_b))` of `A` in the
/// generalized Gell-Mann product basis. Real because expansion coefficients
/// of a Hermitian matrix over linearly independent Hermitian matrices are
/// real; the imaginary parts (pure rounding noise) are dropped.
pub fn coefficient_matrix(a: &BipartiteOperator) -> DMatrix<f64> {
    let (k, m) = a.dims();
    let basis_k = hermitian_basis(k);
    let basis_m = hermitian_basis(m);
    let mut c = DMatrix::<f64>::zeros(k * k, m * m);
    for (b_idx, tau) in basis_m.iter().enumerate() {
        // tr(A (σ_a ⊗ τ_b)) = tr(σ_a · F_A(τ_b))
        let fa = f_map(a, tau).expect("basis dimension matches operator");
        for (a_idx, sigma) in basis_k.iter().enumerate() {
            c[(a_idx, b_idx)] = sigma.inner(&fa);
        }
    }
    c
}

fn combine(basis: &[HermitianMatrix], weights: impl Iterator<Item = f64>) -> HermitianMatrix {
    let dim = basis[0].dim();
    let mut acc = HermitianMatrix::zeros(dim);
    for (b, w) in basis.iter().zip(weights) {
        if w != 0.0 {
            acc = acc.add(&b.scale(w));
        }
    }
    acc
}

/// Sign with which a factor pair must be flipped so the real part of the
/// largest-modulus entry of `g` becomes positive.
fn canonical_sign(g: &HermitianMatrix) -> f64 {
    let m = g.as_matrix();
    let dim = g.dim();
    let mut best = num_complex::Complex64::new(0.0, 0.0);
    let mut best_mod = -1.0f64;
    for i in 0..dim {
        for j in 0..dim {
            let z = m[(i, j)];
            let md = z.norm();
            if md > best_mod {
                best_mod = md;
                best = z;
            }
        }
    }
    if best_mod <= 0.0 {
        return 1.0;
    }
    if best.re.abs() > 1e-12 * best_mod {
        if best.re > 0.0 {
            1.0
        } else {
            -1.0
        }
    } else if best.im >= 0.0 {
        // purely imaginary leading entry: fall back to the imaginary part so
        // the choice stays deterministic
        1.0
    } else {
        -1.0
    }
}

/// Hermitian Schmidt decomposition of `A`. Coefficients below
/// `rank_tol · λ_1` are discarded as numerical zeros; the zero operator yields
/// an empty decomposition.
pub fn hermitian_schmidt(
    a: &BipartiteOperator,
    cfg: &ToleranceConfig,
) -> Result<SchmidtDecomposition> {
    let (k, m) = a.dims();
    if a.norm() <= cfg.rank_tol {
        return Ok(SchmidtDecomposition {
            lambdas: vec![],
            gammas: vec![],
            deltas: vec![],
            k,
            m,
        });
    }
    let c = coefficient_matrix(a);
    let svd = c.svd(true, true);
    let u = svd.u.expect("requested");
    let v_t = svd.v_t.expect("requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&x, &y| svd.singular_values[y].total_cmp(&svd.singular_values[x]));
    let top = svd.singular_values[order[0]];
    let basis_k = hermitian_basis(k);
    let basis_m = hermitian_basis(m);

    let mut lambdas = Vec::new();
    let mut gammas = Vec::new();
    let mut deltas = Vec::new();
    for &idx in &order {
        let lambda = svd.singular_values[idx];
        if lambda <= cfg.rank_tol * top {
            break;
        }
        let gamma = combine(&basis_k, (0..k * k).map(|r| u[(r, idx)]));
        let delta = combine(&basis_m, (0..m * m).map(|r| v_t[(idx, r)]));
        let sign = canonical_sign(&gamma);
        lambdas.push(lambda);
        gammas.push(gamma.scale(sign));
        deltas.push(delta.scale(sign));
    }
    Ok(SchmidtDecomposition {
        lambdas,
        gammas,
        deltas,
        k,
        m,
    })
}

/// The supports of `A`: real spans of the left and right Hermitian factors of
/// any minimal Hermitian decomposition, represented by the Schmidt factor
/// bases (decomposition-independent).
pub fn supports(a: &BipartiteOperator, cfg: &ToleranceConfig) -> Result<SupportPair> {
    let sd = hermitian_schmidt(a, cfg)?;
    Ok(SupportPair {
        basis1: sd.gammas,
        basis2: sd.deltas,
    })
}

/// Number of Schmidt coefficients above threshold; zero iff `‖A‖_F ≤ rank_tol`.
pub fn tensor_rank(a: &BipartiteOperator, cfg: &ToleranceConfig) -> Result<usize> {
    Ok(hermitian_schmidt(a, cfg)?.len())
}

/// Symmetric Hermitian Schmidt decomposition of an operator whose coefficient
/// matrix is symmetric PSD (`k = m`): eigendecomposition of the coefficient
/// matrix instead of an SVD, so the two factor lists coincide exactly even in
/// degenerate clusters. Coefficients are the (positive) eigenvalues.
pub(crate) fn symmetric_schmidt(
    a: &BipartiteOperator,
    cfg: &ToleranceConfig,
) -> Result<SchmidtDecomposition> {
    let (k, m) = a.dims();
    if k != m {
        return Err(Error::DimensionMismatch {
            context: "symmetric Schmidt decomposition",
            expected: k,
            got: m,
        });
    }
    if a.norm() <= cfg.rank_tol {
        return Ok(SchmidtDecomposition {
            lambdas: vec![],
            gammas: vec![],
            deltas: vec![],
            k,
            m,
        });
    }
    let c = coefficient_matrix(a);
    let c = (&c + c.transpose()).scale(0.5);
    let se = c.symmetric_eigen();
    let mut order: Vec<usize> = (0..se.eigenvalues.len()).collect();
    order.sort_by(|&x, &y| se.eigenvalues[y].total_cmp(&se.eigenvalues[x]));
    let top = se.eigenvalues[order[0]].abs().max(se.eigenvalues[*order.last().unwrap()].abs());
    let basis_k = hermitian_basis(k);
    let mut lambdas = Vec::new();
    let mut gammas = Vec::new();
    for &idx in &order {
        let nu = se.eigenvalues[idx];
        if nu <= cfg.rank_tol * top {
            continue;
        }
        let gamma = combine(&basis_k, (0..k * k).map(|r| se.eigenvectors[(r, idx)]));
        let sign = canonical_sign(&gamma);
        lambdas.push(nu);
        gammas.push(gamma.scale(sign));
    }
    Ok(SchmidtDecomposition {
        lambdas,
        deltas: gammas.clone(),
        gammas,
        k,
        m,
    })
}
