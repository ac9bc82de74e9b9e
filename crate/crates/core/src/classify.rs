//! Classification predicates: PPT, SPC, weak irreducibility and the
//! reducibility bounds.
//!
//! Weak irreducibility is decided exactly for SPC/PPT inputs (the three
//! Schmidt-format conditions are an iff there); for other PSD inputs only the
//! sufficient condition is available and `Unknown` is an honest verdict.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::matrix::{
    eigh, hermitian_rank, image_projector, is_psd, partial_transpose, BipartiteOperator,
    HermitianMatrix, ToleranceConfig, C64,
};
use crate::schmidt::{coefficient_matrix, hermitian_schmidt, SchmidtDecomposition};
use crate::split::split_decomposition;

/// Outcome of the PPT test together with the extreme eigenpair of `A^{t_1}`.
#[derive(Debug, Clone)]
pub struct PptReport {
    pub is_ppt: bool,
    pub min_pt_eigenvalue: f64,
    /// Normalized eigenvector of `A^{t_1}` for the minimum eigenvalue; an
    /// entanglement witness whenever `is_ppt` is false.
    pub witness: DVector<C64>,
}

/// Outcome of the SPC test. `A` is SPC iff it is square (`k = m`), PSD, and
/// its real coefficient matrix in a common orthonormal Hermitian basis is
/// symmetric and PSD.
#[derive(Debug, Clone)]
pub struct SpcReport {
    pub is_spc: bool,
    /// Minimum eigenvalue of the symmetrized coefficient matrix
    /// (`-inf` when `k != m`).
    pub coeff_matrix_min_eig: f64,
    /// `‖C - C^T‖_F` of the coefficient matrix (`inf` when `k != m`).
    pub symmetry_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WiVerdict {
    Yes,
    No,
    Unknown,
}

/// How the weak-irreducibility verdict was reached.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WiRoute {
    /// The three Schmidt-format conditions (iff for SPC/PPT inputs,
    /// sufficient otherwise).
    SpcPptCriterion,
    FullRankShortcut,
    FullTensorRankShortcut,
    RankOne,
    /// Verdict `No`, established by an explicit splitting projection pair.
    SplitWitness,
}

/// A pair of complementary projection pairs that block-diagonalize `A` with
/// both blocks nonzero, certifying that `A` is not weak irreducible.
#[derive(Debug, Clone)]
pub struct SplitWitness {
    pub v1: HermitianMatrix,
    pub w1: HermitianMatrix,
    pub v2: HermitianMatrix,
    pub w2: HermitianMatrix,
}

#[derive(Debug, Clone)]
pub struct WeakIrreducibilityReport {
    pub verdict: WiVerdict,
    pub route: WiRoute,
    /// Relative gap `(λ_1 - λ_2)/λ_1` when at least two coefficients exist.
    pub lambda_gap: Option<f64>,
    /// Worst relative residual of `Im(γ_i) ⊆ Im(γ_1)` over `i`.
    pub image_residual_left: Option<f64>,
    /// Worst relative residual of `Im(δ_i) ⊆ Im(δ_1)` over `i`.
    pub image_residual_right: Option<f64>,
    pub witness: Option<SplitWitness>,
}

/// PPT test. Requires `A` PSD; reports the minimum eigenvalue of `A^{t_1}`
/// and its (normalized) eigenvector.
pub fn is_ppt(a: &BipartiteOperator, cfg: &ToleranceConfig) -> Result<PptReport> {
    let (psd, min) = is_psd(a.hermitian(), cfg);
    if !psd {
        return Err(Error::InputNotPsd {
            min_eigenvalue: min,
        });
    }
    let pt = partial_transpose(a);
    let es = eigh(pt.hermitian());
    let min_pt = es.min_eigenvalue();
    let witness = es.vectors.column(0).into_owned();
    Ok(PptReport {
        is_ppt: min_pt >= -cfg.psd_tol * a.norm().max(1.0),
        min_pt_eigenvalue: min_pt,
        witness,
    })
}

/// SPC test. Never fails on PSD-ness: a non-PSD or rectangular input simply
/// reports `is_spc = false`.
pub fn is_spc(a: &BipartiteOperator, cfg: &ToleranceConfig) -> Result<SpcReport> {
    let (k, m) = a.dims();
    if k != m {
        return Ok(SpcReport {
            is_spc: false,
            coeff_matrix_min_eig: f64::NEG_INFINITY,
            symmetry_residual: f64::INFINITY,
        });
    }
    let c = coefficient_matrix(a);
    let symmetry_residual = (&c - c.transpose()).norm();
    let sym = (&c + c.transpose()).scale(0.5);
    let min_eig = sym
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |acc, &v| acc.min(v));
    let scale = a.norm().max(1.0);
    let (psd, _) = is_psd(a.hermitian(), cfg);
    Ok(SpcReport {
        is_spc: psd
            && symmetry_residual <= cfg.recon_tol * scale
            && min_eig >= -cfg.psd_tol * scale,
        coeff_matrix_min_eig: min_eig,
        symmetry_residual,
    })
}

/// Chooses the joint sign `σ` for which both `σ·γ` and `σ·δ` are PSD, if any.
pub(crate) fn joint_psd_sign(
    gamma: &HermitianMatrix,
    delta: &HermitianMatrix,
    cfg: &ToleranceConfig,
) -> Option<f64> {
    for sign in [1.0, -1.0] {
        let g_ok = is_psd(&gamma.scale(sign), cfg).0;
        let d_ok = is_psd(&delta.scale(sign), cfg).0;
        if g_ok && d_ok {
            return Some(sign);
        }
    }
    None
}

/// Worst relative residual `‖(Id - P)·X_i‖_F / ‖X_i‖_F` over the factors,
/// with `P` the spectral projector onto the image of the head factor.
fn containment_residual(
    head: &HermitianMatrix,
    factors: &[HermitianMatrix],
    cfg: &ToleranceConfig,
) -> f64 {
    let p = image_projector(head, cfg);
    let dim = head.dim();
    let complement = HermitianMatrix::identity(dim).sub(&p);
    let mut worst: f64 = 0.0;
    for f in factors {
        let res = (complement.as_matrix() * f.as_matrix()).norm() / f.norm().max(1e-300);
        worst = worst.max(res);
    }
    worst
}

struct ConditionCheck {
    holds: bool,
    lambda_gap: Option<f64>,
    residual_left: Option<f64>,
    residual_right: Option<f64>,
}

/// The three conditions: strictly dominant `λ_1`, and all factor images
/// contained in the images of the sign-fixed top factors.
fn check_conditions(
    sd: &SchmidtDecomposition,
    cfg: &ToleranceConfig,
    strict_sign: bool,
) -> Result<ConditionCheck> {
    let gap = (sd.lambdas[0] - sd.lambdas[1]) / sd.lambdas[0];
    if gap <= cfg.degeneracy_tol {
        return Ok(ConditionCheck {
            holds: false,
            lambda_gap: Some(gap),
            residual_left: None,
            residual_right: None,
        });
    }
    let sign = match joint_psd_sign(&sd.gammas[0], &sd.deltas[0], cfg) {
        Some(s) => s,
        None if strict_sign => {
            return Err(Error::NumericalDegeneracy(
                "top Schmidt factor of an SPC/PPT matrix admits no PSD sign".into(),
            ))
        }
        None => {
            return Ok(ConditionCheck {
                holds: false,
                lambda_gap: Some(gap),
                residual_left: None,
                residual_right: None,
            })
        }
    };
    let g1 = sd.gammas[0].scale(sign);
    let d1 = sd.deltas[0].scale(sign);
    let res_l = containment_residual(&g1, &sd.gammas[1..], cfg);
    let res_r = containment_residual(&d1, &sd.deltas[1..], cfg);
    Ok(ConditionCheck {
        holds: res_l <= cfg.rank_tol && res_r <= cfg.rank_tol,
        lambda_gap: Some(gap),
        residual_left: Some(res_l),
        residual_right: Some(res_r),
    })
}

/// Weak irreducibility test.
///
/// Decision routes, in priority order: tensor rank one; full rank or full
/// tensor rank; the three-condition criterion (exact for SPC/PPT inputs, with
/// an explicit splitting witness on `No`); otherwise the sufficient condition
/// alone, with `Unknown` when it fails.
pub fn is_weak_irreducible(
    a: &BipartiteOperator,
    cfg: &ToleranceConfig,
) -> Result<WeakIrreducibilityReport> {
    let (psd, min) = is_psd(a.hermitian(), cfg);
    if !psd {
        return Err(Error::InputNotPsd {
            min_eigenvalue: min,
        });
    }
    let (k, m) = a.dims();
    let sd = hermitian_schmidt(a, cfg)?;
    let yes = |route: WiRoute| WeakIrreducibilityReport {
        verdict: WiVerdict::Yes,
        route,
        lambda_gap: None,
        image_residual_left: None,
        image_residual_right: None,
        witness: None,
    };
    if sd.len() <= 1 {
        return Ok(yes(WiRoute::RankOne));
    }
    if hermitian_rank(a.hermitian(), cfg) == k * m {
        return Ok(yes(WiRoute::FullRankShortcut));
    }
    if sd.len() == (k * k).min(m * m) {
        return Ok(yes(WiRoute::FullTensorRankShortcut));
    }
    let spc = is_spc(a, cfg)?.is_spc;
    let ppt = spc || is_ppt(a, cfg)?.is_ppt;
    let check = check_conditions(&sd, cfg, spc || ppt)?;
    if check.holds {
        return Ok(WeakIrreducibilityReport {
            verdict: WiVerdict::Yes,
            route: WiRoute::SpcPptCriterion,
            lambda_gap: check.lambda_gap,
            image_residual_left: check.residual_left,
            image_residual_right: check.residual_right,
            witness: None,
        });
    }
    if !(spc || ppt) {
        return Ok(WeakIrreducibilityReport {
            verdict: WiVerdict::Unknown,
            route: WiRoute::SpcPptCriterion,
            lambda_gap: check.lambda_gap,
            image_residual_left: check.residual_left,
            image_residual_right: check.residual_right,
            witness: None,
        });
    }
    // SPC/PPT and the conditions fail: the split decomposition is nontrivial
    // and yields an explicit witness.
    let split = split_decomposition(a, cfg)?;
    let v1 = split.projections[0].0.clone();
    let w1 = split.projections[0].1.clone();
    let dim_err = "split of a non-weak-irreducible matrix must have two nonzero blocks";
    let v2 = HermitianMatrix::identity(k).sub(&v1);
    let w2 = HermitianMatrix::identity(m).sub(&w1);
    let first_norm = split.blocks[0].norm();
    let rest_norm: f64 = split.blocks[1..]
        .iter()
        .map(|b| b.norm() * b.norm())
        .sum::<f64>()
        .sqrt();
    if first_norm <= cfg.rank_tol * a.norm() || rest_norm <= cfg.rank_tol * a.norm() {
        return Err(Error::NumericalDegeneracy(dim_err.into()));
    }
    Ok(WeakIrreducibilityReport {
        verdict: WiVerdict::No,
        route: WiRoute::SplitWitness,
        lambda_gap: check.lambda_gap,
        image_residual_left: check.residual_left,
        image_residual_right: check.residual_right,
        witness: Some(SplitWitness { v1, w1, v2, w2 }),
    })
}

/// Upper bounds satisfied by every PSD matrix that is **not** weak
/// irreducible: `(max tensor rank, max rank)`.
pub fn reducibility_bounds(k: usize, m: usize) -> Result<(usize, usize)> {
    if k < 2 || m < 2 {
        return Err(Error::DimensionTooSmall { k, m });
    }
    let tensor = ((k - 1) * (k - 1) + 1).min((m - 1) * (m - 1) + 1);
    let rank = ((k - 1) * m).min((m - 1) * k);
    Ok((tensor, rank))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{kron, kron_vec, CMatrix, ONE, ZERO};

    fn cfg() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn e_proj(dim: usize, idx: usize) -> HermitianMatrix {
        let mut m = CMatrix::zeros(dim, dim);
        m[(idx, idx)] = ONE;
        HermitianMatrix::new_unchecked(m)
    }

    #[test]
    fn identity_is_ppt() {
        let a = BipartiteOperator::new_unchecked(2, 3, CMatrix::identity(6, 6));
        let rep = is_ppt(&a, &cfg()).unwrap();
        assert!(rep.is_ppt);
        assert!((rep.min_pt_eigenvalue - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bell_projector_is_npt() {
        let u = crate::star::identity_vector(2);
        let bell = CMatrix::from_fn(4, 4, |i, j| u[i] * u[j].conj() * C64::new(0.5, 0.0));
        let a = BipartiteOperator::from_matrix(2, 2, bell, &cfg()).unwrap();
        let rep = is_ppt(&a, &cfg()).unwrap();
        assert!(!rep.is_ppt);
        assert!((rep.min_pt_eigenvalue + 0.5).abs() < 1e-12);
        // the witness really exposes the negative direction
        let pt = partial_transpose(&a);
        let quad = (rep.witness.adjoint() * pt.as_matrix() * &rep.witness)[(0, 0)].re;
        assert!((quad + 0.5).abs() < 1e-10);
    }

    #[test]
    fn is_ppt_rejects_non_psd_input() {
        let h = HermitianMatrix::new_unchecked(CMatrix::from_fn(4, 4, |i, j| {
            if i == j {
                C64::new(if i == 0 { -1.0 } else { 1.0 }, 0.0)
            } else {
                ZERO
            }
        }));
        let a = BipartiteOperator::new(2, 2, h).unwrap();
        assert!(matches!(
            is_ppt(&a, &cfg()),
            Err(Error::InputNotPsd { .. })
        ));
    }

    #[test]
    fn identity_is_spc() {
        let a = BipartiteOperator::new_unchecked(3, 3, CMatrix::identity(9, 9));
        let rep = is_spc(&a, &cfg()).unwrap();
        assert!(rep.is_spc);
        assert!(rep.symmetry_residual < 1e-12);
    }

    #[test]
    fn pauli_family_is_spc() {
        let a = crate::families::gen_pauli_family(0.3, 0.2, 0.1);
        let rep = is_spc(&a, &cfg()).unwrap();
        assert!(rep.is_spc);
    }

    #[test]
    fn swap_style_sum_is_not_spc() {
        // e1e1^t ⊗ e2e2^t + e2e2^t ⊗ e1e1^t is PSD and PPT but its
        // coefficient matrix has eigenvalue -1.
        let a = BipartiteOperator::product(&e_proj(2, 0), &e_proj(2, 1))
            .add(&BipartiteOperator::product(&e_proj(2, 1), &e_proj(2, 0)));
        let rep = is_spc(&a, &cfg()).unwrap();
        assert!(!rep.is_spc);
        assert!((rep.coeff_matrix_min_eig + 1.0).abs() < 1e-10);
        assert!(is_ppt(&a, &cfg()).unwrap().is_ppt);
    }

    #[test]
    fn rectangular_is_never_spc() {
        let a = BipartiteOperator::new_unchecked(2, 3, CMatrix::identity(6, 6));
        assert!(!is_spc(&a, &cfg()).unwrap().is_spc);
    }

    #[test]
    fn identity_is_weak_irreducible() {
        let a = BipartiteOperator::new_unchecked(2, 2, CMatrix::identity(4, 4));
        let rep = is_weak_irreducible(&a, &cfg()).unwrap();
        assert_eq!(rep.verdict, WiVerdict::Yes);
        assert_eq!(rep.route, WiRoute::RankOne);
    }

    #[test]
    fn block_diagonal_is_reducible_with_witness() {
        let a = BipartiteOperator::product(&e_proj(2, 0), &e_proj(2, 0))
            .add(&BipartiteOperator::product(&e_proj(2, 1), &e_proj(2, 1)));
        let rep = is_weak_irreducible(&a, &cfg()).unwrap();
        assert_eq!(rep.verdict, WiVerdict::No);
        assert_eq!(rep.route, WiRoute::SplitWitness);
        let w = rep.witness.expect("witness attached");
        // V1V2 = 0, V1 + V2 = Id, and the decomposition reproduces A with
        // both blocks nonzero
        assert!((w.v1.as_matrix() * w.v2.as_matrix()).norm() < 1e-10);
        assert!((w.w1.as_matrix() * w.w2.as_matrix()).norm() < 1e-10);
        let sum = w.v1.add(&w.v2);
        assert!((sum.as_matrix() - CMatrix::identity(2, 2)).norm() < 1e-10);
        let mut recon = CMatrix::zeros(4, 4);
        let mut norms = vec![];
        for (v, wp) in [(&w.v1, &w.w1), (&w.v2, &w.w2)] {
            let p = kron(v.as_matrix(), wp.as_matrix());
            let block = &p * a.as_matrix() * &p;
            norms.push(block.norm());
            recon += block;
        }
        assert!((recon - a.as_matrix()).norm() < 1e-10);
        assert!(norms.iter().all(|&n| n > 1e-6));
    }

    #[test]
    fn rank_one_vector_projector_is_weak_irreducible() {
        let e1 = nalgebra::DVector::from_vec(vec![ONE, ZERO]);
        let e2 = nalgebra::DVector::from_vec(vec![ZERO, ONE]);
        let v = kron_vec(&e1, &e1).scale(2.0) + kron_vec(&e2, &e2);
        let a = BipartiteOperator::new_unchecked(
            2,
            2,
            CMatrix::from_fn(4, 4, |i, j| v[i] * v[j].conj()),
        );
        let rep = is_weak_irreducible(&a, &cfg()).unwrap();
        assert_eq!(rep.verdict, WiVerdict::Yes);
        assert_eq!(rep.route, WiRoute::FullTensorRankShortcut);
    }

    #[test]
    fn full_rank_pauli_family_uses_shortcut() {
        let a = crate::families::gen_pauli_family(0.3, 0.2, 0.1);
        let rep = is_weak_irreducible(&a, &cfg()).unwrap();
        assert_eq!(rep.verdict, WiVerdict::Yes);
        assert_eq!(rep.route, WiRoute::FullRankShortcut);
    }

    #[test]
    fn rank_deficient_spc_uses_conditions() {
        // λ1 γ1⊗γ1 + λ2 γ2⊗γ2 supported on span{e1,e2} inside M_3⊗M_3:
        // neither full rank nor full tensor rank, decided by the conditions.
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let g1 = e_proj(3, 0).add(&e_proj(3, 1)).scale(s);
        let g2 = e_proj(3, 0).sub(&e_proj(3, 1)).scale(s);
        let a = BipartiteOperator::product(&g1, &g1)
            .add(&BipartiteOperator::product(&g2, &g2).scale(0.5));
        let rep = is_weak_irreducible(&a, &cfg()).unwrap();
        assert_eq!(rep.verdict, WiVerdict::Yes);
        assert_eq!(rep.route, WiRoute::SpcPptCriterion);
        assert!(rep.lambda_gap.unwrap() > 0.4);
        assert!(rep.image_residual_left.unwrap() < 1e-9);
    }

    #[test]
    fn constructed_spc_instances_pass_the_test() {
        use rand::Rng;
        use rand_chacha::rand_core::SeedableRng;
        let c = cfg();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x59c);
        for i in 0..100 {
            let k = 2 + i % 3;
            // positive combination of symmetric products of Hermitian
            // factors, shifted by enough identity to stay PSD: the
            // coefficient matrix is a Gram sum, hence symmetric PSD
            let mut shift = 0.0;
            let mut a = BipartiteOperator::new_unchecked(
                k,
                k,
                CMatrix::zeros(k * k, k * k),
            );
            for _ in 0..(1 + i % 4) {
                let raw = CMatrix::from_fn(k, k, |_, _| {
                    C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
                });
                let h = HermitianMatrix::new((&raw + raw.adjoint()).scale(0.5), &c).unwrap();
                let w = rng.random::<f64>() + 0.1;
                shift += w * h.norm() * h.norm();
                a = a.add(&BipartiteOperator::product(&h, &h).scale(w));
            }
            let id = HermitianMatrix::identity(k);
            a = a.add(&BipartiteOperator::product(&id, &id).scale(shift));
            let rep = is_spc(&a, &c).unwrap();
            assert!(rep.is_spc, "instance {i} not recognized as SPC");
            assert!(is_psd(a.hermitian(), &c).0);
            assert!(rep.symmetry_residual <= c.recon_tol * a.norm().max(1.0));
        }
    }

    #[test]
    fn ppt_report_agrees_with_partial_transpose_psd() {
        use rand::Rng;
        use rand_chacha::rand_core::SeedableRng;
        let c = cfg();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x99);
        for _ in 0..25 {
            let raw = CMatrix::from_fn(6, 3, |_, _| {
                C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
            });
            let a = BipartiteOperator::new_unchecked(2, 3, &raw * raw.adjoint());
            let rep = is_ppt(&a, &c).unwrap();
            let pt_psd = is_psd(partial_transpose(&a).hermitian(), &c).0;
            assert_eq!(rep.is_ppt, pt_psd);
        }
    }

    #[test]
    fn bounds_formulas() {
        assert_eq!(reducibility_bounds(2, 2).unwrap(), (2, 2));
        assert_eq!(reducibility_bounds(3, 3).unwrap(), (5, 6));
        assert_eq!(reducibility_bounds(2, 4).unwrap(), (2, 4));
        assert!(matches!(
            reducibility_bounds(1, 4),
            Err(Error::DimensionTooSmall { .. })
        ));
    }
}
