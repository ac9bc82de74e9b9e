//! Split decompositions of SPC/PPT matrices: the unique PSD Schmidt basis of
//! the top coefficient block, the induced block decomposition, and the
//! recursive decomposition into weak irreducible leaves.

use crate::classify::{is_ppt, is_spc, WiVerdict};
use crate::error::{Error, Result};
use crate::matrix::{
    f_map, g_map, image_projector, is_psd, kron, BipartiteOperator, CMatrix,
    HermitianMatrix, ToleranceConfig,
};
use crate::schmidt::{hermitian_schmidt, symmetric_schmidt, SchmidtDecomposition};
use crate::separate::kernel_shift;
use crate::star::star_mat;

/// Which of the two theorem families the decomposition belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitType {
    Spc,
    Ppt,
}

/// The unique orthonormal PSD factorization `D = Σ γ_i' ⊗ δ_i'` of a
/// unit-coefficient PSD block; `deltas_prime == gammas_prime` for SPC inputs.
#[derive(Debug, Clone)]
pub struct PsdSchmidtBasis {
    pub gammas_prime: Vec<HermitianMatrix>,
    pub deltas_prime: Vec<HermitianMatrix>,
}

/// `A = Σ_{i=1}^{s+1} (V_i ⊗ W_i) A (V_i ⊗ W_i)` with mutually annihilating
/// projections summing to the identity; blocks `1..s` are weak irreducible.
#[derive(Debug, Clone)]
pub struct SplitDecomposition {
    /// Multiplicity of the top Schmidt coefficient.
    pub s: usize,
    /// Projection pairs `(V_i, W_i)`, `i = 1..s+1`; `V_i = W_i` for SPC.
    pub projections: Vec<(HermitianMatrix, HermitianMatrix)>,
    pub blocks: Vec<BipartiteOperator>,
    pub type_tag: SplitType,
}

/// Leaves of the recursive split: weak irreducible operators of the input's
/// type summing to the input, with the projection chain that produced each.
#[derive(Debug, Clone)]
pub struct WeakIrreducibleTree {
    pub leaves: Vec<BipartiteOperator>,
    pub provenance: Vec<Vec<(HermitianMatrix, HermitianMatrix)>>,
    pub type_tag: SplitType,
}

/// `(V ⊗ W) A (V ⊗ W)`.
pub(crate) fn compress(
    a: &BipartiteOperator,
    v: &HermitianMatrix,
    w: &HermitianMatrix,
) -> BipartiteOperator {
    let p = kron(v.as_matrix(), w.as_matrix());
    BipartiteOperator::new_unchecked(a.k(), a.m(), &p * a.as_matrix() * &p)
}

/// Size of the `λ_1` cluster and the corresponding unit-coefficient top block
/// `D = Σ_{i≤s} γ_i ⊗ δ_i`, verified PSD (a failure signals that the input
/// was not PSD/PPT as assumed).
pub fn extract_top_block(
    sd: &SchmidtDecomposition,
    cfg: &ToleranceConfig,
) -> Result<(usize, BipartiteOperator)> {
    if sd.is_empty() {
        return Err(Error::EmptyDecomposition);
    }
    let s = sd.top_cluster_size(cfg);
    let mut d = BipartiteOperator::new_unchecked(
        sd.k,
        sd.m,
        CMatrix::zeros(sd.k * sd.m, sd.k * sd.m),
    );
    for i in 0..s {
        d = d.add(&BipartiteOperator::product(&sd.gammas[i], &sd.deltas[i]));
    }
    let (psd, min) = is_psd(d.hermitian(), cfg);
    if !psd {
        return Err(Error::NumericalDegeneracy(format!(
            "top Schmidt block is not PSD (min eigenvalue {min:.3e})"
        )));
    }
    Ok((s, d))
}

/// Orthonormal basis of `span{factors}` starting with `head` (which must lie
/// in the span): deterministic Gram-Schmidt over the projections of the
/// original factors onto the orthogonal complement of `head`.
fn complete_basis(
    head: &HermitianMatrix,
    factors: &[HermitianMatrix],
    expected: usize,
) -> Result<Vec<HermitianMatrix>> {
    let mut out: Vec<HermitianMatrix> = Vec::with_capacity(expected);
    for f in factors {
        if out.len() == expected {
            break;
        }
        let mut v = f.sub(&head.scale(head.inner(f)));
        for _ in 0..2 {
            v = v.sub(&head.scale(head.inner(&v)));
            for b in &out {
                v = v.sub(&b.scale(b.inner(&v)));
            }
        }
        let norm = v.norm();
        if norm > 1e-6 {
            out.push(v.scale(1.0 / norm));
        }
    }
    if out.len() != expected {
        return Err(Error::NumericalDegeneracy(format!(
            "orthonormal completion found {} of {} directions",
            out.len(),
            expected
        )));
    }
    Ok(out)
}

fn psd_sign(g: &HermitianMatrix, cfg: &ToleranceConfig) -> Result<HermitianMatrix> {
    for sign in [1.0, -1.0] {
        let cand = g.scale(sign);
        if is_psd(&cand, cfg).0 {
            return Ok(cand);
        }
    }
    Err(Error::NumericalDegeneracy(
        "rank-one factor admits no PSD sign".into(),
    ))
}

/// Recursive construction of the unique PSD orthonormal basis of
/// `supp_1(M)` for a symmetric unit-coefficient PSD block `M = Σ γ_i ⊗ γ_i`:
/// normalize `Σ tr(γ_i)γ_i` to a PSD head, complete it to an orthonormal
/// basis of the support, then either split along the head's image (when some
/// basis element escapes it) and recurse, or shift the head by `kernel_shift`
/// until an escape appears.
fn spc_recurse(m_op: &BipartiteOperator, cfg: &ToleranceConfig) -> Result<Vec<HermitianMatrix>> {
    let sd = symmetric_schmidt(m_op, cfg)?;
    let n = sd.len();
    if n == 0 {
        return Ok(vec![]);
    }
    if n == 1 {
        return Ok(vec![psd_sign(&sd.gammas[0], cfg)?]);
    }
    let k = m_op.k();
    let trace_comb = f_map(m_op, &HermitianMatrix::identity(m_op.m()))?;
    let norm = trace_comb.norm();
    if norm <= cfg.rank_tol {
        return Err(Error::NumericalDegeneracy(
            "trace combination of a nonzero PSD block vanished".into(),
        ));
    }
    let mut head = trace_comb.scale(1.0 / norm);
    let (head_psd, head_min) = is_psd(&head, cfg);
    if !head_psd {
        return Err(Error::NumericalDegeneracy(format!(
            "trace combination is not PSD (min eigenvalue {head_min:.3e})"
        )));
    }
    // Each kernel_shift strictly grows the head's kernel, so an escape must
    // appear within k rounds.
    for _ in 0..=k {
        let others = complete_basis(&head, &sd.gammas, n - 1)?;
        let p = image_projector(&head, cfg);
        let complement = HermitianMatrix::identity(k).sub(&p);
        let escapes = others
            .iter()
            .any(|b| (complement.as_matrix() * b.as_matrix()).norm() > cfg.rank_tol.sqrt());
        if escapes {
            let m1 = compress(m_op, &p, &p);
            let m2 = compress(m_op, &complement, &complement);
            if m1.norm() <= cfg.rank_tol * m_op.norm() || m2.norm() <= cfg.rank_tol * m_op.norm()
            {
                return Err(Error::NumericalDegeneracy(
                    "image split produced a vanishing block".into(),
                ));
            }
            let mut out = spc_recurse(&m1, cfg)?;
            out.extend(spc_recurse(&m2, cfg)?);
            if out.len() != n {
                return Err(Error::NumericalDegeneracy(format!(
                    "split blocks yielded {} basis elements for tensor rank {n}",
                    out.len()
                )));
            }
            return Ok(out);
        }
        let (_, shifted, _) = kernel_shift(&head, &others[0], cfg)?;
        let norm = shifted.norm();
        if norm <= cfg.rank_tol {
            return Err(Error::NumericalDegeneracy("kernel shift annihilated the head".into()));
        }
        head = shifted.scale(1.0 / norm);
    }
    Err(Error::NumericalDegeneracy(
        "kernel shifts did not terminate".into(),
    ))
}

fn verify_psd_basis(
    d: &BipartiteOperator,
    basis: &PsdSchmidtBasis,
    cfg: &ToleranceConfig,
) -> Result<()> {
    let n = basis.gammas_prime.len();
    for i in 0..n {
        for (side, fac) in [&basis.gammas_prime[i], &basis.deltas_prime[i]]
            .into_iter()
            .enumerate()
        {
            let (ok, min) = is_psd(fac, cfg);
            if !ok {
                return Err(Error::NumericalDegeneracy(format!(
                    "basis factor {i} (side {side}) is not PSD (min eigenvalue {min:.3e})"
                )));
            }
        }
        for j in 0..n {
            let expected = if i == j { 1.0 } else { 0.0 };
            let g = basis.gammas_prime[i].inner(&basis.gammas_prime[j]);
            let dd = basis.deltas_prime[i].inner(&basis.deltas_prime[j]);
            if (g - expected).abs() > 1e-7 || (dd - expected).abs() > 1e-7 {
                return Err(Error::NumericalDegeneracy(format!(
                    "basis is not orthonormal at ({i},{j}): {g:.3e}, {dd:.3e}"
                )));
            }
        }
    }
    let mut recon = BipartiteOperator::new_unchecked(
        d.k(),
        d.m(),
        CMatrix::zeros(d.k() * d.m(), d.k() * d.m()),
    );
    for i in 0..n {
        recon = recon.add(&BipartiteOperator::product(
            &basis.gammas_prime[i],
            &basis.deltas_prime[i],
        ));
    }
    let res = recon.sub(d).norm();
    if res > cfg.recon_tol * d.norm().max(1.0) {
        return Err(Error::NumericalDegeneracy(format!(
            "PSD basis does not reconstruct the block (residual {res:.3e})"
        )));
    }
    Ok(())
}

/// The unique PSD orthonormal Schmidt basis of a unit-coefficient PSD block.
///
/// `Spc` mode expects a symmetric block `D = Σ γ_i ⊗ γ_i` on `M_k ⊗ M_k`;
/// `Ppt` mode expects `D` PSD and PPT, forms `M = D * (Σ δ_i^t ⊗ γ_i)
/// = Σ γ_i ⊗ γ_i`, solves the symmetric problem there and transports the
/// result with `δ_i' = G_D(γ_i')` (an isometry on the support).
pub fn psd_schmidt_basis(
    d: &BipartiteOperator,
    mode: SplitType,
    cfg: &ToleranceConfig,
) -> Result<PsdSchmidtBasis> {
    let sd = hermitian_schmidt(d, cfg)?;
    for l in &sd.lambdas {
        if (l - 1.0).abs() > cfg.degeneracy_tol {
            return Err(Error::PreconditionViolated(format!(
                "Schmidt coefficient {l} is not 1"
            )));
        }
    }
    let basis = match mode {
        SplitType::Spc => {
            if d.k() != d.m() {
                return Err(Error::DimensionMismatch {
                    context: "SPC mode requires equal factor dimensions",
                    expected: d.k(),
                    got: d.m(),
                });
            }
            let sym_res = crate::matrix::swap_factors(d).sub(d).norm();
            if sym_res > cfg.recon_tol * d.norm().max(1.0) {
                return Err(Error::PreconditionViolated(format!(
                    "block is not symmetric under factor swap (residual {sym_res:.3e})"
                )));
            }
            let gammas = spc_recurse(d, cfg)?;
            PsdSchmidtBasis {
                deltas_prime: gammas.clone(),
                gammas_prime: gammas,
            }
        }
        SplitType::Ppt => {
            // B = Σ δ_i^t ⊗ γ_i, a pure index shuffle of D:
            // B[(p,i),(q,j)] = D[(i,q),(j,p)].
            let (k, m) = d.dims();
            let b_mat = CMatrix::from_fn(k * m, k * m, |row, col| {
                let (p, i) = (row / k, row % k);
                let (q, j) = (col / k, col % k);
                d.entry(i, q, j, p)
            });
            let b = BipartiteOperator::new_unchecked(m, k, b_mat);
            let m_op = star_mat(d, &b)?;
            let (ok, min) = is_psd(m_op.hermitian(), cfg);
            if !ok {
                return Err(Error::NumericalDegeneracy(format!(
                    "star square of the block is not PSD (min eigenvalue {min:.3e})"
                )));
            }
            let gammas = spc_recurse(&m_op, cfg)?;
            let mut deltas = Vec::with_capacity(gammas.len());
            for g in &gammas {
                deltas.push(g_map(d, g)?);
            }
            PsdSchmidtBasis {
                gammas_prime: gammas,
                deltas_prime: deltas,
            }
        }
    };
    verify_psd_basis(d, &basis, cfg)?;
    Ok(basis)
}

/// Detects the type of `A` (SPC preferred when both apply).
pub(crate) fn detect_type(a: &BipartiteOperator, cfg: &ToleranceConfig) -> Result<SplitType> {
    if is_spc(a, cfg)?.is_spc {
        return Ok(SplitType::Spc);
    }
    if is_ppt(a, cfg)?.is_ppt {
        return Ok(SplitType::Ppt);
    }
    Err(Error::NotSpcNorPpt)
}

/// The split decomposition of an SPC or PPT matrix: projections onto the
/// images of the unique PSD factors of the top block, the complementary
/// projection pair, and the induced diagonal blocks.
pub fn split_decomposition(
    a: &BipartiteOperator,
    cfg: &ToleranceConfig,
) -> Result<SplitDecomposition> {
    let type_tag = detect_type(a, cfg)?;
    let sd = match type_tag {
        SplitType::Spc => symmetric_schmidt(a, cfg)?,
        SplitType::Ppt => hermitian_schmidt(a, cfg)?,
    };
    let (s, d) = extract_top_block(&sd, cfg)?;
    let basis = psd_schmidt_basis(&d, type_tag, cfg)?;
    let (k, m) = a.dims();
    let mut projections = Vec::with_capacity(s + 1);
    let mut v_sum = HermitianMatrix::zeros(k);
    let mut w_sum = HermitianMatrix::zeros(m);
    for i in 0..s {
        let v = image_projector(&basis.gammas_prime[i], cfg);
        let w = match type_tag {
            SplitType::Spc => v.clone(),
            SplitType::Ppt => image_projector(&basis.deltas_prime[i], cfg),
        };
        v_sum = v_sum.add(&v);
        w_sum = w_sum.add(&w);
        projections.push((v, w));
    }
    let v_last = HermitianMatrix::identity(k).sub(&v_sum);
    let w_last = HermitianMatrix::identity(m).sub(&w_sum);
    projections.push((v_last, w_last));
    let blocks: Vec<BipartiteOperator> = projections
        .iter()
        .map(|(v, w)| compress(a, v, w))
        .collect();
    let mut recon = BipartiteOperator::new_unchecked(k, m, CMatrix::zeros(k * m, k * m));
    for b in &blocks {
        recon = recon.add(b);
    }
    let res = recon.sub(a).norm();
    if res > cfg.recon_tol * a.norm().max(1.0) {
        return Err(Error::NumericalDegeneracy(format!(
            "split blocks do not reconstruct the input (residual {res:.3e})"
        )));
    }
    Ok(SplitDecomposition {
        s,
        projections,
        blocks,
        type_tag,
    })
}

fn tree_recurse(
    a: &BipartiteOperator,
    scale: f64,
    history: Vec<(HermitianMatrix, HermitianMatrix)>,
    out: &mut WeakIrreducibleTree,
    cfg: &ToleranceConfig,
) -> Result<()> {
    if a.norm() <= cfg.rank_tol * scale {
        return Ok(());
    }
    let rep = crate::classify::is_weak_irreducible(a, cfg)?;
    match rep.verdict {
        WiVerdict::Yes => {
            out.leaves.push(a.clone());
            out.provenance.push(history);
            Ok(())
        }
        WiVerdict::No => {
            let split = split_decomposition(a, cfg)?;
            let nonzero = split
                .blocks
                .iter()
                .filter(|b| b.norm() > cfg.rank_tol * scale)
                .count();
            if nonzero < 2 {
                return Err(Error::NumericalDegeneracy(
                    "split of a reducible matrix produced fewer than two blocks".into(),
                ));
            }
            for (proj, block) in split.projections.iter().zip(split.blocks.iter()) {
                let mut next = history.clone();
                next.push(proj.clone());
                tree_recurse(block, scale, next, out, cfg)?;
            }
            Ok(())
        }
        WiVerdict::Unknown => Err(Error::NumericalDegeneracy(
            "weak irreducibility undecided on an SPC/PPT block".into(),
        )),
    }
}

/// Recursive split into weak irreducible leaves of the same type; leaves sum
/// to the input.
pub fn weak_irreducible_tree(
    a: &BipartiteOperator,
    cfg: &ToleranceConfig,
) -> Result<WeakIrreducibleTree> {
    let type_tag = detect_type(a, cfg)?;
    let mut out = WeakIrreducibleTree {
        leaves: vec![],
        provenance: vec![],
        type_tag,
    };
    tree_recurse(a, a.norm().max(1.0), vec![], &mut out, cfg)?;
    Ok(out)
}
