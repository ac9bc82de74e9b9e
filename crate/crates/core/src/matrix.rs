//! Foundational complex-matrix layer: Hermitian and bipartite operator types,
//! Kronecker structure, partial transposition, self-adjoint eigendecomposition
//! and the adjoint contraction maps `F_A` / `G_A`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
/// Dense complex matrix, the ambient representation for everything in this crate.
pub type CMatrix = DMatrix<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Numerical thresholds used throughout the crate.
///
/// All defaults are sized for double precision at small dimension (`k·m ≤ 64`):
/// `herm_tol` and the PSD/rank thresholds leave a couple of orders of magnitude
/// of headroom above accumulated rounding, `degeneracy_tol` decides when two
/// Schmidt coefficients belong to the same cluster relative to the largest one,
/// and `recon_tol` bounds relative reconstruction residuals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceConfig {
    /// Hermiticity residual, relative to `max(1, ‖H‖_F)`.
    pub herm_tol: f64,
    /// Positive-semidefiniteness slack on the minimum eigenvalue, relative to `max(1, ‖H‖_F)`.
    pub psd_tol: f64,
    /// Rank / numerical-zero threshold, relative to the largest singular or eigenvalue.
    pub rank_tol: f64,
    /// Relative clustering threshold for coinciding Schmidt coefficients.
    pub degeneracy_tol: f64,
    /// Relative reconstruction residual accepted for decompositions.
    pub recon_tol: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            herm_tol: 1e-10,
            psd_tol: 1e-9,
            rank_tol: 1e-9,
            degeneracy_tol: 1e-8,
            recon_tol: 1e-8,
        }
    }
}

/// A validated Hermitian matrix.
///
/// Construction symmetrizes the input to `(H + H*)/2` after checking that the
/// anti-Hermitian part is below `herm_tol`, so downstream spectral routines can
/// rely on exact symmetry.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    mat: CMatrix,
}

impl HermitianMatrix {
    pub fn new(mat: CMatrix, cfg: &ToleranceConfig) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::NotSquare {
                rows: mat.nrows(),
                cols: mat.ncols(),
            });
        }
        let residual = (&mat - mat.adjoint()).norm();
        let tol = cfg.herm_tol * mat.norm().max(1.0);
        if residual > tol {
            return Err(Error::NonHermitianInput { residual, tol });
        }
        let sym = (&mat + mat.adjoint()).scale(0.5);
        Ok(Self { mat: sym })
    }

    /// Wraps a matrix that is Hermitian by construction (real linear
    /// combinations of Hermitian matrices, compressions `P*HP`, ...).
    /// Symmetrizes to keep the representation exact.
    pub(crate) fn new_unchecked(mat: CMatrix) -> Self {
        let sym = (&mat + mat.adjoint()).scale(0.5);
        Self { mat: sym }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn norm(&self) -> f64 {
        self.mat.norm()
    }

    /// Real trace of the matrix.
    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }

    /// Trace inner product `tr(self · other)`, real for Hermitian arguments.
    pub fn inner(&self, other: &HermitianMatrix) -> f64 {
        (&self.mat * &other.mat).trace().re
    }

    pub fn scale(&self, factor: f64) -> HermitianMatrix {
        HermitianMatrix {
            mat: self.mat.scale(factor),
        }
    }

    pub fn add(&self, other: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix {
            mat: &self.mat + &other.mat,
        }
    }

    pub fn sub(&self, other: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix {
            mat: &self.mat - &other.mat,
        }
    }

    pub fn identity(dim: usize) -> HermitianMatrix {
        HermitianMatrix {
            mat: CMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(dim: usize) -> HermitianMatrix {
        HermitianMatrix {
            mat: CMatrix::zeros(dim, dim),
        }
    }
}

/// A Hermitian operator on `C^k ⊗ C^m`, stored as its `km × km` Kronecker
/// representation together with the factor dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteOperator {
    k: usize,
    m: usize,
    mat: HermitianMatrix,
}

impl BipartiteOperator {
    pub fn new(k: usize, m: usize, mat: HermitianMatrix) -> Result<Self> {
        if k == 0 || m == 0 {
            return Err(Error::InvalidParameter(
                "factor dimensions must be positive".into(),
            ));
        }
        if mat.dim() != k * m {
            return Err(Error::DimensionMismatch {
                context: "bipartite operator",
                expected: k * m,
                got: mat.dim(),
            });
        }
        Ok(Self { k, m, mat })
    }

    pub fn from_matrix(k: usize, m: usize, mat: CMatrix, cfg: &ToleranceConfig) -> Result<Self> {
        Self::new(k, m, HermitianMatrix::new(mat, cfg)?)
    }

    pub(crate) fn new_unchecked(k: usize, m: usize, mat: CMatrix) -> Self {
        Self {
            k,
            m,
            mat: HermitianMatrix::new_unchecked(mat),
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.k, self.m)
    }

    pub fn hermitian(&self) -> &HermitianMatrix {
        &self.mat
    }

    pub fn as_matrix(&self) -> &CMatrix {
        self.mat.as_matrix()
    }

    pub fn norm(&self) -> f64 {
        self.mat.norm()
    }

    /// Entry `A[(i,p),(j,q)]` of the Kronecker representation.
    #[inline]
    pub fn entry(&self, i: usize, p: usize, j: usize, q: usize) -> C64 {
        self.as_matrix()[(i * self.m + p, j * self.m + q)]
    }

    pub fn scale(&self, factor: f64) -> BipartiteOperator {
        BipartiteOperator {
            k: self.k,
            m: self.m,
            mat: self.mat.scale(factor),
        }
    }

    pub fn add(&self, other: &BipartiteOperator) -> BipartiteOperator {
        debug_assert_eq!(self.dims(), other.dims());
        BipartiteOperator {
            k: self.k,
            m: self.m,
            mat: self.mat.add(&other.mat),
        }
    }

    pub fn sub(&self, other: &BipartiteOperator) -> BipartiteOperator {
        debug_assert_eq!(self.dims(), other.dims());
        BipartiteOperator {
            k: self.k,
            m: self.m,
            mat: self.mat.sub(&other.mat),
        }
    }

    /// `C ⊗ D` of two Hermitian factors as a bipartite operator.
    pub fn product(c: &HermitianMatrix, d: &HermitianMatrix) -> BipartiteOperator {
        BipartiteOperator {
            k: c.dim(),
            m: d.dim(),
            mat: HermitianMatrix::new_unchecked(kron(c.as_matrix(), d.as_matrix())),
        }
    }
}

/// Eigendecomposition of a Hermitian matrix: real eigenvalues in ascending
/// order with matching orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl EigenSystem {
    pub fn min_eigenvalue(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// Indices of eigenvalues treated as nonzero at `rank_tol` relative to the
    /// largest magnitude eigenvalue.
    pub fn support_indices(&self, cfg: &ToleranceConfig) -> Vec<usize> {
        let scale = self
            .values
            .iter()
            .fold(0.0f64, |acc, v| acc.max(v.abs()));
        let thr = cfg.rank_tol * scale;
        (0..self.values.len())
            .filter(|&i| self.values[i].abs() > thr)
            .collect()
    }
}

/// Kronecker product `A ⊗ B`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let mut out = CMatrix::zeros(ra * rb, ca * cb);
    for i in 0..ra {
        for j in 0..ca {
            let scaled = b.scale_complex(a[(i, j)]);
            out.view_mut((i * rb, j * cb), (rb, cb)).copy_from(&scaled);
        }
    }
    out
}

trait ScaleComplex {
    fn scale_complex(&self, z: C64) -> CMatrix;
}

impl ScaleComplex for CMatrix {
    fn scale_complex(&self, z: C64) -> CMatrix {
        self.map(|e| e * z)
    }
}

/// Kronecker product of vectors, `v ⊗ w`.
pub fn kron_vec(v: &nalgebra::DVector<C64>, w: &nalgebra::DVector<C64>) -> nalgebra::DVector<C64> {
    let mut out = nalgebra::DVector::from_element(v.len() * w.len(), ZERO);
    for i in 0..v.len() {
        for j in 0..w.len() {
            out[i * w.len() + j] = v[i] * w[j];
        }
    }
    out
}

/// Partial transposition on the first factor: block `(i,j)` of the result is
/// block `(j,i)` of the input. An involution and a Frobenius isometry.
pub fn partial_transpose(a: &BipartiteOperator) -> BipartiteOperator {
    let (k, m) = a.dims();
    let mat = CMatrix::from_fn(k * m, k * m, |row, col| {
        let (i, p) = (row / m, row % m);
        let (j, q) = (col / m, col % m);
        a.entry(j, p, i, q)
    });
    BipartiteOperator::new_unchecked(k, m, mat)
}

/// Swaps the tensor factors: `Σ X_i ⊗ Y_i ↦ Σ Y_i ⊗ X_i`.
pub fn swap_factors(a: &BipartiteOperator) -> BipartiteOperator {
    let (k, m) = a.dims();
    let mat = CMatrix::from_fn(k * m, k * m, |row, col| {
        let (p, i) = (row / k, row % k);
        let (q, j) = (col / k, col % k);
        a.entry(i, p, j, q)
    });
    BipartiteOperator::new_unchecked(m, k, mat)
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
pub fn eigh(h: &HermitianMatrix) -> EigenSystem {
    let se = h.as_matrix().clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..se.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let dim = h.dim();
    let vectors = CMatrix::from_fn(dim, dim, |r, c| se.eigenvectors[(r, order[c])]);
    EigenSystem { values, vectors }
}

/// PSD test: true iff the minimum eigenvalue is at least
/// `-psd_tol · max(1, ‖H‖_F)`. The minimum eigenvalue is returned for
/// reporting either way.
pub fn is_psd(h: &HermitianMatrix, cfg: &ToleranceConfig) -> (bool, f64) {
    let min = eigh(h).min_eigenvalue();
    (min >= -cfg.psd_tol * h.norm().max(1.0), min)
}

/// Orthonormal Hermitian basis of `M_d` under `⟨C,D⟩ = tr(CD*)`.
///
/// Generalized Gell-Mann construction in a fixed order: identity first, then
/// symmetric off-diagonal pairs row-major, then antisymmetric pairs, then
/// diagonal traceless. For `d = 2` this is the normalized Pauli basis
/// `{Id, σx, σy, σz}/√2`.
pub fn hermitian_basis(d: usize) -> Vec<HermitianMatrix> {
    let mut out = Vec::with_capacity(d * d);
    let inv_sqrt_d = 1.0 / (d as f64).sqrt();
    out.push(HermitianMatrix::new_unchecked(
        CMatrix::identity(d, d).scale(inv_sqrt_d),
    ));
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..d {
        for j in (i + 1)..d {
            let mut m = CMatrix::zeros(d, d);
            m[(i, j)] = C64::new(s, 0.0);
            m[(j, i)] = C64::new(s, 0.0);
            out.push(HermitianMatrix::new_unchecked(m));
        }
    }
    for i in 0..d {
        for j in (i + 1)..d {
            let mut m = CMatrix::zeros(d, d);
            m[(i, j)] = C64::new(0.0, -s);
            m[(j, i)] = C64::new(0.0, s);
            out.push(HermitianMatrix::new_unchecked(m));
        }
    }
    for l in 1..d {
        let norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
        let mut m = CMatrix::zeros(d, d);
        for j in 0..l {
            m[(j, j)] = C64::new(norm, 0.0);
        }
        m[(l, l)] = C64::new(-(l as f64) * norm, 0.0);
        out.push(HermitianMatrix::new_unchecked(m));
    }
    out
}

fn check_second_factor(a: &BipartiteOperator, y: &HermitianMatrix) -> Result<()> {
    if y.dim() != a.m() {
        return Err(Error::DimensionMismatch {
            context: "f_map argument",
            expected: a.m(),
            got: y.dim(),
        });
    }
    Ok(())
}

fn check_first_factor(a: &BipartiteOperator, x: &HermitianMatrix) -> Result<()> {
    if x.dim() != a.k() {
        return Err(Error::DimensionMismatch {
            context: "g_map argument",
            expected: a.k(),
            got: x.dim(),
        });
    }
    Ok(())
}

/// `F_A(Y) = Σ_i tr(Y D_i) A_i` for any decomposition `A = Σ_i A_i ⊗ D_i`,
/// computed by direct index contraction so the result is
/// decomposition-independent: `F_A(Y)[i,j] = Σ_{p,q} A[(i,p),(j,q)] Y[q,p]`.
pub fn f_map(a: &BipartiteOperator, y: &HermitianMatrix) -> Result<HermitianMatrix> {
    check_second_factor(a, y)?;
    let (k, m) = a.dims();
    let ym = y.as_matrix();
    let out = CMatrix::from_fn(k, k, |i, j| {
        let mut acc = ZERO;
        for p in 0..m {
            for q in 0..m {
                acc += a.entry(i, p, j, q) * ym[(q, p)];
            }
        }
        acc
    });
    Ok(HermitianMatrix::new_unchecked(out))
}

/// `G_A(X) = Σ_i tr(X A_i) D_i`, the adjoint of [`f_map`]:
/// `G_A(X)[p,q] = Σ_{i,j} A[(i,p),(j,q)] X[j,i]`.
pub fn g_map(a: &BipartiteOperator, x: &HermitianMatrix) -> Result<HermitianMatrix> {
    check_first_factor(a, x)?;
    let (k, m) = a.dims();
    let xm = x.as_matrix();
    let out = CMatrix::from_fn(m, m, |p, q| {
        let mut acc = ZERO;
        for i in 0..k {
            for j in 0..k {
                acc += a.entry(i, p, j, q) * xm[(j, i)];
            }
        }
        acc
    });
    Ok(HermitianMatrix::new_unchecked(out))
}

/// Spectral projector onto the image of a Hermitian matrix (eigenvalues above
/// `rank_tol` relative to the largest magnitude).
pub fn image_projector(h: &HermitianMatrix, cfg: &ToleranceConfig) -> HermitianMatrix {
    let es = eigh(h);
    let dim = h.dim();
    let mut proj = CMatrix::zeros(dim, dim);
    for idx in es.support_indices(cfg) {
        let v = es.vectors.column(idx);
        proj += v * v.adjoint();
    }
    HermitianMatrix::new_unchecked(proj)
}

/// Rank at `rank_tol` relative to the largest magnitude eigenvalue.
pub fn hermitian_rank(h: &HermitianMatrix, cfg: &ToleranceConfig) -> usize {
    eigh(h).support_indices(cfg).len()
}
