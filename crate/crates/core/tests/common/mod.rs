//! Shared helpers for the integration tests: seeded random matrices and
//! reconstruction checks.

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use starsep::matrix::{kron, CMatrix, HermitianMatrix, C64};
use starsep::{BipartiteOperator, ToleranceConfig};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn cfg() -> ToleranceConfig {
    ToleranceConfig::default()
}

pub fn rand_complex(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    })
}

/// Small-integer complex entries: products of a few of them stay exact in f64.
pub fn rand_complex_int(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        C64::new(
            rng.random_range(-3..=3) as f64,
            rng.random_range(-3..=3) as f64,
        )
    })
}

pub fn rand_hermitian(rng: &mut ChaCha8Rng, dim: usize) -> HermitianMatrix {
    let raw = rand_complex(rng, dim, dim);
    HermitianMatrix::new((&raw + raw.adjoint()).scale(0.5), &cfg()).unwrap()
}

/// Random PSD matrix `G G^*` with `G` of the requested inner rank.
pub fn rand_psd(rng: &mut ChaCha8Rng, dim: usize, rank: usize) -> HermitianMatrix {
    let g = rand_complex(rng, dim, rank);
    HermitianMatrix::new(&g * g.adjoint(), &cfg()).unwrap()
}

pub fn rand_bipartite(rng: &mut ChaCha8Rng, k: usize, m: usize) -> BipartiteOperator {
    BipartiteOperator::new(k, m, rand_hermitian(rng, k * m)).unwrap()
}

/// Random PSD bipartite operator (full-rank Wishart by default).
pub fn rand_psd_bipartite(rng: &mut ChaCha8Rng, k: usize, m: usize) -> BipartiteOperator {
    BipartiteOperator::new(k, m, rand_psd(rng, k * m, k * m)).unwrap()
}

/// `C_1 ⊗ D_1 + C_2 ⊗ D_2` with random PSD factors: PSD with tensor rank
/// (generically) two.
pub fn rand_psd_rank2(rng: &mut ChaCha8Rng, k: usize, m: usize) -> BipartiteOperator {
    BipartiteOperator::product(&rand_psd(rng, k, k), &rand_psd(rng, m, m)).add(
        &BipartiteOperator::product(&rand_psd(rng, k, k), &rand_psd(rng, m, m)),
    )
}

/// Random orthonormal-projection partition of `C^dim` into `parts` blocks of
/// the given sizes (must sum to `dim`): unitary conjugates of coordinate
/// projectors.
pub fn rand_projection_partition(
    rng: &mut ChaCha8Rng,
    dim: usize,
    sizes: &[usize],
) -> Vec<HermitianMatrix> {
    assert_eq!(sizes.iter().sum::<usize>(), dim);
    // QR-style orthonormalization of a random complex matrix
    let raw = rand_complex(rng, dim, dim);
    let mut cols: Vec<nalgebra::DVector<C64>> = Vec::with_capacity(dim);
    for j in 0..dim {
        let mut v = raw.column(j).into_owned();
        for u in &cols {
            let coeff = (u.adjoint() * &v)[(0, 0)];
            v -= u * coeff;
        }
        let n = v.norm();
        v /= C64::new(n, 0.0);
        cols.push(v);
    }
    let mut out = Vec::with_capacity(sizes.len());
    let mut offset = 0;
    for &s in sizes {
        let mut p = CMatrix::zeros(dim, dim);
        for col in &cols[offset..offset + s] {
            p += col * col.adjoint();
        }
        out.push(HermitianMatrix::new(p, &cfg()).unwrap());
        offset += s;
    }
    out
}

pub fn product(c: &HermitianMatrix, d: &HermitianMatrix) -> BipartiteOperator {
    BipartiteOperator::product(c, d)
}

/// Random unitary matrix (Gram-Schmidt of a random complex square).
pub fn rand_unitary(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    let raw = rand_complex(rng, n, n);
    let mut cols: Vec<nalgebra::DVector<C64>> = Vec::with_capacity(n);
    for j in 0..n {
        let mut v = raw.column(j).into_owned();
        for u in &cols {
            let coeff = (u.adjoint() * &v)[(0, 0)];
            v -= u * coeff;
        }
        let norm = v.norm();
        v /= C64::new(norm, 0.0);
        cols.push(v);
    }
    CMatrix::from_fn(n, n, |i, j| cols[j][i])
}

/// Random real orthogonal matrix (Gram-Schmidt of a random real square).
pub fn rand_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<f64>> {
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
        for u in &cols {
            let dot: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
            for (x, y) in v.iter_mut().zip(u) {
                *x -= dot * y;
            }
        }
        let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-3 {
            for x in v.iter_mut() {
                *x /= norm;
            }
            cols.push(v);
        }
    }
    cols
}

/// Places a small bipartite operator at coordinate offsets inside a larger
/// zero operator (block-diagonal embedding on both factors).
pub fn embed_block(
    k: usize,
    m: usize,
    off_k: usize,
    off_m: usize,
    small: &BipartiteOperator,
) -> BipartiteOperator {
    let (ks, ms) = small.dims();
    assert!(off_k + ks <= k && off_m + ms <= m);
    let mat = CMatrix::from_fn(k * m, k * m, |row, col| {
        let (i, p) = (row / m, row % m);
        let (j, q) = (col / m, col % m);
        let in_range = |x: usize, off: usize, len: usize| x >= off && x < off + len;
        if in_range(i, off_k, ks)
            && in_range(j, off_k, ks)
            && in_range(p, off_m, ms)
            && in_range(q, off_m, ms)
        {
            small.entry(i - off_k, p - off_m, j - off_k, q - off_m)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    BipartiteOperator::new(k, m, HermitianMatrix::new(mat, &cfg()).unwrap()).unwrap()
}

pub fn kron3(a: &HermitianMatrix, b: &HermitianMatrix, c: &HermitianMatrix) -> CMatrix {
    kron(a.as_matrix(), &kron(b.as_matrix(), c.as_matrix()))
}

pub fn zero_op(k: usize, m: usize) -> BipartiteOperator {
    BipartiteOperator::new(k, m, HermitianMatrix::zeros(k * m)).unwrap()
}

pub fn relative_residual(a: &BipartiteOperator, b: &BipartiteOperator) -> f64 {
    a.sub(b).norm() / a.norm().max(1.0)
}
