//! Python bindings: a `BipartiteOperator` class with the certification,
//! decomposition and classification operations, plus the two family
//! generators and the star product.
//!
//! Matrices cross the boundary as nested lists of `(re, im)` pairs; reports
//! come back as plain dictionaries.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use starsep::classify::{is_ppt, is_spc, is_weak_irreducible, WiVerdict};
use starsep::families;
use starsep::matrix::{is_psd, partial_transpose as pt, CMatrix, C64};
use starsep::schmidt::{hermitian_schmidt, tensor_rank};
use starsep::separate::{certify, separate_rank2, Verdict};
use starsep::split::weak_irreducible_tree;
use starsep::star::star_mat;
use starsep::{HermitianMatrix, ToleranceConfig};

type Entries = Vec<Vec<(f64, f64)>>;

fn to_cmatrix(entries: &Entries) -> PyResult<CMatrix> {
    let rows = entries.len();
    if rows == 0 || entries.iter().any(|r| r.len() != rows) {
        return Err(PyValueError::new_err("entries must form a nonempty square matrix"));
    }
    Ok(CMatrix::from_fn(rows, rows, |i, j| {
        C64::new(entries[i][j].0, entries[i][j].1)
    }))
}

fn from_cmatrix(m: &CMatrix) -> Entries {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| (m[(i, j)].re, m[(i, j)].im)).collect())
        .collect()
}

fn core_err(e: starsep::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A Hermitian operator on `C^k ⊗ C^m`.
#[pyclass(name = "BipartiteOperator")]
#[derive(Clone)]
struct PyBipartiteOperator {
    inner: starsep::BipartiteOperator,
    cfg: ToleranceConfig,
}

impl PyBipartiteOperator {
    fn wrap(inner: starsep::BipartiteOperator, cfg: ToleranceConfig) -> Self {
        Self { inner, cfg }
    }
}

#[pymethods]
impl PyBipartiteOperator {
    /// BipartiteOperator(k, m, entries) — entries is a (k·m)×(k·m) nested
    /// list of (re, im) pairs and must be Hermitian.
    #[new]
    fn new(k: usize, m: usize, entries: Entries) -> PyResult<Self> {
        let cfg = ToleranceConfig::default();
        let mat = to_cmatrix(&entries)?;
        let herm = HermitianMatrix::new(mat, &cfg).map_err(core_err)?;
        let inner = starsep::BipartiteOperator::new(k, m, herm).map_err(core_err)?;
        Ok(Self::wrap(inner, cfg))
    }

    #[getter]
    fn dims(&self) -> (usize, usize) {
        self.inner.dims()
    }

    fn entries(&self) -> Entries {
        from_cmatrix(self.inner.as_matrix())
    }

    fn norm(&self) -> f64 {
        self.inner.norm()
    }

    /// (is_psd, min_eigenvalue)
    fn is_psd(&self) -> (bool, f64) {
        is_psd(self.inner.hermitian(), &self.cfg)
    }

    /// (is_ppt, min_partial_transpose_eigenvalue)
    fn is_ppt(&self) -> PyResult<(bool, f64)> {
        let rep = is_ppt(&self.inner, &self.cfg).map_err(core_err)?;
        Ok((rep.is_ppt, rep.min_pt_eigenvalue))
    }

    fn is_spc(&self) -> PyResult<bool> {
        Ok(is_spc(&self.inner, &self.cfg).map_err(core_err)?.is_spc)
    }

    /// "yes", "no" or "unknown"
    fn is_weak_irreducible(&self) -> PyResult<&'static str> {
        let rep = is_weak_irreducible(&self.inner, &self.cfg).map_err(core_err)?;
        Ok(match rep.verdict {
            WiVerdict::Yes => "yes",
            WiVerdict::No => "no",
            WiVerdict::Unknown => "unknown",
        })
    }

    fn tensor_rank(&self) -> PyResult<usize> {
        tensor_rank(&self.inner, &self.cfg).map_err(core_err)
    }

    fn partial_transpose(&self) -> Self {
        Self::wrap(pt(&self.inner), self.cfg)
    }

    /// (lambdas, gammas, deltas) with the factors as nested (re, im) lists.
    fn schmidt(&self) -> PyResult<(Vec<f64>, Vec<Entries>, Vec<Entries>)> {
        let sd = hermitian_schmidt(&self.inner, &self.cfg).map_err(core_err)?;
        Ok((
            sd.lambdas,
            sd.gammas.iter().map(|g| from_cmatrix(g.as_matrix())).collect(),
            sd.deltas.iter().map(|d| from_cmatrix(d.as_matrix())).collect(),
        ))
    }

    /// Weak irreducible leaves of an SPC/PPT input.
    fn split_leaves(&self) -> PyResult<Vec<PyBipartiteOperator>> {
        let tree = weak_irreducible_tree(&self.inner, &self.cfg).map_err(core_err)?;
        Ok(tree
            .leaves
            .into_iter()
            .map(|l| Self::wrap(l, self.cfg))
            .collect())
    }

    /// Minimal separable decomposition for tensor rank at most two:
    /// list of (left, right) factor pairs.
    fn separate_rank2(&self) -> PyResult<Vec<(Entries, Entries)>> {
        let dec = separate_rank2(&self.inner, &self.cfg).map_err(core_err)?;
        Ok(dec
            .pairs
            .iter()
            .map(|(c, d)| (from_cmatrix(c.as_matrix()), from_cmatrix(d.as_matrix())))
            .collect())
    }

    /// Full certification pipeline; returns a dict with the verdict,
    /// diagnostics and (for separable inputs) the explicit decomposition.
    fn certify<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let cert = certify(&self.inner, &self.cfg).map_err(core_err)?;
        let out = PyDict::new(py);
        let d = &cert.diagnostics;
        out.set_item("lambdas", d.lambdas.clone())?;
        out.set_item("s", d.s)?;
        out.set_item("mu", d.mu)?;
        out.set_item("margin", d.margin)?;
        out.set_item(
            "route",
            match d.route {
                starsep::separate::Route::NptWitness => "npt-witness",
                starsep::separate::Route::TensorRankAtMost2 => "tensor-rank-2",
                starsep::separate::Route::WeakIrreducibleLeaves => "weak-irreducible-leaves",
                starsep::separate::Route::SpcInequality => "spc-inequality",
                starsep::separate::Route::PptInequality => "ppt-inequality",
            },
        )?;
        match &cert.verdict {
            Verdict::Separable(dec) => {
                out.set_item("verdict", "separable")?;
                let pairs = PyList::empty(py);
                for (c, dd) in &dec.pairs {
                    pairs.append((from_cmatrix(c.as_matrix()), from_cmatrix(dd.as_matrix())))?;
                }
                out.set_item("decomposition", pairs)?;
            }
            Verdict::EntangledNpt {
                witness,
                negative_eigenvalue,
            } => {
                out.set_item("verdict", "entangled-npt")?;
                out.set_item("negative_eigenvalue", *negative_eigenvalue)?;
                let w: Vec<(f64, f64)> = witness.iter().map(|z| (z.re, z.im)).collect();
                out.set_item("witness", w)?;
            }
            Verdict::Inconclusive(reason) => {
                out.set_item("verdict", "inconclusive")?;
                out.set_item("reason", reason)?;
            }
        }
        Ok(out)
    }

    fn __repr__(&self) -> String {
        let (k, m) = self.inner.dims();
        format!("BipartiteOperator(k={k}, m={m}, norm={:.6})", self.inner.norm())
    }
}

/// Pauli family γ1⊗γ1 + d2 γ2⊗γ2 + d3 γ3⊗γ3 + d4 γ4⊗γ4.
#[pyfunction]
fn pauli_family(d2: f64, d3: f64, d4: f64) -> PyBipartiteOperator {
    PyBipartiteOperator::wrap(
        families::gen_pauli_family(d2, d3, d4),
        ToleranceConfig::default(),
    )
}

/// A(n) family λ1 γ1⊗γ1 + λ2 γ2⊗(−γ2) in M_{n+1} ⊗ M_{n+1}.
#[pyfunction]
fn an_family(n: usize, lambda1: f64, lambda2: f64) -> PyResult<PyBipartiteOperator> {
    Ok(PyBipartiteOperator::wrap(
        families::gen_an_family(n, lambda1, lambda2).map_err(core_err)?,
        ToleranceConfig::default(),
    ))
}

/// Generalized Schur product of two operators.
#[pyfunction]
fn star_product(
    a: &PyBipartiteOperator,
    b: &PyBipartiteOperator,
) -> PyResult<PyBipartiteOperator> {
    Ok(PyBipartiteOperator::wrap(
        star_mat(&a.inner, &b.inner).map_err(core_err)?,
        a.cfg,
    ))
}

#[pymodule]
fn starsep_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyBipartiteOperator>()?;
    m.add_function(wrap_pyfunction!(pauli_family, m)?)?;
    m.add_function(wrap_pyfunction!(an_family, m)?)?;
    m.add_function(wrap_pyfunction!(star_product, m)?)?;
    Ok(())
}
