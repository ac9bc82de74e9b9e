//! Matrix file ingestion.
//!
//! Two formats are accepted:
//!
//! * plain text: first line `k m`, then `k·m` rows of `k·m` entries `re,im`
//!   separated by whitespace;
//! * structured JSON: `{"dims": [k, m, ...], "entries": [[[re, im], ...], ...],
//!   "tolerances": {"psd_tol": ..., ...}}` with `tolerances` optional.
//!
//! Hermiticity is validated on ingestion and the residual reported on
//! rejection.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use starsep::matrix::{CMatrix, C64};
use starsep::separate::MultipartiteOperator;
use starsep::{BipartiteOperator, HermitianMatrix, ToleranceConfig};

/// A parsed matrix: bipartite when two dimensions are given, multipartite
/// otherwise.
#[derive(Debug)]
pub enum ParsedOperator {
    Bipartite(BipartiteOperator),
    Multipartite(MultipartiteOperator),
}

impl ParsedOperator {
    pub fn dims(&self) -> Vec<usize> {
        match self {
            ParsedOperator::Bipartite(op) => vec![op.k(), op.m()],
            ParsedOperator::Multipartite(op) => op.dims().to_vec(),
        }
    }
}

/// Optional per-field tolerance overrides carried by structured files.
#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
pub struct ToleranceOverrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub herm_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psd_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degeneracy_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recon_tol: Option<f64>,
}

impl ToleranceOverrides {
    pub fn apply(&self, cfg: &mut ToleranceConfig) {
        if let Some(v) = self.herm_tol {
            cfg.herm_tol = v;
        }
        if let Some(v) = self.psd_tol {
            cfg.psd_tol = v;
        }
        if let Some(v) = self.rank_tol {
            cfg.rank_tol = v;
        }
        if let Some(v) = self.degeneracy_tol {
            cfg.degeneracy_tol = v;
        }
        if let Some(v) = self.recon_tol {
            cfg.recon_tol = v;
        }
    }
}

#[derive(Debug, Deserialize)]
struct StructuredFile {
    dims: Vec<usize>,
    entries: Vec<Vec<[f64; 2]>>,
    #[serde(default)]
    tolerances: ToleranceOverrides,
}

#[derive(Debug)]
pub struct ParseOutcome {
    pub operator: ParsedOperator,
    pub hermiticity_residual: f64,
    pub overrides: ToleranceOverrides,
}

fn build_operator(
    dims: &[usize],
    mat: CMatrix,
    cfg: &ToleranceConfig,
) -> Result<(ParsedOperator, f64)> {
    let residual = (&mat - mat.adjoint()).norm();
    let herm = HermitianMatrix::new(mat, cfg).map_err(|e| {
        anyhow!("matrix is not Hermitian (residual {residual:.3e}): {e}")
    })?;
    let op = match dims.len() {
        0 | 1 => bail!("at least two factor dimensions are required"),
        2 => ParsedOperator::Bipartite(BipartiteOperator::new(dims[0], dims[1], herm)?),
        _ => ParsedOperator::Multipartite(MultipartiteOperator::new(dims.to_vec(), herm)?),
    };
    Ok((op, residual))
}

fn parse_plain_text(text: &str, cfg: &ToleranceConfig) -> Result<ParseOutcome> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().context("empty matrix file")?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse::<usize>().with_context(|| format!("bad dimension {t:?}")))
        .collect::<Result<_>>()?;
    if dims.len() < 2 {
        bail!("header must list at least two dimensions, got {header:?}");
    }
    let total: usize = dims.iter().product();
    let mut entries = Vec::with_capacity(total * total);
    for (row_idx, line) in lines.enumerate() {
        if row_idx >= total {
            bail!("more than {total} matrix rows");
        }
        let mut count = 0;
        for tok in line.split_whitespace() {
            let (re, im) = tok
                .split_once(',')
                .with_context(|| format!("entry {tok:?} is not re,im"))?;
            let re: f64 = re.trim().parse().with_context(|| format!("bad real part {re:?}"))?;
            let im: f64 = im.trim().parse().with_context(|| format!("bad imaginary part {im:?}"))?;
            entries.push(C64::new(re, im));
            count += 1;
        }
        if count != total {
            bail!("row {row_idx} has {count} entries, expected {total}");
        }
    }
    if entries.len() != total * total {
        bail!(
            "matrix has {} entries, expected {}",
            entries.len(),
            total * total
        );
    }
    let mat = CMatrix::from_fn(total, total, |i, j| entries[i * total + j]);
    let (operator, hermiticity_residual) = build_operator(&dims, mat, cfg)?;
    Ok(ParseOutcome {
        operator,
        hermiticity_residual,
        overrides: ToleranceOverrides::default(),
    })
}

fn parse_structured(text: &str, cfg: &ToleranceConfig) -> Result<ParseOutcome> {
    let file: StructuredFile = serde_json::from_str(text).context("invalid structured matrix file")?;
    let total: usize = file.dims.iter().product();
    if file.entries.len() != total {
        bail!(
            "structured file has {} rows, expected {}",
            file.entries.len(),
            total
        );
    }
    let mut effective = *cfg;
    file.tolerances.apply(&mut effective);
    let mat = CMatrix::from_fn(total, total, |i, j| {
        let [re, im] = file.entries[i][j];
        C64::new(re, im)
    });
    for (i, row) in file.entries.iter().enumerate() {
        if row.len() != total {
            bail!("structured row {i} has {} entries, expected {}", row.len(), total);
        }
    }
    let (operator, hermiticity_residual) = build_operator(&file.dims, mat, &effective)?;
    Ok(ParseOutcome {
        operator,
        hermiticity_residual,
        overrides: file.tolerances,
    })
}

/// Parses a matrix file (structured JSON when the first non-space byte is
/// `{`, plain text otherwise) and validates it against `expected_dims` when
/// given.
pub fn parse_matrix_file(
    path: &Path,
    expected_dims: Option<&[usize]>,
    cfg: &ToleranceConfig,
) -> Result<ParseOutcome> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    let outcome = if text.trim_start().starts_with('{') {
        parse_structured(&text, cfg)?
    } else {
        parse_plain_text(&text, cfg)?
    };
    if let Some(expected) = expected_dims {
        let got = outcome.operator.dims();
        if got != expected {
            bail!(
                "dimension mismatch: file has {:?}, --dims says {:?}",
                got,
                expected
            );
        }
    }
    Ok(outcome)
}

/// Renders a bipartite operator in the plain-text grammar; inverse of
/// [`parse_matrix_file`] for hand-made fixtures.
pub fn to_plain_text(op: &BipartiteOperator) -> String {
    let total = op.k() * op.m();
    let mut out = format!("{} {}\n", op.k(), op.m());
    let m = op.as_matrix();
    for i in 0..total {
        let row: Vec<String> = (0..total)
            .map(|j| format!("{},{}", m[(i, j)].re, m[(i, j)].im))
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}
