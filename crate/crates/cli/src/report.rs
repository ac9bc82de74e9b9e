//! Machine- and human-readable certification reports.
//!
//! The structured (JSON) form round-trips losslessly; the text form is a
//! fixed, line-oriented rendering of the same data.

use serde::{Deserialize, Serialize};
use starsep::matrix::CMatrix;
use starsep::separate::{Certificate, Diagnostics, Route, Verdict};
use starsep::{HermitianMatrix, ToleranceConfig};

pub type MatrixEntries = Vec<Vec<[f64; 2]>>;

pub fn matrix_entries(m: &CMatrix) -> MatrixEntries {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ToleranceEcho {
    pub herm_tol: f64,
    pub psd_tol: f64,
    pub rank_tol: f64,
    pub degeneracy_tol: f64,
    pub recon_tol: f64,
}

impl From<&ToleranceConfig> for ToleranceEcho {
    fn from(cfg: &ToleranceConfig) -> Self {
        Self {
            herm_tol: cfg.herm_tol,
            psd_tol: cfg.psd_tol,
            rank_tol: cfg.rank_tol,
            degeneracy_tol: cfg.degeneracy_tol,
            recon_tol: cfg.recon_tol,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct LeafReport {
    pub lambdas: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    pub route: String,
    pub separable: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ReportDiagnostics {
    pub lambdas: Vec<f64>,
    pub s: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    pub route: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub leaves: Vec<LeafReport>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub input: String,
    pub verdict: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub diagnostics: ReportDiagnostics,
    pub tolerances: ToleranceEcho,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub negative_eigenvalue: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<[f64; 2]>>,
    /// Product terms of an explicit separable decomposition; each inner list
    /// holds one factor per tensor slot (two for bipartite inputs).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decomposition: Option<Vec<Vec<MatrixEntries>>>,
}

pub fn route_name(route: Route) -> &'static str {
    match route {
        Route::NptWitness => "npt-witness",
        Route::TensorRankAtMost2 => "tensor-rank-2",
        Route::WeakIrreducibleLeaves => "weak-irreducible-leaves",
        Route::SpcInequality => "spc-inequality",
        Route::PptInequality => "ppt-inequality",
    }
}

fn diagnostics_report(d: &Diagnostics) -> ReportDiagnostics {
    ReportDiagnostics {
        lambdas: d.lambdas.clone(),
        s: d.s,
        mu: d.mu,
        margin: d.margin,
        route: route_name(d.route).to_string(),
        leaves: d
            .leaves
            .iter()
            .map(|l| LeafReport {
                lambdas: l.lambdas.clone(),
                mu: l.mu,
                margin: l.margin,
                route: route_name(l.route).to_string(),
                separable: l.separable,
            })
            .collect(),
    }
}

impl Report {
    pub fn from_certificate(
        input: &str,
        cert: &Certificate,
        cfg: &ToleranceConfig,
        emit_decomposition: bool,
    ) -> Report {
        let mut report = Report {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            input: input.to_string(),
            verdict: String::new(),
            reason: None,
            diagnostics: diagnostics_report(&cert.diagnostics),
            tolerances: cfg.into(),
            negative_eigenvalue: None,
            witness: None,
            decomposition: None,
        };
        match &cert.verdict {
            Verdict::Separable(dec) => {
                report.verdict = "separable".into();
                if emit_decomposition {
                    report.decomposition = Some(
                        dec.pairs
                            .iter()
                            .map(|(c, d)| {
                                vec![matrix_entries(c.as_matrix()), matrix_entries(d.as_matrix())]
                            })
                            .collect(),
                    );
                }
            }
            Verdict::EntangledNpt {
                witness,
                negative_eigenvalue,
            } => {
                report.verdict = "entangled-npt".into();
                report.negative_eigenvalue = Some(*negative_eigenvalue);
                report.witness = Some(witness.iter().map(|z| [z.re, z.im]).collect());
            }
            Verdict::Inconclusive(reason) => {
                report.verdict = "inconclusive".into();
                report.reason = Some(reason.clone());
            }
        }
        report
    }

    pub fn from_multipartite(
        input: &str,
        tuples: Option<&[Vec<HermitianMatrix>]>,
        reason: Option<String>,
        cfg: &ToleranceConfig,
        emit_decomposition: bool,
    ) -> Report {
        Report {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            input: input.to_string(),
            verdict: if tuples.is_some() {
                "separable".into()
            } else {
                "inconclusive".into()
            },
            reason,
            diagnostics: ReportDiagnostics {
                lambdas: vec![],
                s: 0,
                mu: None,
                margin: None,
                route: "tensor-rank-2".into(),
                leaves: vec![],
            },
            tolerances: cfg.into(),
            negative_eigenvalue: None,
            witness: None,
            decomposition: tuples.and_then(|t| {
                emit_decomposition.then(|| {
                    t.iter()
                        .map(|tuple| tuple.iter().map(|f| matrix_entries(f.as_matrix())).collect())
                        .collect()
                })
            }),
        }
    }

    /// Exit code under the documented contract: 0 separable, 1 entangled,
    /// 2 inconclusive.
    pub fn exit_code(&self) -> i32 {
        match self.verdict.as_str() {
            "separable" => 0,
            "entangled-npt" => 1,
            _ => 2,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("input: {}\n", self.input));
        out.push_str(&format!("verdict: {}\n", self.verdict));
        if let Some(r) = &self.reason {
            out.push_str(&format!("reason: {r}\n"));
        }
        out.push_str(&format!("route: {}\n", self.diagnostics.route));
        let lam: Vec<String> = self
            .diagnostics
            .lambdas
            .iter()
            .map(|l| format!("{l:.9}"))
            .collect();
        out.push_str(&format!("schmidt coefficients: [{}]\n", lam.join(", ")));
        out.push_str(&format!("top cluster size s: {}\n", self.diagnostics.s));
        if let Some(mu) = self.diagnostics.mu {
            out.push_str(&format!("mu: {mu:.9}\n"));
        }
        if let Some(margin) = self.diagnostics.margin {
            out.push_str(&format!("inequality margin: {margin:.9}\n"));
        }
        for (i, leaf) in self.diagnostics.leaves.iter().enumerate() {
            out.push_str(&format!(
                "leaf {i}: route {}, separable {}, lambdas [{}]",
                leaf.route,
                leaf.separable,
                leaf.lambdas
                    .iter()
                    .map(|l| format!("{l:.6}"))
                    .collect::<Vec<_>>()
                    .join(", ")
            ));
            if let (Some(mu), Some(margin)) = (leaf.mu, leaf.margin) {
                out.push_str(&format!(", mu {mu:.6}, margin {margin:.6}"));
            }
            out.push('\n');
        }
        if let Some(neg) = self.negative_eigenvalue {
            out.push_str(&format!("negative partial-transpose eigenvalue: {neg:.9}\n"));
        }
        if let Some(w) = &self.witness {
            let rendered: Vec<String> = w
                .iter()
                .map(|[re, im]| format!("{re:.6}{im:+.6}i"))
                .collect();
            out.push_str(&format!("witness: [{}]\n", rendered.join(", ")));
        }
        if let Some(dec) = &self.decomposition {
            out.push_str(&format!("decomposition: {} product terms\n", dec.len()));
            for (i, tuple) in dec.iter().enumerate() {
                for (slot, factor) in tuple.iter().enumerate() {
                    out.push_str(&format!("term {i} factor {slot}:\n"));
                    for row in factor {
                        let rendered: Vec<String> = row
                            .iter()
                            .map(|[re, im]| format!("{re:.6}{im:+.6}i"))
                            .collect();
                        out.push_str(&format!("  {}\n", rendered.join(" ")));
                    }
                }
            }
        }
        out.push_str(&format!(
            "tolerances: herm={:.1e} psd={:.1e} rank={:.1e} degeneracy={:.1e} recon={:.1e}\n",
            self.tolerances.herm_tol,
            self.tolerances.psd_tol,
            self.tolerances.rank_tol,
            self.tolerances.degeneracy_tol,
            self.tolerances.recon_tol
        ));
        out.push_str(&format!("tool: {} {}\n", self.tool, self.version));
        out
    }
}
