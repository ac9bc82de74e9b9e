//! `certify` — separability certificates for bipartite PSD matrices.
//!
//! Exit codes: 0 separable, 1 entangled (NPT witness), 2 inconclusive,
//! 3 usage/parse/dimension error, 4 invalid input matrix (not Hermitian or
//! not PSD), 5 numerical degeneracy.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use rayon::prelude::*;
use starsep::families::{gen_an_family, gen_pauli_family};
use starsep::schmidt::hermitian_schmidt;
use starsep::separate::{certify, separate_rank2_multipartite, MultipartiteOperator};
use starsep::split::weak_irreducible_tree;
use starsep::{Error as CoreError, ToleranceConfig};

use starsep_cli::format::{parse_matrix_file, ParsedOperator};
use starsep_cli::report::{matrix_entries, Report};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Structured,
}

#[derive(Debug, Parser)]
#[command(
    name = "certify",
    version,
    about = "Certifies separability or entanglement of bipartite PSD Hermitian matrices",
    long_about = "Certifies separability or entanglement of bipartite positive semidefinite \
Hermitian matrices using Hermitian Schmidt decompositions, weak irreducible split \
decompositions, tensor-rank-2 constructions and the sharp SPC/PPT inequalities.\n\n\
Exit codes: 0 separable, 1 entangled (NPT witness), 2 inconclusive, 3 usage or parse \
error, 4 invalid input matrix (not Hermitian / not PSD), 5 numerical degeneracy."
)]
struct Args {
    /// Matrix file: plain text ("k m" header, rows of "re,im" entries) or
    /// structured JSON with "dims" and "entries" fields
    #[arg(long, conflicts_with_all = ["pauli", "an", "batch"])]
    file: Option<PathBuf>,

    /// Factor dimensions, validated against the file contents
    #[arg(long, num_args = 2.., value_name = "DIM")]
    dims: Option<Vec<usize>>,

    /// Pauli-family instance d2 d3 d4
    #[arg(long, num_args = 3, value_names = ["D2", "D3", "D4"], conflicts_with_all = ["an", "batch"])]
    pauli: Option<Vec<f64>>,

    /// A(n) family instance: n lambda1 lambda2
    #[arg(long, num_args = 3, value_names = ["N", "LAMBDA1", "LAMBDA2"], conflicts_with = "batch")]
    an: Option<Vec<f64>>,

    /// Process every file in a directory concurrently
    #[arg(long)]
    batch: Option<PathBuf>,

    /// Override the PSD tolerance
    #[arg(long, value_name = "TOL")]
    tol_psd: Option<f64>,

    /// Override the rank / numerical-zero tolerance
    #[arg(long, value_name = "TOL")]
    tol_rank: Option<f64>,

    /// Override the coefficient-clustering tolerance
    #[arg(long, value_name = "TOL")]
    tol_degeneracy: Option<f64>,

    /// Include the explicit decomposition in the report
    #[arg(long)]
    emit_decomposition: bool,

    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Print the Hermitian Schmidt decomposition only
    #[arg(long, conflicts_with = "split")]
    schmidt: bool,

    /// Print the weak irreducible tree only
    #[arg(long)]
    split: bool,

    /// Write the report to a file instead of stdout
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
}

fn exit_code_for_core(e: &CoreError) -> u8 {
    match e {
        CoreError::NonHermitianInput { .. } | CoreError::InputNotPsd { .. } => 4,
        CoreError::NumericalDegeneracy(_) => 5,
        _ => 3,
    }
}

fn apply_flag_overrides(cfg: &mut ToleranceConfig, args: &Args) {
    if let Some(v) = args.tol_psd {
        cfg.psd_tol = v;
    }
    if let Some(v) = args.tol_rank {
        cfg.rank_tol = v;
    }
    if let Some(v) = args.tol_degeneracy {
        cfg.degeneracy_tol = v;
    }
}

struct Job {
    label: String,
    operator: ParsedOperator,
    cfg: ToleranceConfig,
}

fn load_single(args: &Args) -> Result<Job, (u8, String)> {
    let mut cfg = ToleranceConfig::default();
    apply_flag_overrides(&mut cfg, args);
    if let Some(d) = &args.pauli {
        return Ok(Job {
            label: format!("pauli({},{},{})", d[0], d[1], d[2]),
            operator: ParsedOperator::Bipartite(gen_pauli_family(d[0], d[1], d[2])),
            cfg,
        });
    }
    if let Some(v) = &args.an {
        let n = v[0];
        if n.fract() != 0.0 || n < 1.0 {
            return Err((3, format!("--an requires an integer n >= 1, got {n}")));
        }
        let op = gen_an_family(n as usize, v[1], v[2])
            .map_err(|e| (exit_code_for_core(&e), e.to_string()))?;
        return Ok(Job {
            label: format!("an({},{},{})", n, v[1], v[2]),
            operator: ParsedOperator::Bipartite(op),
            cfg,
        });
    }
    let path = args
        .file
        .as_ref()
        .ok_or((3, "one of --file, --pauli, --an or --batch is required".to_string()))?;
    load_file(path, args)
}

fn load_file(path: &Path, args: &Args) -> Result<Job, (u8, String)> {
    let mut cfg = ToleranceConfig::default();
    let outcome = parse_matrix_file(path, args.dims.as_deref(), &cfg).map_err(|e| {
        let text = format!("{e:#}");
        let code = if text.contains("not Hermitian") { 4 } else { 3 };
        (code, text)
    })?;
    // file-level overrides first, command-line flags take precedence
    outcome.overrides.apply(&mut cfg);
    apply_flag_overrides(&mut cfg, args);
    Ok(Job {
        label: path.display().to_string(),
        operator: outcome.operator,
        cfg,
    })
}

fn schmidt_report(job: &Job, format: Format) -> Result<String, (u8, String)> {
    let op = match &job.operator {
        ParsedOperator::Bipartite(op) => op,
        ParsedOperator::Multipartite(_) => {
            return Err((3, "--schmidt requires a bipartite input".to_string()))
        }
    };
    let sd = hermitian_schmidt(op, &job.cfg)
        .map_err(|e| (exit_code_for_core(&e), e.to_string()))?;
    match format {
        Format::Structured => {
            let value = serde_json::json!({
                "input": job.label,
                "dims": [op.k(), op.m()],
                "lambdas": sd.lambdas,
                "gammas": sd.gammas.iter().map(|g| matrix_entries(g.as_matrix())).collect::<Vec<_>>(),
                "deltas": sd.deltas.iter().map(|d| matrix_entries(d.as_matrix())).collect::<Vec<_>>(),
            });
            Ok(serde_json::to_string_pretty(&value).expect("schmidt serialization"))
        }
        Format::Text => {
            let mut out = format!("input: {}\nterms: {}\n", job.label, sd.len());
            for i in 0..sd.len() {
                out.push_str(&format!("lambda[{i}] = {:.12}\n", sd.lambdas[i]));
            }
            Ok(out)
        }
    }
}

fn split_report(job: &Job, format: Format) -> Result<String, (u8, String)> {
    let op = match &job.operator {
        ParsedOperator::Bipartite(op) => op,
        ParsedOperator::Multipartite(_) => {
            return Err((3, "--split requires a bipartite input".to_string()))
        }
    };
    let tree = weak_irreducible_tree(op, &job.cfg)
        .map_err(|e| (exit_code_for_core(&e), e.to_string()))?;
    match format {
        Format::Structured => {
            let leaves: Vec<_> = tree
                .leaves
                .iter()
                .map(|l| {
                    serde_json::json!({
                        "norm": l.norm(),
                        "matrix": matrix_entries(l.as_matrix()),
                    })
                })
                .collect();
            let value = serde_json::json!({
                "input": job.label,
                "type": match tree.type_tag {
                    starsep::split::SplitType::Spc => "spc",
                    starsep::split::SplitType::Ppt => "ppt",
                },
                "leaves": leaves,
            });
            Ok(serde_json::to_string_pretty(&value).expect("split serialization"))
        }
        Format::Text => {
            let mut out = format!(
                "input: {}\ntype: {}\nweak irreducible leaves: {}\n",
                job.label,
                match tree.type_tag {
                    starsep::split::SplitType::Spc => "spc",
                    starsep::split::SplitType::Ppt => "ppt",
                },
                tree.leaves.len()
            );
            for (i, leaf) in tree.leaves.iter().enumerate() {
                out.push_str(&format!("leaf {i}: norm {:.9}\n", leaf.norm()));
            }
            Ok(out)
        }
    }
}

fn certify_job(job: &Job, emit: bool) -> Result<Report, (u8, String)> {
    match &job.operator {
        ParsedOperator::Bipartite(op) => {
            let cert =
                certify(op, &job.cfg).map_err(|e| (exit_code_for_core(&e), e.to_string()))?;
            Ok(Report::from_certificate(&job.label, &cert, &job.cfg, emit))
        }
        ParsedOperator::Multipartite(op) => certify_multipartite(&job.label, op, &job.cfg, emit),
    }
}

fn certify_multipartite(
    label: &str,
    op: &MultipartiteOperator,
    cfg: &ToleranceConfig,
    emit: bool,
) -> Result<Report, (u8, String)> {
    match separate_rank2_multipartite(op, cfg) {
        Ok(tuples) => Ok(Report::from_multipartite(label, Some(&tuples), None, cfg, emit)),
        Err(CoreError::TensorRankTooHigh { rank, bound }) => Ok(Report::from_multipartite(
            label,
            None,
            Some(format!(
                "multipartite certification covers tensor rank <= {bound}; input has tensor rank {rank}"
            )),
            cfg,
            emit,
        )),
        Err(e) => Err((exit_code_for_core(&e), e.to_string())),
    }
}

fn render(report: &Report, format: Format) -> String {
    match format {
        Format::Structured => report.to_json(),
        Format::Text => report.to_text(),
    }
}

fn emit(text: &str, output: Option<&Path>) -> Result<(), (u8, String)> {
    match output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| (3, format!("cannot write {}: {e}", path.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn run_batch(dir: &Path, args: &Args) -> u8 {
    let mut files: Vec<PathBuf> = match std::fs::read_dir(dir) {
        Ok(entries) => entries
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .filter(|p| p.is_file())
            .collect(),
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", dir.display());
            return 3;
        }
    };
    files.sort();
    if files.is_empty() {
        eprintln!("error: no files in {}", dir.display());
        return 3;
    }
    type BatchResult = (PathBuf, Result<Report, (u8, String)>);
    let results: Vec<BatchResult> = files
        .par_iter()
        .map(|path| {
            let result = load_file(path, args)
                .and_then(|job| certify_job(&job, args.emit_decomposition));
            (path.clone(), result)
        })
        .collect();
    let mut worst = 0u8;
    let mut rendered: Vec<String> = Vec::new();
    for (path, result) in &results {
        match result {
            Ok(report) => {
                worst = worst.max(report.exit_code() as u8);
                rendered.push(render(report, args.format));
            }
            Err((code, message)) => {
                worst = worst.max(*code);
                rendered.push(match args.format {
                    Format::Structured => serde_json::json!({
                        "input": path.display().to_string(),
                        "error": message,
                    })
                    .to_string(),
                    Format::Text => format!("input: {}\nerror: {message}\n", path.display()),
                });
            }
        }
    }
    let joined = match args.format {
        Format::Structured => format!("[{}]", rendered.join(",\n")),
        Format::Text => rendered.join("\n"),
    };
    if let Err((code, message)) = emit(&joined, args.output.as_deref()) {
        eprintln!("error: {message}");
        return code;
    }
    worst
}

fn run(args: &Args) -> u8 {
    if let Some(dir) = &args.batch {
        return run_batch(dir, args);
    }
    let job = match load_single(args) {
        Ok(job) => job,
        Err((code, message)) => {
            eprintln!("error: {message}");
            return code;
        }
    };
    let outcome: Result<(String, u8), (u8, String)> = if args.schmidt {
        schmidt_report(&job, args.format).map(|text| (text, 0))
    } else if args.split {
        split_report(&job, args.format).map(|text| (text, 0))
    } else {
        certify_job(&job, args.emit_decomposition)
            .map(|report| (render(&report, args.format), report.exit_code() as u8))
    };
    match outcome {
        Ok((text, code)) => {
            if let Err((ecode, message)) = emit(&text, args.output.as_deref()) {
                eprintln!("error: {message}");
                return ecode;
            }
            code
        }
        Err((code, message)) => {
            eprintln!("error: {message}");
            code
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    ExitCode::from(run(&args))
}
