//! Batch driver: analyze program files and render the result table.

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use lpnt::detect::{prove_traced, ProofOutcome, UnknownReason};
use lpnt::parser::{parse_program, ParseError};
use lpnt::program::Program;
use lpnt::unfold::{Origin, StoredRule, UnfoldBudget};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}:{source}")]
    Parse { path: PathBuf, source: ParseError },
    #[error("timeout must be positive")]
    ZeroTimeout,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Text,
    Json,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub inputs: Vec<PathBuf>,
    pub timeout: Duration,
    pub max_iterations: usize,
    pub max_rules: usize,
    /// Resolution steps used to validate a witness; 0 disables validation.
    pub validate_steps: usize,
    pub output: OutputFormat,
    pub trace: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        let b = UnfoldBudget::default();
        RunConfig {
            inputs: Vec::new(),
            timeout: b.timeout,
            max_iterations: b.max_iterations,
            max_rules: b.max_rules,
            validate_steps: 0,
            output: OutputFormat::Text,
            trace: false,
        }
    }
}

impl RunConfig {
    pub fn budget(&self) -> UnfoldBudget {
        UnfoldBudget {
            max_iterations: self.max_iterations,
            max_rules: self.max_rules,
            timeout: self.timeout,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Status {
    Proven,
    #[serde(rename = "Unknown-timeout")]
    UnknownTimeout,
    #[serde(rename = "Unknown-fixpoint")]
    UnknownFixpoint,
    #[serde(rename = "Unknown-cap")]
    UnknownCap,
    #[serde(rename = "Unknown-validation")]
    UnknownValidation,
}

impl From<UnknownReason> for Status {
    fn from(r: UnknownReason) -> Self {
        match r {
            UnknownReason::Timeout => Status::UnknownTimeout,
            UnknownReason::Fixpoint => Status::UnknownFixpoint,
            UnknownReason::IterationCap | UnknownReason::RuleCap => Status::UnknownCap,
            UnknownReason::ValidationFailed => Status::UnknownValidation,
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Proven => "Proven",
            Status::UnknownTimeout => "Unknown-timeout",
            Status::UnknownFixpoint => "Unknown-fixpoint",
            Status::UnknownCap => "Unknown-cap",
            Status::UnknownValidation => "Unknown-validation",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReportRow {
    pub program: String,
    pub rules: usize,
    pub relations: usize,
    pub mode: String,
    /// Ground non-terminating query, or `?`.
    pub witness: String,
    pub unf: usize,
    pub time_ms: u128,
    pub status: Status,
}

/// Number of distinct predicates defined by the program.
pub fn count_relations(p: &Program) -> usize {
    p.head_relations().len()
}

/// Expand directories to their `.pl` files; everything sorted lexicographically.
pub fn collect_inputs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>, CliError> {
    let mut out = Vec::new();
    for path in inputs {
        let meta = fs::metadata(path).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
        if meta.is_dir() {
            let entries = fs::read_dir(path).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            let mut files = Vec::new();
            for e in entries {
                let e = e.map_err(|source| CliError::Io {
                    path: path.clone(),
                    source,
                })?;
                let p = e.path();
                if p.is_file() && p.extension().is_some_and(|x| x == "pl") {
                    files.push(p);
                }
            }
            files.sort();
            out.extend(files);
        } else {
            out.push(path.clone());
        }
    }
    Ok(out)
}

pub fn load(path: &Path) -> Result<Program, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_program(&text).map_err(|source| CliError::Parse {
        path: path.to_path_buf(),
        source,
    })
}

/// Analyze one parsed program: one row per query directive, or a single row
/// over every predicate when there is none.
pub fn analyze(name: &str, p: &Program, cfg: &RunConfig, trace: &mut dyn Write) -> Vec<ReportRow> {
    let queries: Vec<(Option<_>, String)> = if p.queries.is_empty() {
        vec![(None, "-".to_string())]
    } else {
        p.queries
            .iter()
            .map(|q| (Some(q.predicate.clone()), q.to_string()))
            .collect()
    };
    queries
        .into_iter()
        .map(|(query, mode)| {
            let report = prove_traced(p, query.as_ref(), cfg.budget(), cfg.validate_steps, |s| {
                if cfg.trace {
                    let _ = writeln!(
                        trace,
                        "[{name}] round {}: {}{}",
                        s.round,
                        s.rule,
                        provenance(s)
                    );
                }
            });
            let (witness, status) = match &report.outcome {
                ProofOutcome::Proven(w) => (w.witness.to_string(), Status::Proven),
                ProofOutcome::Unknown(r) => ("?".to_string(), Status::from(*r)),
            };
            ReportRow {
                program: name.to_string(),
                rules: p.rules.len(),
                relations: count_relations(p),
                mode,
                witness,
                unf: report.stats.unf,
                time_ms: report.elapsed().as_millis(),
                status,
            }
        })
        .collect()
}

fn provenance(s: &StoredRule) -> String {
    let Some(p) = &s.provenance else {
        return "  [initial]".to_string();
    };
    let used: Vec<String> = p
        .used
        .iter()
        .map(|o| match o {
            Origin::Identity(i) => format!("id{i}"),
            Origin::Stored(i) => format!("#{i}"),
        })
        .collect();
    format!(
        "  [clause {}, {} atom(s), using {}]",
        p.program_rule + 1,
        p.prefix,
        used.join(" ")
    )
}

#[derive(Debug, Default)]
pub struct RunResult {
    pub rows: Vec<ReportRow>,
    /// Files skipped in corpus mode.
    pub errors: Vec<CliError>,
}

impl RunResult {
    pub fn exit_code(&self) -> i32 {
        i32::from(!self.errors.is_empty())
    }
}

/// Analyze every input. A single file input makes IO and parse errors fatal;
/// otherwise failing files are recorded and skipped.
pub fn run(cfg: &RunConfig, trace: &mut dyn Write) -> Result<RunResult, CliError> {
    if cfg.timeout.is_zero() {
        return Err(CliError::ZeroTimeout);
    }
    let single = cfg.inputs.len() == 1 && !cfg.inputs[0].is_dir();
    let files = collect_inputs(&cfg.inputs)?;
    let mut res = RunResult::default();
    for path in files {
        let p = match load(&path) {
            Ok(p) => p,
            Err(e) if single => return Err(e),
            Err(e) => {
                res.errors.push(e);
                continue;
            }
        };
        let name = path.file_stem().map_or_else(
            || path.display().to_string(),
            |s| s.to_string_lossy().into_owned(),
        );
        res.rows.extend(analyze(&name, &p, cfg, trace));
    }
    Ok(res)
}

const HEADERS: [&str; 6] = [
    "Program (#rules, #rel)",
    "Mode",
    "NTI",
    "#unf",
    "Time(ms)",
    "Status",
];

pub fn render_text(rows: &[ReportRow]) -> String {
    let cells: Vec<[String; 6]> = rows
        .iter()
        .map(|r| {
            [
                format!("{} ({}, {})", r.program, r.rules, r.relations),
                r.mode.clone(),
                r.witness.clone(),
                r.unf.to_string(),
                r.time_ms.to_string(),
                r.status.to_string(),
            ]
        })
        .collect();
    let mut width = HEADERS.map(|h| h.chars().count());
    for row in &cells {
        for (w, c) in width.iter_mut().zip(row) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |cols: &[String]| {
        let padded: Vec<String> = cols
            .iter()
            .zip(&width)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        padded.join(" | ").trim_end().to_string() + "\n"
    };
    let mut out = line(&HEADERS.map(String::from));
    out += &(width
        .iter()
        .map(|w| "-".repeat(*w))
        .collect::<Vec<_>>()
        .join("-+-")
        + "\n");
    for row in &cells {
        out += &line(row);
    }
    out
}

pub fn render_json(rows: &[ReportRow]) -> String {
    serde_json::to_string_pretty(rows).expect("rows serialize")
}
