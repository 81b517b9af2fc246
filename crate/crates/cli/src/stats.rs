//! `prophet stats`: convergence histograms and dynamics matrices over
//! recorded traces.
//!
//! The answers file has one line per trace:
//! `trace-name | answer-ids | region-start,region-end [| suffix|plain]`,
//! where `trace-name` is the trace file name with or without `.jsonl`.

use std::collections::BTreeMap;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use clap::Args;
use prophet_dlm::analysis::{convergence_histogram, dynamics_matrix, first_match_step, ConvergenceHistogram};
use prophet_dlm::{AnswerRegion, DecodeTrace, Error, TokenId};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::ids::{parse_ids, parse_range};
use crate::manifest::write_file;

#[derive(Debug, Clone, Args)]
pub struct StatsArgs {
    /// Trace files or directories of `*.jsonl` traces.
    #[arg(long, num_args = 1.., required = true)]
    pub traces: Vec<PathBuf>,
    #[arg(long)]
    pub answers: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub bins: usize,
    /// Histogram CSV. With `--suffix-ab` one file per group, named
    /// `<stem>.<group>.<ext>`.
    #[arg(long)]
    pub hist_out: Option<PathBuf>,
    /// Summary JSON; printed to stdout when absent.
    #[arg(long)]
    pub summary_out: Option<PathBuf>,
    /// Writes `<trace>.dynamics.csv` for every trace.
    #[arg(long)]
    pub dynamics_dir: Option<PathBuf>,
    /// Split statistics by the `suffix`/`plain` tag of each answer line.
    #[arg(long)]
    pub suffix_ab: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnswerEntry {
    pub answer: Vec<TokenId>,
    pub region: AnswerRegion,
    pub group: String,
}

pub fn parse_answers(text: &str) -> CliResult<BTreeMap<String, AnswerEntry>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let err = |msg: String| CliError::Input(format!("answers line {}: {msg}", i + 1));
        let fields: Vec<&str> = trimmed.split('|').map(str::trim).collect();
        let (name, answer, range, group) = match fields[..] {
            [n, a, r] => (n, a, r, "plain"),
            [n, a, r, g @ ("suffix" | "plain")] => (n, a, r, g),
            [_, _, _, g] => return Err(err(format!("group must be `suffix` or `plain`, got {g:?}"))),
            _ => return Err(err(format!("expected 3 or 4 `|`-separated fields, found {}", fields.len()))),
        };
        let answer = parse_ids(answer).map_err(err)?;
        let (start, end) = parse_range(range).map_err(err)?;
        if start >= end || answer.len() != end - start {
            return Err(err(format!("answer has {} ids, region is [{start}, {end})", answer.len())));
        }
        let name = name.strip_suffix(".jsonl").unwrap_or(name).to_string();
        let entry = AnswerEntry {
            answer,
            region: AnswerRegion::new(start, end),
            group: group.to_string(),
        };
        if out.insert(name.clone(), entry).is_some() {
            return Err(err(format!("duplicate trace name {name:?}")));
        }
    }
    Ok(out)
}

/// Expands directories to their `*.jsonl` files, sorted by name.
pub fn collect_traces(inputs: &[PathBuf]) -> CliResult<Vec<PathBuf>> {
    let mut files = Vec::new();
    for p in inputs {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(p)
                .map_err(|e| CliError::io(p, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.is_file() && f.extension().is_some_and(|x| x == "jsonl"))
                .collect();
            found.sort();
            files.extend(found);
        } else {
            files.push(p.clone());
        }
    }
    if files.is_empty() {
        return Err(CliError::Input("no trace files found".into()));
    }
    Ok(files)
}

fn trace_name(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn read_trace(path: &Path) -> CliResult<DecodeTrace> {
    let f = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let trace = DecodeTrace::read_jsonl(BufReader::new(f))
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    if !trace.has_top1() {
        return Err(CliError::Input(format!(
            "{}: {} (decode with --record-top1)",
            path.display(),
            Error::MissingTop1
        )));
    }
    Ok(trace)
}

/// Per-trace outcome. `fractions` is `None` when the final output does not
/// contain the answer.
#[derive(Debug, Clone)]
pub struct TraceResult {
    pub name: String,
    pub group: String,
    pub fractions: Option<(f64, f64)>,
    pub dynamics_csv: String,
}

pub fn analyze(files: &[PathBuf], answers: &BTreeMap<String, AnswerEntry>) -> CliResult<Vec<TraceResult>> {
    files
        .par_iter()
        .map(|path| {
            let name = trace_name(path);
            let entry = answers
                .get(&name)
                .ok_or_else(|| CliError::Input(format!("no answer line for trace {name:?}")))?;
            let trace = read_trace(path)?;
            let fractions = match first_match_step(&trace, &entry.answer, entry.region) {
                Ok(s) => Some((s.first_match_fraction, s.stable_from_fraction)),
                Err(Error::NotApplicable(_)) => None,
                Err(e) => return Err(CliError::Input(format!("{}: {e}", path.display()))),
            };
            Ok(TraceResult {
                name,
                group: entry.group.clone(),
                fractions,
                dynamics_csv: dynamics_matrix(&trace)?.to_csv(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub traces: usize,
    pub applicable: usize,
    pub excluded: usize,
    pub frac_le_50: f64,
    pub frac_le_70: f64,
    pub stable_frac_le_50: f64,
    pub stable_frac_le_70: f64,
    pub mean_first_match_fraction: f64,
}

pub fn summarize(results: &[&TraceResult], bins: usize) -> CliResult<(Summary, ConvergenceHistogram)> {
    let (first, stable): (Vec<f64>, Vec<f64>) = results.iter().filter_map(|r| r.fractions).unzip();
    if first.is_empty() {
        return Err(CliError::Input(
            "no trace decodes its answer, convergence statistics are undefined".into(),
        ));
    }
    let hist = convergence_histogram(&first, bins)?;
    let stable_hist = convergence_histogram(&stable, bins)?;
    let summary = Summary {
        traces: results.len(),
        applicable: first.len(),
        excluded: results.len() - first.len(),
        frac_le_50: hist.frac_le_50,
        frac_le_70: hist.frac_le_70,
        stable_frac_le_50: stable_hist.frac_le_50,
        stable_frac_le_70: stable_hist.frac_le_70,
        mean_first_match_fraction: first.iter().sum::<f64>() / first.len() as f64,
    };
    Ok((summary, hist))
}

fn group_path(path: &Path, group: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}.{group}.{}", ext.to_string_lossy()),
        None => format!("{stem}.{group}"),
    };
    path.with_file_name(name)
}

pub fn cmd_stats(a: &StatsArgs) -> CliResult<()> {
    if a.bins == 0 {
        return Err(CliError::Config("bins: must be at least 1".into()));
    }
    let text = std::fs::read_to_string(&a.answers).map_err(|e| CliError::io(&a.answers, e))?;
    let answers = parse_answers(&text)?;
    let files = collect_traces(&a.traces)?;
    let results = analyze(&files, &answers)?;

    if let Some(dir) = &a.dynamics_dir {
        for r in &results {
            write_file(&dir.join(format!("{}.dynamics.csv", r.name)), r.dynamics_csv.as_bytes())?;
        }
    }

    let json = if a.suffix_ab {
        let mut groups: BTreeMap<&str, Summary> = BTreeMap::new();
        for group in ["plain", "suffix"] {
            let members: Vec<&TraceResult> = results.iter().filter(|r| r.group == group).collect();
            if members.is_empty() {
                return Err(CliError::Input(format!("--suffix-ab: no traces tagged {group:?}")));
            }
            let (summary, hist) = summarize(&members, a.bins)?;
            if let Some(p) = &a.hist_out {
                write_file(&group_path(p, group), hist.to_csv().as_bytes())?;
            }
            groups.insert(group, summary);
        }
        serde_json::to_string_pretty(&groups)
    } else {
        let all: Vec<&TraceResult> = results.iter().collect();
        let (summary, hist) = summarize(&all, a.bins)?;
        if let Some(p) = &a.hist_out {
            write_file(p, hist.to_csv().as_bytes())?;
        }
        serde_json::to_string_pretty(&summary)
    }
    .expect("summary serializes");

    match &a.summary_out {
        Some(p) => write_file(p, format!("{json}\n").as_bytes())?,
        None => println!("{json}"),
    }
    Ok(())
}
