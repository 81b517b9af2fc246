//! `prophet compare`: Full, Half and Prophet decoding on every dataset
//! instance, summarized per strategy.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;
use prophet_dlm::analysis::{agreement, format_speedup, speedup};
use prophet_dlm::decoder::decode_full;
use prophet_dlm::prophet::decode_prophet;
use prophet_dlm::{rng, AnswerRegion, DecodeConfig, TokenId, TokenSequence};
use rayon::prelude::*;

use crate::dataset::{read_dataset, Instance};
use crate::error::{CliError, CliResult};
use crate::flags::{id_list, DecodeFlags, IdList};
use crate::manifest::write_file;
use crate::model::{LoadedModel, ModelSpec};

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub model: ModelSpec,
    /// `prompt-ids | answer-ids | region-start,region-end` per line.
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long, value_parser = id_list, default_value = "")]
    pub suffix_ids: IdList,
    #[command(flatten)]
    pub flags: DecodeFlags,
    /// Summary CSV; printed to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub per_instance_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Full,
    Half,
    Prophet,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Full, Strategy::Half, Strategy::Prophet];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Full => "full",
            Strategy::Half => "half",
            Strategy::Prophet => "prophet",
        }
    }
}

/// One strategy on one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub steps_used: usize,
    pub speedup: f64,
    /// Answer region identical to the Full run's.
    pub exact: bool,
    pub token_match: f64,
    /// Answer region identical to the reference answer.
    pub correct: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategySummary {
    pub strategy: Strategy,
    pub instances: usize,
    pub mean_steps: f64,
    pub mean_speedup: f64,
    pub exact_agreement: f64,
    pub token_agreement: f64,
    pub answer_accuracy: f64,
}

/// Ramp models decode a filler token everywhere except the answer region.
fn ramp_target(model: &LoadedModel, gen_len: usize, prompt_len: usize, region: AnswerRegion, answer: &[TokenId]) -> Vec<TokenId> {
    let filler = model.vocab().content_tokens().next().unwrap_or(0);
    let mut target = vec![filler; gen_len];
    target[region.start - prompt_len..region.end - prompt_len].copy_from_slice(answer);
    target
}

fn run_instance(
    model: &LoadedModel,
    inst: &Instance,
    index: usize,
    suffix: &[TokenId],
    base: &DecodeConfig,
) -> CliResult<[RunResult; 3]> {
    let mut prompt = inst.prompt.clone();
    prompt.extend_from_slice(suffix);
    let region = inst.shifted_region(suffix.len());
    let cfg = DecodeConfig {
        answer_region: Some(region),
        ..base.clone()
    };
    cfg.resolve_region(prompt.len())?;
    let target = ramp_target(model, cfg.gen_len, prompt.len(), region, &inst.answer);
    let seq0 = TokenSequence::new(&prompt, cfg.gen_len, model.vocab())?;
    let seed = cfg.seed;
    let stream = || rng::stream(seed, index as u64);

    let full_model = model.instantiate(&prompt, Some(&target), cfg.gen_len, cfg.t_max)?;
    let (full_out, full_trace) = decode_full(full_model.as_denoiser(), &seq0, &cfg, &mut stream())?;

    let half_cfg = DecodeConfig {
        t_max: cfg.t_max / 2,
        ..cfg.clone()
    };
    half_cfg.validate()?;
    let half_model = model.instantiate(&prompt, Some(&target), cfg.gen_len, half_cfg.t_max)?;
    let (half_out, half_trace) = decode_full(half_model.as_denoiser(), &seq0, &half_cfg, &mut stream())?;

    let prophet_cfg = DecodeConfig {
        prophet_enabled: true,
        ..cfg.clone()
    };
    let (prophet_out, prophet_trace, _) = decode_prophet(full_model.as_denoiser(), &seq0, &prophet_cfg, &mut stream())?;

    let score = |out: &TokenSequence, steps: usize| -> CliResult<RunResult> {
        let a = agreement(&full_out, out, region)?;
        Ok(RunResult {
            steps_used: steps,
            speedup: speedup(cfg.t_max, steps)?,
            exact: a.exact,
            token_match: a.token_match_fraction,
            correct: out.tokens()[region.start..region.end] == inst.answer[..],
        })
    };
    Ok([
        score(&full_out, full_trace.steps_used())?,
        score(&half_out, half_trace.steps_used())?,
        score(&prophet_out, prophet_trace.steps_used())?,
    ])
}

/// Runs every instance; results are in input order.
pub fn run_compare(
    model: &LoadedModel,
    instances: &[Instance],
    suffix: &[TokenId],
    base: &DecodeConfig,
) -> CliResult<Vec<[RunResult; 3]>> {
    instances
        .par_iter()
        .enumerate()
        .map(|(i, inst)| {
            run_instance(model, inst, i, suffix, base).map_err(|e| match e {
                CliError::Input(m) => CliError::Input(format!("dataset line {}: {m}", inst.line)),
                CliError::Config(m) => CliError::Config(format!("dataset line {}: {m}", inst.line)),
                other => other,
            })
        })
        .collect()
}

pub fn summarize(results: &[[RunResult; 3]]) -> Vec<StrategySummary> {
    let n = results.len() as f64;
    Strategy::ALL
        .iter()
        .enumerate()
        .map(|(k, &strategy)| {
            let mean = |f: &dyn Fn(&RunResult) -> f64| results.iter().map(|r| f(&r[k])).sum::<f64>() / n;
            StrategySummary {
                strategy,
                instances: results.len(),
                mean_steps: mean(&|r| r.steps_used as f64),
                mean_speedup: mean(&|r| r.speedup),
                exact_agreement: mean(&|r| f64::from(u8::from(r.exact))),
                token_agreement: mean(&|r| r.token_match),
                answer_accuracy: mean(&|r| f64::from(u8::from(r.correct))),
            }
        })
        .collect()
}

pub const SUMMARY_HEADER: &str =
    "strategy,instances,mean_steps,mean_speedup,speedup_label,exact_agreement,token_agreement,answer_accuracy";

pub fn summary_csv(rows: &[StrategySummary]) -> String {
    let mut s = format!("{SUMMARY_HEADER}\n");
    for r in rows {
        writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.strategy.name(),
            r.instances,
            r.mean_steps,
            r.mean_speedup,
            format_speedup(r.mean_speedup),
            r.exact_agreement,
            r.token_agreement,
            r.answer_accuracy
        )
        .unwrap();
    }
    s
}

pub fn per_instance_csv(instances: &[Instance], results: &[[RunResult; 3]]) -> String {
    let mut s = String::from("index,line,strategy,steps_used,speedup,exact,token_match,correct\n");
    for (i, (inst, row)) in instances.iter().zip(results).enumerate() {
        for (strategy, r) in Strategy::ALL.iter().zip(row) {
            writeln!(
                s,
                "{i},{},{},{},{},{},{},{}",
                inst.line,
                strategy.name(),
                r.steps_used,
                r.speedup,
                u8::from(r.exact),
                r.token_match,
                u8::from(r.correct)
            )
            .unwrap();
        }
    }
    s
}

pub fn cmd_compare(a: &CompareArgs) -> CliResult<()> {
    let gen_len = a
        .flags
        .gen_len
        .ok_or_else(|| CliError::Usage("--gen-len is required".into()))?;
    let base = a.flags.config(gen_len, false, None, false);
    base.validate()?;
    let model = LoadedModel::load(&a.model)?;
    let instances = read_dataset(&a.dataset)?;
    let results = run_compare(&model, &instances, &a.suffix_ids.0, &base)?;
    let csv = summary_csv(&summarize(&results));
    match &a.out {
        Some(p) => write_file(p, csv.as_bytes())?,
        None => print!("{csv}"),
    }
    if let Some(p) = &a.per_instance_out {
        write_file(p, per_instance_csv(&instances, &results).as_bytes())?;
    }
    Ok(())
}
