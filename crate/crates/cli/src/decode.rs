//! `prophet decode`: one run, with trace, output and manifest files.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Args;
use prophet_dlm::prophet;
use prophet_dlm::{AnswerRegion, DecodeConfig, TokenId, TokenSequence};

use crate::error::{CliError, CliResult};
use crate::flags::{id_list, DecodeFlags, IdList, OnOff};
use crate::ids::format_ids;
use crate::manifest::{sha256_hex, write_file, RunManifest};
use crate::model::{LoadedModel, ModelSpec};

#[derive(Debug, Clone, Args)]
pub struct DecodeArgs {
    /// `ngram:<path>` or `ramp:<vocab>:<t*>:<pre_gap>:<post_gap>`.
    #[arg(long)]
    pub model: Option<ModelSpec>,
    #[arg(long, value_parser = id_list, default_value = "")]
    pub prompt_ids: IdList,
    /// Appended to the prompt, e.g. the ids of "Answer:".
    #[arg(long, value_parser = id_list, default_value = "")]
    pub suffix_ids: IdList,
    /// Target generation for ramp models.
    #[arg(long, value_parser = id_list)]
    pub target_ids: Option<IdList>,
    #[command(flatten)]
    pub flags: DecodeFlags,
    #[arg(long, value_enum, default_value = "off")]
    pub prophet: OnOff,
    /// First answer position, absolute in the prompt+suffix+generation sequence.
    #[arg(long, requires = "answer_end")]
    pub answer_start: Option<usize>,
    #[arg(long, requires = "answer_start")]
    pub answer_end: Option<usize>,
    /// Store the per-step argmax state in the trace (needed by `stats`).
    #[arg(long)]
    pub record_top1: bool,
    #[arg(long)]
    pub trace_out: Option<PathBuf>,
    /// Output ids; printed to stdout when absent.
    #[arg(long)]
    pub output_out: Option<PathBuf>,
    #[arg(long)]
    pub manifest_out: Option<PathBuf>,
    /// Replay a previous run. Output paths given on the command line override
    /// the recorded ones.
    #[arg(long)]
    pub manifest_in: Option<PathBuf>,
}

/// Fully resolved inputs of one run.
#[derive(Debug, Clone)]
pub struct RunRequest {
    pub model: ModelSpec,
    pub prompt: Vec<TokenId>,
    pub suffix: Vec<TokenId>,
    pub target: Option<Vec<TokenId>>,
    pub config: DecodeConfig,
}

impl RunRequest {
    fn from_args(a: &DecodeArgs) -> CliResult<Self> {
        let model = a
            .model
            .clone()
            .ok_or_else(|| CliError::Usage("--model is required unless --manifest-in is given".into()))?;
        let gen_len = a
            .flags
            .gen_len
            .ok_or_else(|| CliError::Usage("--gen-len is required unless --manifest-in is given".into()))?;
        let region = a.answer_start.zip(a.answer_end).map(|(s, e)| AnswerRegion::new(s, e));
        Ok(Self {
            model,
            prompt: a.prompt_ids.0.clone(),
            suffix: a.suffix_ids.0.clone(),
            target: a.target_ids.as_ref().map(|t| t.0.clone()),
            config: a.flags.config(gen_len, a.prophet == OnOff::On, region, a.record_top1),
        })
    }

    fn from_manifest(m: &RunManifest) -> Self {
        Self {
            model: m.model.clone(),
            prompt: m.prompt_ids.clone(),
            suffix: m.suffix_ids.clone(),
            target: m.target_ids.clone(),
            config: m.config.clone(),
        }
    }

    pub fn full_prompt(&self) -> Vec<TokenId> {
        let mut p = self.prompt.clone();
        p.extend_from_slice(&self.suffix);
        p
    }
}

/// What a run produced, already serialized.
pub struct RunArtifacts {
    pub trace_jsonl: String,
    pub output_line: String,
    pub steps_used: usize,
    pub commit_step: Option<usize>,
    pub model_sha256: Option<String>,
}

pub fn execute(req: &RunRequest) -> CliResult<RunArtifacts> {
    req.config.validate()?;
    let loaded = LoadedModel::load(&req.model)?;
    let prompt = req.full_prompt();
    req.config.resolve_region(prompt.len())?;
    let seq0 = TokenSequence::new(&prompt, req.config.gen_len, loaded.vocab())?;
    let instance = loaded.instantiate(&prompt, req.target.as_deref(), req.config.gen_len, req.config.t_max)?;
    let out = prophet::decode(instance.as_denoiser(), &seq0, &req.config)?;
    Ok(RunArtifacts {
        trace_jsonl: out.trace.to_jsonl(),
        output_line: format!("{}\n", format_ids(out.output.tokens())),
        steps_used: out.trace.steps_used(),
        commit_step: out.trace.commit_step,
        model_sha256: loaded.content_hash().map(str::to_owned),
    })
}

pub fn cmd_decode(a: &DecodeArgs) -> CliResult<()> {
    let (req, mut outputs) = match &a.manifest_in {
        Some(path) => {
            let m = RunManifest::read(path)?;
            (RunRequest::from_manifest(&m), m.outputs)
        }
        None => (RunRequest::from_args(a)?, BTreeMap::new()),
    };
    for (key, path) in [("trace", &a.trace_out), ("output", &a.output_out)] {
        if let Some(p) = path {
            outputs.insert(key.to_string(), p.clone());
        }
    }

    let art = execute(&req)?;

    let mut hashes = BTreeMap::new();
    hashes.insert("trace".to_string(), sha256_hex(art.trace_jsonl.as_bytes()));
    hashes.insert("output".to_string(), sha256_hex(art.output_line.as_bytes()));
    if let Some(p) = outputs.get("trace") {
        write_file(p, art.trace_jsonl.as_bytes())?;
    }
    match outputs.get("output") {
        Some(p) => write_file(p, art.output_line.as_bytes())?,
        None => print!("{}", art.output_line),
    }

    let manifest_out = a.manifest_out.clone();
    if let Some(path) = manifest_out {
        let m = RunManifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: "decode".to_string(),
            model: req.model.clone(),
            model_sha256: art.model_sha256.clone(),
            prompt_ids: req.prompt.clone(),
            suffix_ids: req.suffix.clone(),
            target_ids: req.target.clone(),
            seed: req.config.seed,
            config: req.config.clone(),
            outputs,
            hashes,
            steps_used: art.steps_used,
            commit_step: art.commit_step,
        };
        write_file(&path, m.to_json().as_bytes())?;
    }

    match art.commit_step {
        Some(t) => eprintln!("steps {}/{} (committed at t={t})", art.steps_used, req.config.t_max),
        None => eprintln!("steps {}/{}", art.steps_used, req.config.t_max),
    }
    Ok(())
}
