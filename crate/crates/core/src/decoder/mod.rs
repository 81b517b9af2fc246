//! The reverse-generation loop: predict, choose positions to unmask, fill.
//!
//! [`decode_full`] is the fixed-budget baseline. The early-commit decoder in
//! [`crate::prophet`] runs the same loop with a stopping check placed between
//! the prediction and the refinement of each step.

mod remask;
mod schedule;

pub use remask::{remask_low_confidence, remask_random};
pub use schedule::{build_schedule, BlockSchedule};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::config::{DecodeConfig, RemaskStrategy, ThresholdParams};
use crate::error::{Error, Result};
use crate::models::{Denoiser, LogitMatrix};
use crate::prophet::{commit, mean_gap, should_commit, CommitDecision};
use crate::rng;
use crate::sequence::{TokenId, TokenSequence};
use crate::trace::{progress, DecodeTrace, StepRecord};

/// Result of one decode.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeOutcome {
    pub output: TokenSequence,
    pub trace: DecodeTrace,
    /// Last early-commit check; `None` for the baseline decoder.
    pub decision: Option<CommitDecision>,
}

/// Full-budget decode: `t_max` model calls, never commits early.
pub fn decode_full<R: Rng + ?Sized>(
    model: &dyn Denoiser,
    seq0: &TokenSequence,
    cfg: &DecodeConfig,
    rng: &mut R,
) -> Result<(TokenSequence, DecodeTrace)> {
    let out = run(model, seq0, cfg, rng, None)?;
    Ok((out.output, out.trace))
}

/// [`decode_full`] with the RNG seeded from `cfg.seed`.
pub fn decode_full_seeded(
    model: &dyn Denoiser,
    seq0: &TokenSequence,
    cfg: &DecodeConfig,
) -> Result<(TokenSequence, DecodeTrace)> {
    decode_full(model, seq0, cfg, &mut rng::seeded(cfg.seed))
}

pub(crate) fn run<R: Rng + ?Sized>(
    model: &dyn Denoiser,
    seq0: &TokenSequence,
    cfg: &DecodeConfig,
    rng: &mut R,
    early_commit: Option<&ThresholdParams>,
) -> Result<DecodeOutcome> {
    cfg.validate()?;
    if seq0.gen_len() != cfg.gen_len {
        return Err(Error::config(
            "gen_len",
            format!("config says {}, sequence has {}", cfg.gen_len, seq0.gen_len()),
        ));
    }
    let vocab = model.vocab();
    if vocab.mask_id() != seq0.mask_id() {
        return Err(Error::ModelMismatch(format!(
            "model mask id {} differs from sequence mask id {}",
            vocab.mask_id(),
            seq0.mask_id()
        )));
    }
    let region = cfg.resolve_region(seq0.prompt_len())?;
    let schedule = build_schedule(cfg.gen_len, cfg.block_len, cfg.t_max)?;
    let plan = schedule.step_plan();
    let offset = seq0.prompt_len();

    let mut seq = seq0.clone();
    let mut trace = DecodeTrace::new(cfg.t_max);
    let mut decision = None;

    for (t, &(block, k)) in (1..=cfg.t_max).rev().zip(&plan) {
        let logits = model.predict_logits(&seq, t)?;
        logits.check_shape(&seq, vocab)?;
        trace.model_calls += 1;

        let masked = seq.masked_positions();
        let gap = mean_gap(&logits, region, &masked);
        let p = progress(cfg.t_max, t);

        if let Some(params) = early_commit {
            let d = should_commit(gap, p, t, params);
            decision = Some(d);
            if d.committed {
                seq = commit(&seq, &logits);
                trace.steps.push(StepRecord {
                    t,
                    progress: p,
                    mean_gap: gap,
                    unmasked_positions: masked,
                    committed: true,
                    top1: cfg.record_top1.then(|| seq.tokens().to_vec()),
                });
                trace.commit_step = Some(t);
                break;
            }
        }

        let (lo, hi) = schedule.blocks[block];
        let candidates = seq.masked_in(offset + lo, offset + hi);
        let chosen = match cfg.remask_strategy {
            RemaskStrategy::Random => remask_random(&candidates, k, rng)?,
            RemaskStrategy::LowConfidence => remask_low_confidence(&logits, &candidates, k)?,
        };
        for &pos in &chosen {
            let token = fill_token(&logits, pos, cfg.temperature, rng)?;
            seq.set(pos, token);
        }

        trace.steps.push(StepRecord {
            t,
            progress: p,
            mean_gap: gap,
            unmasked_positions: chosen,
            committed: false,
            top1: cfg.record_top1.then(|| prediction_state(&seq, &logits)),
        });
    }

    Ok(DecodeOutcome {
        output: seq,
        trace,
        decision,
    })
}

fn fill_token<R: Rng + ?Sized>(logits: &LogitMatrix, pos: usize, temperature: f64, rng: &mut R) -> Result<TokenId> {
    if temperature == 0.0 {
        return Ok(logits.argmax(pos));
    }
    let probs = logits.softmax(pos, temperature);
    let dist = WeightedIndex::new(&probs).map_err(|e| Error::InvalidInput(format!("position {pos}: {e}")))?;
    Ok(dist.sample(rng) as TokenId)
}

/// Token for unmasked positions, argmax for masked ones.
fn prediction_state(seq: &TokenSequence, logits: &LogitMatrix) -> Vec<TokenId> {
    seq.tokens()
        .iter()
        .enumerate()
        .map(|(i, &tok)| if seq.is_masked(i) { logits.argmax(i) } else { tok })
        .collect()
}
