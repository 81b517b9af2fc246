//! Early-commit decoding driven by the top-1/top-2 logit gap.
//!
//! At every step the decoder averages the confidence gap over the answer
//! positions that are still masked and compares it with a staged threshold
//! that relaxes as decoding progresses. Once the gap clears the threshold, all
//! remaining masks are filled with the current argmax in one shot and the loop
//! stops.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::{DecodeConfig, ThresholdParams};
use crate::decoder::{self, DecodeOutcome};
use crate::error::{Error, Result};
use crate::models::{Denoiser, LogitMatrix};
use crate::rng;
use crate::sequence::{AnswerRegion, TokenSequence};
use crate::trace::DecodeTrace;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommitDecision {
    pub committed: bool,
    /// Step counter at which the check ran.
    pub step: usize,
    #[serde(with = "crate::config::float_repr")]
    pub mean_gap: f64,
    #[serde(with = "crate::config::float_repr")]
    pub threshold: f64,
    pub progress: f64,
}

/// Top-1 logit minus top-2 logit of one row. Never negative.
pub fn confidence_gap(row: &[f64]) -> Result<f64> {
    if row.len() < 2 {
        return Err(Error::DegenerateVocabulary(row.len()));
    }
    let (mut first, mut second) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for &v in row {
        if v > first {
            second = first;
            first = v;
        } else if v > second {
            second = v;
        }
    }
    Ok(first - second)
}

/// Mean confidence gap over the positions of `region` listed in `masked`.
///
/// Returns `+inf` when no answer position is masked: the answer is already
/// decoded, so any finite threshold is met.
pub fn mean_gap(logits: &LogitMatrix, region: AnswerRegion, masked: &[usize]) -> f64 {
    let (sum, n) = masked
        .iter()
        .filter(|&&pos| region.contains(pos))
        .fold((0.0, 0usize), |(sum, n), &pos| {
            // rows always have >= 2 entries once a mask column exists
            let g = confidence_gap(logits.row(pos)).unwrap_or(0.0);
            (sum + g, n + 1)
        });
    if n == 0 {
        f64::INFINITY
    } else {
        sum / n as f64
    }
}

/// Staged threshold: `tau_high` below `p1`, `tau_mid` on `[p1, p2)`,
/// `tau_low` from `p2` on.
pub fn threshold(p: f64, params: &ThresholdParams) -> f64 {
    if p < params.p1 {
        params.tau_high
    } else if p < params.p2 {
        params.tau_mid
    } else {
        params.tau_low
    }
}

/// Commits iff `mean_gap >= threshold(p)`. An infinite threshold never
/// commits, even against the `+inf` mean of a fully decoded answer.
pub fn should_commit(mean_gap: f64, p: f64, step: usize, params: &ThresholdParams) -> CommitDecision {
    let tau = threshold(p, params);
    CommitDecision {
        committed: tau.is_finite() && mean_gap >= tau,
        step,
        mean_gap,
        threshold: tau,
        progress: p,
    }
}

/// Fills every masked position of `seq` with its row argmax.
pub fn commit(seq: &TokenSequence, logits: &LogitMatrix) -> TokenSequence {
    let mut out = seq.clone();
    for pos in seq.masked_positions() {
        out.set(pos, logits.argmax(pos));
    }
    out
}

/// Early-commit decode. Identical to [`decoder::decode_full`] step for step
/// until the commit check fires. Requires `cfg.prophet_enabled`.
pub fn decode_prophet<R: Rng + ?Sized>(
    model: &dyn Denoiser,
    seq0: &TokenSequence,
    cfg: &DecodeConfig,
    rng: &mut R,
) -> Result<(TokenSequence, DecodeTrace, CommitDecision)> {
    if !cfg.prophet_enabled {
        return Err(Error::config("prophet_enabled", "early commit is disabled in this config"));
    }
    let out = decoder::run(model, seq0, cfg, rng, Some(&cfg.thresholds))?;
    let decision = out.decision.expect("every decode runs at least one step");
    Ok((out.output, out.trace, decision))
}

/// Runs the decoder selected by `cfg.prophet_enabled`, seeded from `cfg.seed`.
pub fn decode(model: &dyn Denoiser, seq0: &TokenSequence, cfg: &DecodeConfig) -> Result<DecodeOutcome> {
    let mut rng = rng::seeded(cfg.seed);
    let params = cfg.prophet_enabled.then_some(&cfg.thresholds);
    decoder::run(model, seq0, cfg, &mut rng, params)
}
