//! Forward absorbing-mask corruption and the tau-leaping reverse kernel.
//!
//! Noise levels live in `(0, 1]` with a linear schedule: at level `t` each
//! generation token is masked with probability `t`. Draws are consumed in
//! ascending position order.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::error::{Error, Result};
use crate::models::LogitMatrix;
use crate::sequence::{TokenId, TokenSequence, Vocabulary};

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct NoiseLevel(f64);

impl NoiseLevel {
    pub fn new(t: f64) -> Result<Self> {
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::InvalidInput(format!("noise level {t} outside (0, 1]")));
        }
        Ok(Self(t))
    }

    /// Level `step / total` of a discrete `total`-step chain.
    pub fn from_step(step: usize, total: usize) -> Result<Self> {
        Self::new(step as f64 / total as f64)
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// Masks each generation position independently with probability `t`.
/// Prompt positions are never touched.
pub fn corrupt<R: Rng + ?Sized>(x0: &TokenSequence, t: NoiseLevel, rng: &mut R) -> TokenSequence {
    let mut out = x0.clone();
    for pos in x0.prompt_len()..x0.len() {
        if rng.random::<f64>() < t.get() {
            out.set(pos, x0.mask_id());
        }
    }
    out
}

/// One row per sequence position: a distribution over the vocabulary with
/// zero mass on the mask id.
pub type Predictor = [Vec<f64>];

/// One transition from level `t` to the earlier level `s` (`0 <= s < t`).
///
/// Unmasked tokens are copied. A masked token stays masked with probability
/// `s / t`; otherwise it is filled with a draw from its predictor row.
pub fn tau_leap_step<R: Rng + ?Sized>(
    x_t: &TokenSequence,
    t: NoiseLevel,
    s: f64,
    predictor: &Predictor,
    rng: &mut R,
) -> Result<TokenSequence> {
    let t = t.get();
    if !(s >= 0.0 && s < t) {
        return Err(Error::InvalidTransition { t, s });
    }
    if predictor.len() != x_t.len() {
        return Err(Error::InvalidInput(format!(
            "predictor has {} rows for {} positions",
            predictor.len(),
            x_t.len()
        )));
    }
    let stay = s / t;
    let mut out = x_t.clone();
    for pos in x_t.masked_positions() {
        if rng.random::<f64>() < stay {
            continue;
        }
        let row = &predictor[pos];
        if row.get(x_t.mask_id() as usize).copied().unwrap_or(0.0) != 0.0 {
            return Err(Error::InvalidInput(format!(
                "predictor row {pos} puts mass on the mask token"
            )));
        }
        let dist = WeightedIndex::new(row)
            .map_err(|e| Error::InvalidInput(format!("predictor row {pos}: {e}")))?;
        out.set(pos, dist.sample(rng) as TokenId);
    }
    Ok(out)
}

/// Softmax rows of a logit matrix; `temperature` 0 means 1.
pub fn predictor_from_logits(logits: &LogitMatrix, temperature: f64) -> Vec<Vec<f64>> {
    (0..logits.n_positions())
        .map(|i| logits.softmax(i, temperature))
        .collect()
}

/// Point mass on each position's token in `x0`. Rows for masked positions of
/// `x0` are uniform over content tokens.
pub fn one_hot_predictor(x0: &TokenSequence, vocab: &Vocabulary) -> Vec<Vec<f64>> {
    let content = (vocab.size() - 1) as f64;
    x0.tokens()
        .iter()
        .map(|&tok| {
            let mut row = vec![0.0; vocab.size()];
            if tok == vocab.mask_id() {
                for v in vocab.content_tokens() {
                    row[v as usize] = 1.0 / content;
                }
            } else {
                row[tok as usize] = 1.0;
            }
            row
        })
        .collect()
}
