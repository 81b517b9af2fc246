use super::{Denoiser, LogitMatrix};
use crate::error::{Error, Result};
use crate::sequence::{TokenId, TokenSequence, Vocabulary};

/// Test double indexed by step counter: `schedule[t - 1]` is returned at step
/// `t`, whatever the sequence content.
#[derive(Debug, Clone)]
pub struct ScriptedOracle {
    vocab: Vocabulary,
    schedule: Vec<LogitMatrix>,
}

impl ScriptedOracle {
    /// `schedule[0]` is served at `t = 1`, `schedule[t_max - 1]` at `t = t_max`.
    pub fn new(vocab: Vocabulary, schedule: Vec<LogitMatrix>) -> Result<Self> {
        let first = schedule
            .first()
            .ok_or_else(|| Error::ModelMismatch("empty schedule".into()))?;
        let n = first.n_positions();
        for (i, m) in schedule.iter().enumerate() {
            if m.n_positions() != n || m.vocab_size() != vocab.size() || m.mask_id() != vocab.mask_id() {
                return Err(Error::ModelMismatch(format!(
                    "schedule entry for t={} is {}x{}, expected {n}x{}",
                    i + 1,
                    m.n_positions(),
                    m.vocab_size(),
                    vocab.size()
                )));
            }
        }
        Ok(Self { vocab, schedule })
    }

    pub fn constant(vocab: Vocabulary, matrix: LogitMatrix, t_max: usize) -> Result<Self> {
        Self::new(vocab, vec![matrix; t_max])
    }

    /// Builds the schedule from `f(t)` for `t = 1..=t_max`.
    pub fn from_fn<F>(vocab: Vocabulary, t_max: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(usize) -> Result<LogitMatrix>,
    {
        let schedule = (1..=t_max).map(&mut f).collect::<Result<Vec<_>>>()?;
        Self::new(vocab, schedule)
    }

    pub fn t_max(&self) -> usize {
        self.schedule.len()
    }

    pub fn n_positions(&self) -> usize {
        self.schedule[0].n_positions()
    }

    pub fn at(&self, t: usize) -> Option<&LogitMatrix> {
        t.checked_sub(1).and_then(|i| self.schedule.get(i))
    }
}

impl Denoiser for ScriptedOracle {
    fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    fn predict_logits(&self, seq: &TokenSequence, t: usize) -> Result<LogitMatrix> {
        let m = self.at(t).ok_or(Error::ScheduleExhausted {
            t,
            t_max: self.t_max(),
        })?;
        m.check_shape(seq, &self.vocab)?;
        Ok(m.clone())
    }
}

/// Parameters of a ramp oracle: decoys before `stabilize_step`, the target
/// from `stabilize_step` down to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct RampSpec {
    pub stabilize_step: usize,
    pub pre_gap: f64,
    pub post_gap: f64,
    pub t_max: usize,
}

/// Oracle whose generation-position argmax cycles among decoys (margin
/// `pre_gap`) for `t > stabilize_step`, then equals `target` with margin
/// `post_gap` for every `t <= stabilize_step`.
///
/// Before stabilization the top-2 are both decoys when the vocabulary has at
/// least three content tokens, so the argmax differs from the target even
/// when `pre_gap` is 0. Prompt rows favour the prompt token.
pub fn make_ramp_oracle(
    spec: &RampSpec,
    prompt: &[TokenId],
    target: &[TokenId],
    gen_len: usize,
    vocab: &Vocabulary,
) -> Result<ScriptedOracle> {
    let RampSpec {
        stabilize_step,
        pre_gap,
        post_gap,
        t_max,
    } = *spec;
    if stabilize_step < 1 || stabilize_step > t_max {
        return Err(Error::config(
            "stabilize_step",
            format!("must be in 1..={t_max}, got {stabilize_step}"),
        ));
    }
    if !(pre_gap >= 0.0 && post_gap > pre_gap && post_gap.is_finite()) {
        return Err(Error::config(
            "post_gap",
            format!("need post_gap > pre_gap >= 0, got {post_gap} and {pre_gap}"),
        ));
    }
    if target.len() != gen_len {
        return Err(Error::ModelMismatch(format!(
            "target has {} tokens, gen_len is {gen_len}",
            target.len()
        )));
    }
    let content: Vec<TokenId> = vocab.content_tokens().collect();
    if content.len() < 2 {
        return Err(Error::DegenerateVocabulary(vocab.size()));
    }
    if let Some(&bad) = target
        .iter()
        .chain(prompt)
        .find(|&&v| v == vocab.mask_id() || !vocab.contains(v))
    {
        return Err(Error::ModelMismatch(format!("token {bad} is not a content token")));
    }

    let width = vocab.size();
    let n = prompt.len() + gen_len;
    ScriptedOracle::from_fn(vocab.clone(), t_max, |t| {
        let mut values = vec![0.0; n * width];
        for (pos, row) in values.chunks_mut(width).enumerate() {
            if pos < prompt.len() {
                row[prompt[pos] as usize] = post_gap;
                continue;
            }
            let g = pos - prompt.len();
            let goal = target[g];
            if t <= stabilize_step {
                row[goal as usize] = post_gap;
            } else {
                let decoys: Vec<TokenId> = content.iter().copied().filter(|&v| v != goal).collect();
                let first = decoys[(g + t) % decoys.len()];
                let second = if decoys.len() >= 2 {
                    decoys[(g + t + 1) % decoys.len()]
                } else {
                    goal
                };
                row.iter_mut().for_each(|v| *v = -1.0);
                row[first as usize] = pre_gap;
                row[second as usize] = 0.0;
            }
        }
        LogitMatrix::from_flat(values, n, width, vocab.mask_id())
    })
}
