//! Denoiser models: anything that maps a partially masked sequence to a
//! logit matrix.

mod logits;
mod ngram;
mod oracle;

pub use logits::{LogitMatrix, MASK_LOGIT};
pub use ngram::{train_ngram, ContextKey, NGramDenoiser};
pub use oracle::{make_ramp_oracle, RampSpec, ScriptedOracle};

use crate::error::Result;
use crate::sequence::{TokenSequence, Vocabulary};

/// A denoiser `p(x_0 | x_t)`. Implementations must be pure functions of
/// `(self, seq, t)`.
pub trait Denoiser: Send + Sync {
    fn vocab(&self) -> &Vocabulary;

    /// Logits for every position of `seq` at step counter `t`.
    fn predict_logits(&self, seq: &TokenSequence, t: usize) -> Result<LogitMatrix>;
}

pub fn predict_logits(model: &dyn Denoiser, seq: &TokenSequence, t: usize) -> Result<LogitMatrix> {
    model.predict_logits(seq, t)
}
