use thiserror::Error;

/// Errors raised anywhere in the decoding stack.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid prompt: {0}")]
    InvalidPrompt(String),

    /// The payload names the offending field first, e.g. `block_len: ...`.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("model mismatch: {0}")]
    ModelMismatch(String),

    #[error("scripted schedule has no entry for step {t} (covers 1..={t_max})")]
    ScheduleExhausted { t: usize, t_max: usize },

    #[error("training corpus is empty")]
    EmptyCorpus,

    #[error("invalid transition: s={s} must be < t={t}")]
    InvalidTransition { t: f64, s: f64 },

    #[error("cannot unmask {k} positions, only {available} masked")]
    InvalidUnmaskCount { k: usize, available: usize },

    #[error("vocabulary needs at least 2 entries, got {0}")]
    DegenerateVocabulary(usize),

    #[error("trace was recorded without per-step top-1 tokens")]
    MissingTop1,

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("empty input")]
    EmptyInput,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

impl Error {
    pub(crate) fn config(field: &str, msg: impl std::fmt::Display) -> Self {
        Error::InvalidConfig(format!("{field}: {msg}"))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
