//! Masked-diffusion language model decoding.
//!
//! The crate provides the standard iterative predict/re-mask loop for
//! absorbing-mask diffusion language models, an early-commit variant that
//! stops refining once the mean top-1/top-2 logit margin over the answer
//! region clears a progress-dependent threshold, toy denoisers for desk-scale
//! experiments, and the measurement tools used to study when answers
//! converge during decoding.
//!
//! Module map:
//!
//! - [`sequence`], [`config`], [`trace`]: shared value types.
//! - [`models`]: the [`Denoiser`](models::Denoiser) trait, a step-indexed
//!   scripted oracle and a count-based n-gram denoiser.
//! - [`forward`]: forward masking and the tau-leaping transition kernel.
//! - [`decoder`]: block schedule, re-masking strategies and the full decode loop.
//! - [`prophet`]: confidence gap, staged thresholds and early-commit decoding.
//! - [`analysis`]: convergence statistics, dynamics matrices, speedup and agreement.

pub mod analysis;
pub mod config;
pub mod decoder;
pub mod error;
pub mod forward;
pub mod models;
pub mod prophet;
pub mod rng;
pub mod sequence;
pub mod trace;

pub use config::{DecodeConfig, RemaskStrategy, ThresholdParams};
pub use error::{Error, Result};
pub use models::{Denoiser, LogitMatrix, NGramDenoiser, ScriptedOracle};
pub use sequence::{AnswerRegion, TokenId, TokenSequence, Vocabulary};
pub use trace::{DecodeTrace, StepRecord};
