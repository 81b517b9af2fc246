//! Model descriptors accepted by `--model`.
//!
//! - `ngram:<path>`: a trained n-gram file.
//! - `ramp:<vocab_size>:<stabilize_step>:<pre_gap>:<post_gap>`: scripted ramp
//!   oracle (mask id 0) whose target comes from the run (`--target-ids` for
//!   `decode`, the answer for `compare`).

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use prophet_dlm::models::{make_ramp_oracle, NGramDenoiser, RampSpec, ScriptedOracle};
use prophet_dlm::{Denoiser, TokenId, Vocabulary};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum ModelSpec {
    NGram(PathBuf),
    Ramp {
        vocab_size: usize,
        stabilize_step: usize,
        pre_gap: f64,
        post_gap: f64,
    },
}

impl FromStr for ModelSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| format!("model {s:?} must look like `ngram:<path>` or `ramp:...`"))?;
        match kind {
            "ngram" if !rest.is_empty() => Ok(ModelSpec::NGram(PathBuf::from(rest))),
            "ramp" => {
                let f: Vec<&str> = rest.split(':').collect();
                let [v, t, pre, post] = f[..] else {
                    return Err("ramp model needs `ramp:<vocab_size>:<stabilize_step>:<pre_gap>:<post_gap>`".into());
                };
                let bad = |what: &str, v: &str| format!("ramp {what} {v:?} is not a number");
                Ok(ModelSpec::Ramp {
                    vocab_size: v.parse().map_err(|_| bad("vocab_size", v))?,
                    stabilize_step: t.parse().map_err(|_| bad("stabilize_step", t))?,
                    pre_gap: pre.parse().map_err(|_| bad("pre_gap", pre))?,
                    post_gap: post.parse().map_err(|_| bad("post_gap", post))?,
                })
            }
            _ => Err(format!("unknown model kind in {s:?}")),
        }
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelSpec::NGram(p) => write!(f, "ngram:{}", p.display()),
            ModelSpec::Ramp {
                vocab_size,
                stabilize_step,
                pre_gap,
                post_gap,
            } => write!(f, "ramp:{vocab_size}:{stabilize_step}:{pre_gap}:{post_gap}"),
        }
    }
}

impl From<ModelSpec> for String {
    fn from(m: ModelSpec) -> String {
        m.to_string()
    }
}

impl TryFrom<String> for ModelSpec {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

/// A resolved model. N-gram models are loaded once; ramp oracles are built
/// per run because their target depends on the instance.
pub enum LoadedModel {
    NGram { model: NGramDenoiser, sha256: String },
    Ramp { vocab: Vocabulary, spec: ModelSpec },
}

impl LoadedModel {
    pub fn load(spec: &ModelSpec) -> CliResult<Self> {
        match spec {
            ModelSpec::NGram(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
                let model = NGramDenoiser::from_text(&text)
                    .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
                Ok(LoadedModel::NGram {
                    model,
                    sha256: crate::manifest::sha256_hex(text.as_bytes()),
                })
            }
            ModelSpec::Ramp { vocab_size, .. } => {
                let vocab = Vocabulary::new(*vocab_size, 0).map_err(|e| CliError::Input(e.to_string()))?;
                Ok(LoadedModel::Ramp {
                    vocab,
                    spec: spec.clone(),
                })
            }
        }
    }

    pub fn vocab(&self) -> &Vocabulary {
        match self {
            LoadedModel::NGram { model, .. } => model.vocab(),
            LoadedModel::Ramp { vocab, .. } => vocab,
        }
    }

    pub fn content_hash(&self) -> Option<&str> {
        match self {
            LoadedModel::NGram { sha256, .. } => Some(sha256),
            LoadedModel::Ramp { .. } => None,
        }
    }

    /// Model for one run. `target` is required for ramp oracles.
    pub fn instantiate(
        &self,
        prompt: &[TokenId],
        target: Option<&[TokenId]>,
        gen_len: usize,
        t_max: usize,
    ) -> CliResult<Instance<'_>> {
        match self {
            LoadedModel::NGram { model, .. } => Ok(Instance::Shared(model)),
            LoadedModel::Ramp { vocab, spec } => {
                let ModelSpec::Ramp {
                    stabilize_step,
                    pre_gap,
                    post_gap,
                    ..
                } = *spec
                else {
                    unreachable!("ramp variant holds a ramp spec")
                };
                let target = target.ok_or_else(|| CliError::Usage("ramp models need --target-ids".into()))?;
                // a reduced budget sees a ramp that is stable from its first step
                let ramp = RampSpec {
                    stabilize_step: stabilize_step.min(t_max),
                    pre_gap,
                    post_gap,
                    t_max,
                };
                Ok(Instance::Owned(make_ramp_oracle(&ramp, prompt, target, gen_len, vocab)?))
            }
        }
    }
}

pub enum Instance<'a> {
    Shared(&'a NGramDenoiser),
    Owned(ScriptedOracle),
}

impl Instance<'_> {
    pub fn as_denoiser(&self) -> &dyn Denoiser {
        match self {
            Instance::Shared(m) => *m,
            Instance::Owned(o) => o,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn descriptors_round_trip() {
        for s in ["ngram:models/toy.ngram", "ramp:12:35:1:9"] {
            let m: ModelSpec = s.parse().unwrap();
            assert_eq!(m.to_string(), s);
        }
        assert!("ramp:12:35:1".parse::<ModelSpec>().is_err());
        assert!("gpt:foo".parse::<ModelSpec>().is_err());
        assert!("ngram:".parse::<ModelSpec>().is_err());
    }

    #[test]
    fn missing_model_file_is_input_error() {
        let err = LoadedModel::load(&ModelSpec::NGram("/nonexistent/x.ngram".into())).err().unwrap();
        assert_eq!(err.code(), crate::error::exit::INPUT);
    }
}
