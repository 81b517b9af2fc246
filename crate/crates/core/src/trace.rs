//! Per-step decode records and their JSON-lines form.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::config::float_repr;
use crate::error::{Error, Result};
use crate::sequence::TokenId;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    /// Step counter, counting down from `t_max` to 1.
    pub t: usize,
    /// `(t_max - t) / t_max`.
    #[serde(rename = "p")]
    pub progress: f64,
    /// Mean confidence gap over the still-masked answer positions; `+inf`
    /// when none are masked.
    #[serde(with = "float_repr")]
    pub mean_gap: f64,
    /// Absolute positions unmasked at this step, ascending.
    #[serde(rename = "unmasked")]
    pub unmasked_positions: Vec<usize>,
    pub committed: bool,
    /// Per-position prediction state after the step: the token for positions
    /// that are unmasked, the row argmax for those still masked.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub top1: Option<Vec<TokenId>>,
}

pub fn progress(t_max: usize, t: usize) -> f64 {
    (t_max - t) as f64 / t_max as f64
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DecodeTrace {
    pub t_max: usize,
    pub steps: Vec<StepRecord>,
    pub commit_step: Option<usize>,
    pub model_calls: usize,
}

impl DecodeTrace {
    pub fn new(t_max: usize) -> Self {
        Self {
            t_max,
            ..Default::default()
        }
    }

    pub fn steps_used(&self) -> usize {
        self.steps.len()
    }

    pub fn has_top1(&self) -> bool {
        !self.steps.is_empty() && self.steps.iter().all(|s| s.top1.is_some())
    }

    /// One JSON object per line, in step order.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for step in &self.steps {
            serde_json_line(&mut w, step)?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("JSON output is UTF-8")
    }

    /// Rebuilds a trace from its JSON lines. `t_max` is taken from the first
    /// record (traces always start at `t = t_max`) and the commit step from a
    /// record flagged `committed`.
    pub fn read_jsonl<R: BufRead>(r: R) -> Result<Self> {
        let mut steps: Vec<StepRecord> = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line.map_err(|e| Error::Parse {
                line: i + 1,
                msg: e.to_string(),
            })?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: StepRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
                line: i + 1,
                msg: e.to_string(),
            })?;
            if let Some(prev) = steps.last() {
                if rec.t + 1 != prev.t {
                    return Err(Error::Parse {
                        line: i + 1,
                        msg: format!("step {} does not follow step {}", rec.t, prev.t),
                    });
                }
            }
            steps.push(rec);
        }
        let first = steps.first().ok_or(Error::EmptyInput)?;
        let t_max = first.t;
        let commit_step = steps.iter().find(|s| s.committed).map(|s| s.t);
        if let Some(c) = commit_step {
            if steps.last().map(|s| s.t) != Some(c) {
                return Err(Error::Parse {
                    line: steps.len(),
                    msg: "records follow the commit step".into(),
                });
            }
        }
        let model_calls = steps.len();
        Ok(Self {
            t_max,
            steps,
            commit_step,
            model_calls,
        })
    }
}

fn serde_json_line<W: Write, T: Serialize>(w: &mut W, v: &T) -> std::io::Result<()> {
    serde_json::to_writer(&mut *w, v)?;
    w.write_all(b"\n")
}
