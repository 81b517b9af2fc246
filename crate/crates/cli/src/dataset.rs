//! Evaluation datasets: one instance per line,
//! `prompt-ids | answer-ids | region-start,region-end`.
//!
//! The region is absolute in the prompt+generation sequence, without any
//! suffix; blank lines and lines starting with `#` are skipped.

use std::path::Path;

use prophet_dlm::{AnswerRegion, TokenId};

use crate::error::{CliError, CliResult};
use crate::ids::{parse_ids, parse_range};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    /// 1-based line in the source file.
    pub line: usize,
    pub prompt: Vec<TokenId>,
    pub answer: Vec<TokenId>,
    pub region: AnswerRegion,
}

impl Instance {
    /// Region after `suffix_len` extra prompt tokens are inserted.
    pub fn shifted_region(&self, suffix_len: usize) -> AnswerRegion {
        AnswerRegion::new(self.region.start + suffix_len, self.region.end + suffix_len)
    }
}

pub fn parse_dataset(text: &str) -> CliResult<Vec<Instance>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let err = |msg: String| CliError::Input(format!("dataset line {line}: {msg}"));
        let fields: Vec<&str> = trimmed.split('|').collect();
        let [prompt, answer, range] = fields[..] else {
            return Err(err(format!("expected 3 `|`-separated fields, found {}", fields.len())));
        };
        let prompt = parse_ids(prompt).map_err(err)?;
        let answer = parse_ids(answer).map_err(err)?;
        let (start, end) = parse_range(range).map_err(err)?;
        if start < prompt.len() || start >= end {
            return Err(err(format!("region [{start}, {end}) must lie after the {}-token prompt", prompt.len())));
        }
        if answer.len() != end - start {
            return Err(err(format!("answer has {} ids, region spans {}", answer.len(), end - start)));
        }
        out.push(Instance {
            line,
            prompt,
            answer,
            region: AnswerRegion::new(start, end),
        });
    }
    if out.is_empty() {
        return Err(CliError::Input("dataset has no instances".into()));
    }
    Ok(out)
}

pub fn read_dataset(path: &Path) -> CliResult<Vec<Instance>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_dataset(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn format_instance(prompt: &[TokenId], answer: &[TokenId], region: AnswerRegion) -> String {
    use crate::ids::format_ids;
    format!("{} | {} | {},{}", format_ids(prompt), format_ids(answer), region.start, region.end)
}
