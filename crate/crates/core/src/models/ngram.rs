//! Count-based bidirectional n-gram denoiser with add-alpha smoothing.
//!
//! A position's context is up to `order` tokens on each side. Training sees
//! clean sequences, so contexts are the adjacent tokens, truncated at the
//! sequence ends with a boundary sentinel. At inference, masked slots are
//! skipped: the context keeps the nearest unmasked tokens inside the window
//! and pads the far side with the boundary sentinel.
//!
//! Persistence format (one record per line, records sorted by key):
//!
//! ```text
//! ngram v1 <order> <alpha> <vocab_size> <mask_id>
//! <left-ids> | <right-ids> | <token-id> <count>
//! ```
//!
//! Ids are space-separated in positional order and `_` is the boundary.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{Denoiser, LogitMatrix};
use crate::error::{Error, Result};
use crate::sequence::{TokenId, TokenSequence, Vocabulary};

/// `None` is the boundary sentinel.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ContextKey {
    pub left: Vec<Option<TokenId>>,
    pub right: Vec<Option<TokenId>>,
}

impl ContextKey {
    /// Context of `pos`, skipping positions that hold `mask`.
    pub fn at(tokens: &[TokenId], pos: usize, order: usize, mask: Option<TokenId>) -> Self {
        let visible = |&i: &usize| Some(tokens[i]) != mask;
        let lo = pos.saturating_sub(order);
        let hi = (pos + 1 + order).min(tokens.len());

        // nearest first, then reversed into positional order
        let mut left: Vec<Option<TokenId>> = (lo..pos).rev().filter(visible).map(|i| Some(tokens[i])).collect();
        left.resize(order, None);
        left.reverse();

        let mut right: Vec<Option<TokenId>> = (pos + 1..hi).filter(visible).map(|i| Some(tokens[i])).collect();
        right.resize(order, None);

        Self { left, right }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NGramDenoiser {
    order: usize,
    alpha: f64,
    vocab: Vocabulary,
    counts: BTreeMap<ContextKey, BTreeMap<TokenId, u64>>,
}

pub fn train_ngram(
    corpus: &[Vec<TokenId>],
    order: usize,
    alpha: f64,
    vocab: &Vocabulary,
) -> Result<NGramDenoiser> {
    NGramDenoiser::train(corpus, order, alpha, vocab)
}

impl NGramDenoiser {
    pub fn train(corpus: &[Vec<TokenId>], order: usize, alpha: f64, vocab: &Vocabulary) -> Result<Self> {
        if corpus.iter().all(Vec::is_empty) {
            return Err(Error::EmptyCorpus);
        }
        check_alpha(alpha)?;
        let mut model = Self {
            order,
            alpha,
            vocab: vocab.clone(),
            counts: BTreeMap::new(),
        };
        for (line, seq) in corpus.iter().enumerate() {
            if let Some(&bad) = seq.iter().find(|&&v| v == vocab.mask_id() || !vocab.contains(v)) {
                return Err(Error::InvalidInput(format!(
                    "corpus sequence {line} holds token {bad}, which is the mask or out of vocabulary"
                )));
            }
            for (pos, &tok) in seq.iter().enumerate() {
                let key = ContextKey::at(seq, pos, order, None);
                *model.counts.entry(key).or_default().entry(tok).or_default() += 1;
            }
        }
        Ok(model)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Number of distinct contexts observed in training.
    pub fn context_count(&self) -> usize {
        self.counts.len()
    }

    pub fn count(&self, key: &ContextKey, token: TokenId) -> u64 {
        self.counts
            .get(key)
            .and_then(|c| c.get(&token))
            .copied()
            .unwrap_or(0)
    }

    /// Logit row for a context: `ln(count + alpha)` per content token.
    pub fn row_for(&self, key: &ContextKey) -> Vec<f64> {
        let counts = self.counts.get(key);
        (0..self.vocab.size() as TokenId)
            .map(|v| {
                if v == self.vocab.mask_id() {
                    return super::MASK_LOGIT;
                }
                let c = counts.and_then(|c| c.get(&v)).copied().unwrap_or(0);
                (c as f64 + self.alpha).ln()
            })
            .collect()
    }

    /// Smoothed probability of `token` in context `key`.
    pub fn probability(&self, key: &ContextKey, token: TokenId) -> f64 {
        let content = (self.vocab.size() - 1) as f64;
        let total: u64 = self.counts.get(key).map_or(0, |c| c.values().sum());
        (self.count(key, token) as f64 + self.alpha) / (total as f64 + self.alpha * content)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "ngram v1 {} {} {} {}\n",
            self.order,
            self.alpha,
            self.vocab.size(),
            self.vocab.mask_id()
        );
        for (key, tokens) in &self.counts {
            for (tok, count) in tokens {
                let _ = writeln!(out, "{} | {} | {tok} {count}", ids(&key.left), ids(&key.right));
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "missing header".into(),
        })?;
        let fields: Vec<&str> = header.split(' ').collect();
        let perr = |line: usize, msg: String| Error::Parse { line, msg };
        if fields.len() != 6 || fields[0] != "ngram" || fields[1] != "v1" {
            return Err(perr(1, format!("bad header {header:?}")));
        }
        let order: usize = fields[2].parse().map_err(|_| perr(1, "bad order".into()))?;
        let alpha: f64 = fields[3].parse().map_err(|_| perr(1, "bad alpha".into()))?;
        let size: usize = fields[4].parse().map_err(|_| perr(1, "bad vocab size".into()))?;
        let mask: TokenId = fields[5].parse().map_err(|_| perr(1, "bad mask id".into()))?;
        check_alpha(alpha)?;
        let vocab = Vocabulary::new(size, mask)?;

        let mut counts: BTreeMap<ContextKey, BTreeMap<TokenId, u64>> = BTreeMap::new();
        for (i, line) in lines {
            let n = i + 1;
            let parts: Vec<&str> = line.split('|').collect();
            if parts.len() != 3 {
                return Err(perr(n, "expected `left | right | token count`".into()));
            }
            let left = parse_ids(parts[0], order).map_err(|m| perr(n, m))?;
            let right = parse_ids(parts[1], order).map_err(|m| perr(n, m))?;
            let tail: Vec<&str> = parts[2].split_whitespace().collect();
            let [tok, count] = tail[..] else {
                return Err(perr(n, "expected `<token-id> <count>`".into()));
            };
            let tok: TokenId = tok.parse().map_err(|_| perr(n, format!("bad token id {tok:?}")))?;
            let count: u64 = count.parse().map_err(|_| perr(n, format!("bad count {count:?}")))?;
            if tok == mask || !vocab.contains(tok) {
                return Err(perr(n, format!("token {tok} is not a content token")));
            }
            if count == 0 {
                return Err(perr(n, "zero counts are not stored".into()));
            }
            let slot = counts.entry(ContextKey { left, right }).or_default();
            if slot.insert(tok, count).is_some() {
                return Err(perr(n, "duplicate record".into()));
            }
        }
        Ok(Self {
            order,
            alpha,
            vocab,
            counts,
        })
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::config("alpha", format!("must be positive and finite, got {alpha}")));
    }
    Ok(())
}

fn ids(ctx: &[Option<TokenId>]) -> String {
    ctx.iter()
        .map(|c| c.map_or_else(|| "_".to_string(), |v| v.to_string()))
        .collect::<Vec<_>>()
        .join(" ")
}

fn parse_ids(field: &str, order: usize) -> std::result::Result<Vec<Option<TokenId>>, String> {
    let ids = field
        .split_whitespace()
        .map(|s| match s {
            "_" => Ok(None),
            s => s.parse().map(Some).map_err(|_| format!("bad context id {s:?}")),
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    if ids.len() != order {
        return Err(format!("context has {} ids, order is {order}", ids.len()));
    }
    Ok(ids)
}

impl Denoiser for NGramDenoiser {
    fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    fn predict_logits(&self, seq: &TokenSequence, _t: usize) -> Result<LogitMatrix> {
        if seq.mask_id() != self.vocab.mask_id() || seq.tokens().iter().any(|&v| !self.vocab.contains(v)) {
            return Err(Error::ModelMismatch(
                "sequence does not match the model vocabulary".into(),
            ));
        }
        let tokens = seq.tokens();
        let mut values = Vec::with_capacity(tokens.len() * self.vocab.size());
        for pos in 0..tokens.len() {
            let key = ContextKey::at(tokens, pos, self.order, Some(self.vocab.mask_id()));
            values.extend(self.row_for(&key));
        }
        LogitMatrix::from_flat(values, tokens.len(), self.vocab.size(), self.vocab.mask_id())
    }
}
