//! Vocabulary, token sequences with a prompt/generation split, and answer regions.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type TokenId = u32;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    size: usize,
    mask_id: TokenId,
    token_names: Option<Vec<String>>,
}

impl Vocabulary {
    pub fn new(size: usize, mask_id: TokenId) -> Result<Self> {
        if size == 0 {
            return Err(Error::config("vocab_size", "must be positive"));
        }
        if mask_id as usize >= size {
            return Err(Error::config(
                "mask_id",
                format!("{mask_id} is outside a vocabulary of size {size}"),
            ));
        }
        Ok(Self {
            size,
            mask_id,
            token_names: None,
        })
    }

    /// Attaches printable names; there must be one unique name per id.
    pub fn with_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.size {
            return Err(Error::config(
                "token_names",
                format!("expected {} names, got {}", self.size, names.len()),
            ));
        }
        let unique: HashSet<&str> = names.iter().map(String::as_str).collect();
        if unique.len() != names.len() {
            return Err(Error::config("token_names", "names must be unique"));
        }
        self.token_names = Some(names);
        Ok(self)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn mask_id(&self) -> TokenId {
        self.mask_id
    }

    pub fn name(&self, id: TokenId) -> Option<&str> {
        self.token_names
            .as_ref()
            .and_then(|n| n.get(id as usize))
            .map(String::as_str)
    }

    pub fn id_of(&self, name: &str) -> Option<TokenId> {
        self.token_names
            .as_ref()?
            .iter()
            .position(|n| n == name)
            .map(|i| i as TokenId)
    }

    /// All ids except the mask, ascending.
    pub fn content_tokens(&self) -> impl Iterator<Item = TokenId> + '_ {
        (0..self.size as TokenId).filter(move |&v| v != self.mask_id)
    }

    pub fn contains(&self, id: TokenId) -> bool {
        (id as usize) < self.size
    }
}

/// A fixed-length token vector: `prompt_len` prompt tokens followed by
/// `gen_len` generation positions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TokenSequence {
    tokens: Vec<TokenId>,
    prompt_len: usize,
    mask_id: TokenId,
}

impl TokenSequence {
    /// Prompt followed by `gen_len` masks.
    pub fn new(prompt: &[TokenId], gen_len: usize, vocab: &Vocabulary) -> Result<Self> {
        if gen_len == 0 {
            return Err(Error::config("gen_len", "must be at least 1"));
        }
        if let Some(i) = prompt.iter().position(|&t| t == vocab.mask_id()) {
            return Err(Error::InvalidPrompt(format!(
                "prompt position {i} holds the mask id {}",
                vocab.mask_id()
            )));
        }
        if let Some(&t) = prompt.iter().find(|&&t| !vocab.contains(t)) {
            return Err(Error::InvalidPrompt(format!(
                "token {t} is outside a vocabulary of size {}",
                vocab.size()
            )));
        }
        let mut tokens = Vec::with_capacity(prompt.len() + gen_len);
        tokens.extend_from_slice(prompt);
        tokens.resize(prompt.len() + gen_len, vocab.mask_id());
        Ok(Self {
            tokens,
            prompt_len: prompt.len(),
            mask_id: vocab.mask_id(),
        })
    }

    /// Builds a sequence from explicit tokens, e.g. a clean sample for the
    /// forward process. The prompt must be mask-free.
    pub fn from_tokens(tokens: Vec<TokenId>, prompt_len: usize, vocab: &Vocabulary) -> Result<Self> {
        if prompt_len > tokens.len() {
            return Err(Error::InvalidInput(format!(
                "prompt_len {prompt_len} exceeds sequence length {}",
                tokens.len()
            )));
        }
        if tokens[..prompt_len].contains(&vocab.mask_id()) {
            return Err(Error::InvalidPrompt("prompt contains the mask id".into()));
        }
        if let Some(&t) = tokens.iter().find(|&&t| !vocab.contains(t)) {
            return Err(Error::InvalidInput(format!(
                "token {t} is outside a vocabulary of size {}",
                vocab.size()
            )));
        }
        Ok(Self {
            tokens,
            prompt_len,
            mask_id: vocab.mask_id(),
        })
    }

    pub fn tokens(&self) -> &[TokenId] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn prompt_len(&self) -> usize {
        self.prompt_len
    }

    pub fn gen_len(&self) -> usize {
        self.tokens.len() - self.prompt_len
    }

    pub fn mask_id(&self) -> TokenId {
        self.mask_id
    }

    pub fn generation_region(&self) -> AnswerRegion {
        AnswerRegion {
            start: self.prompt_len,
            end: self.tokens.len(),
        }
    }

    pub fn is_masked(&self, pos: usize) -> bool {
        self.tokens[pos] == self.mask_id
    }

    /// Indices holding the mask id, ascending.
    pub fn masked_positions(&self) -> Vec<usize> {
        self.tokens
            .iter()
            .enumerate()
            .filter_map(|(i, &t)| (t == self.mask_id).then_some(i))
            .collect()
    }

    pub fn masked_in(&self, start: usize, end: usize) -> Vec<usize> {
        (start..end).filter(|&i| self.is_masked(i)).collect()
    }

    /// Writes a token into a generation position.
    ///
    /// Panics if `pos` is a prompt position; callers only ever fill masks.
    pub(crate) fn set(&mut self, pos: usize, token: TokenId) {
        assert!(pos >= self.prompt_len, "prompt position {pos} is immutable");
        self.tokens[pos] = token;
    }
}

pub fn new_sequence(prompt: &[TokenId], gen_len: usize, vocab: &Vocabulary) -> Result<TokenSequence> {
    TokenSequence::new(prompt, gen_len, vocab)
}

pub fn masked_positions(seq: &TokenSequence) -> Vec<usize> {
    seq.masked_positions()
}

/// Half-open range `[start, end)` of absolute positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AnswerRegion {
    pub start: usize,
    pub end: usize,
}

impl AnswerRegion {
    pub fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, pos: usize) -> bool {
        (self.start..self.end).contains(&pos)
    }

    pub fn positions(&self) -> std::ops::Range<usize> {
        self.start..self.end
    }

    pub fn validate(&self, prompt_len: usize, total_len: usize) -> Result<()> {
        if !(prompt_len <= self.start && self.start < self.end && self.end <= total_len) {
            return Err(Error::config(
                "answer_region",
                format!(
                    "[{}, {}) must satisfy {prompt_len} <= start < end <= {total_len}",
                    self.start, self.end
                ),
            ));
        }
        Ok(())
    }
}
