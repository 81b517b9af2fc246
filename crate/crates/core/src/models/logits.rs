use crate::error::{Error, Result};
use crate::sequence::{TokenId, TokenSequence, Vocabulary};

/// Logit written into the mask column of every row. The most negative finite
/// value, so the mask token is never an argmax and contributes nothing to a
/// softmax.
pub const MASK_LOGIT: f64 = f64::MIN;

/// Row-major `n_positions x vocab_size` matrix of logits for one step.
#[derive(Debug, Clone, PartialEq)]
pub struct LogitMatrix {
    values: Vec<f64>,
    n_positions: usize,
    vocab_size: usize,
    mask_id: TokenId,
}

impl LogitMatrix {
    /// Builds a matrix from rows, overwriting the mask column with
    /// [`MASK_LOGIT`]. All other entries must be finite.
    pub fn from_rows(rows: Vec<Vec<f64>>, mask_id: TokenId) -> Result<Self> {
        let n_positions = rows.len();
        let vocab_size = rows.first().map_or(0, Vec::len);
        if (mask_id as usize) >= vocab_size && n_positions > 0 {
            return Err(Error::ModelMismatch(format!(
                "mask id {mask_id} outside rows of width {vocab_size}"
            )));
        }
        let mut values = Vec::with_capacity(n_positions * vocab_size);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != vocab_size {
                return Err(Error::ModelMismatch(format!(
                    "row {i} has {} entries, expected {vocab_size}",
                    row.len()
                )));
            }
            values.extend(row);
        }
        Self::from_flat(values, n_positions, vocab_size, mask_id)
    }

    pub fn from_flat(
        mut values: Vec<f64>,
        n_positions: usize,
        vocab_size: usize,
        mask_id: TokenId,
    ) -> Result<Self> {
        if values.len() != n_positions * vocab_size {
            return Err(Error::ModelMismatch(format!(
                "{} values for a {n_positions}x{vocab_size} matrix",
                values.len()
            )));
        }
        let m = mask_id as usize;
        for (i, row) in values.chunks_mut(vocab_size.max(1)).enumerate() {
            if let Some(v) = row.iter().enumerate().find(|&(j, v)| j != m && !v.is_finite()) {
                return Err(Error::ModelMismatch(format!(
                    "non-finite logit {} at position {i}, token {}",
                    v.1, v.0
                )));
            }
            if m < row.len() {
                row[m] = MASK_LOGIT;
            }
        }
        Ok(Self {
            values,
            n_positions,
            vocab_size,
            mask_id,
        })
    }

    /// Same row repeated for every position.
    pub fn broadcast(row: &[f64], n_positions: usize, mask_id: TokenId) -> Result<Self> {
        Self::from_rows(vec![row.to_vec(); n_positions], mask_id)
    }

    pub fn n_positions(&self) -> usize {
        self.n_positions
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn mask_id(&self) -> TokenId {
        self.mask_id
    }

    pub fn row(&self, pos: usize) -> &[f64] {
        &self.values[pos * self.vocab_size..(pos + 1) * self.vocab_size]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks(self.vocab_size)
    }

    pub fn check_shape(&self, seq: &TokenSequence, vocab: &Vocabulary) -> Result<()> {
        if self.n_positions != seq.len() || self.vocab_size != vocab.size() {
            return Err(Error::ModelMismatch(format!(
                "logits are {}x{}, sequence/vocabulary need {}x{}",
                self.n_positions,
                self.vocab_size,
                seq.len(),
                vocab.size()
            )));
        }
        if self.mask_id != vocab.mask_id() {
            return Err(Error::ModelMismatch("mask id differs from vocabulary".into()));
        }
        Ok(())
    }

    /// Argmax of a row; ties go to the lowest token id.
    pub fn argmax(&self, pos: usize) -> TokenId {
        argmax(self.row(pos))
    }

    pub fn argmax_all(&self) -> Vec<TokenId> {
        (0..self.n_positions).map(|i| self.argmax(i)).collect()
    }

    /// Softmax probability of the row's argmax token.
    pub fn top_probability(&self, pos: usize) -> f64 {
        let row = self.row(pos);
        let max = row[argmax(row) as usize];
        let z: f64 = row.iter().map(|&v| (v - max).exp()).sum();
        1.0 / z
    }

    /// Softmax of `row / temperature`.
    pub fn softmax(&self, pos: usize, temperature: f64) -> Vec<f64> {
        softmax(self.row(pos), temperature)
    }

    /// Adds `shift` to every non-mask entry.
    pub fn shifted(&self, shift: f64) -> Self {
        let m = self.mask_id as usize;
        let mut out = self.clone();
        for row in out.values.chunks_mut(self.vocab_size) {
            for (j, v) in row.iter_mut().enumerate() {
                if j != m {
                    *v += shift;
                }
            }
        }
        out
    }
}

pub(crate) fn argmax(row: &[f64]) -> TokenId {
    let mut best = 0;
    for (j, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = j;
        }
    }
    best as TokenId
}

pub(crate) fn softmax(row: &[f64], temperature: f64) -> Vec<f64> {
    let temp = if temperature > 0.0 { temperature } else { 1.0 };
    let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = row.iter().map(|&v| ((v - max) / temp).exp()).collect();
    let z: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / z).collect()
}
