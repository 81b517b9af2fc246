use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::models::LogitMatrix;

fn check_k(k: usize, available: usize) -> Result<()> {
    if k > available {
        return Err(Error::InvalidUnmaskCount { k, available });
    }
    Ok(())
}

/// Uniformly random `k`-subset of `masked_in_block`, returned ascending.
pub fn remask_random<R: Rng + ?Sized>(masked_in_block: &[usize], k: usize, rng: &mut R) -> Result<Vec<usize>> {
    check_k(k, masked_in_block.len())?;
    let mut picked: Vec<usize> = index::sample(rng, masked_in_block.len(), k)
        .into_iter()
        .map(|i| masked_in_block[i])
        .collect();
    picked.sort_unstable();
    Ok(picked)
}

/// The `k` positions with the highest softmax top-1 probability, ties to the
/// lowest position; returned ascending. Everything else stays masked.
pub fn remask_low_confidence(logits: &LogitMatrix, masked_in_block: &[usize], k: usize) -> Result<Vec<usize>> {
    check_k(k, masked_in_block.len())?;
    let mut ranked: Vec<(f64, usize)> = masked_in_block
        .iter()
        .map(|&pos| (logits.top_probability(pos), pos))
        .collect();
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut picked: Vec<usize> = ranked.into_iter().take(k).map(|(_, pos)| pos).collect();
    picked.sort_unstable();
    Ok(picked)
}
