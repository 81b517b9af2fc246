use crate::error::{Error, Result};

/// Semi-autoregressive step plan.
///
/// Blocks are offsets into the generation region, left to right. Steps are
/// split evenly across blocks and, within a block, tokens are split evenly
/// across its steps; remainders go to the earliest entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockSchedule {
    pub blocks: Vec<(usize, usize)>,
    pub steps_per_block: Vec<usize>,
    pub unmask_counts: Vec<Vec<usize>>,
}

/// `total` split into `parts` near-equal pieces, larger pieces first.
fn even_split(total: usize, parts: usize) -> Vec<usize> {
    let (base, rem) = (total / parts, total % parts);
    (0..parts).map(|i| base + usize::from(i < rem)).collect()
}

pub fn build_schedule(gen_len: usize, block_len: usize, t_max: usize) -> Result<BlockSchedule> {
    if block_len == 0 || gen_len == 0 || !gen_len.is_multiple_of(block_len) {
        return Err(Error::config(
            "block_len",
            format!("{block_len} must be a positive divisor of gen_len {gen_len}"),
        ));
    }
    let n_blocks = gen_len / block_len;
    if t_max < n_blocks {
        return Err(Error::config(
            "t_max",
            format!("{t_max} steps cannot cover {n_blocks} blocks"),
        ));
    }
    let blocks = (0..n_blocks)
        .map(|b| (b * block_len, (b + 1) * block_len))
        .collect();
    let steps_per_block = even_split(t_max, n_blocks);
    let unmask_counts = steps_per_block
        .iter()
        .map(|&steps| even_split(block_len, steps))
        .collect();
    Ok(BlockSchedule {
        blocks,
        steps_per_block,
        unmask_counts,
    })
}

impl BlockSchedule {
    pub fn t_max(&self) -> usize {
        self.steps_per_block.iter().sum()
    }

    /// `(block index, tokens to unmask)` for each step, first step first
    /// (i.e. for `t = t_max, t_max - 1, ..., 1`).
    pub fn step_plan(&self) -> Vec<(usize, usize)> {
        self.unmask_counts
            .iter()
            .enumerate()
            .flat_map(|(b, counts)| counts.iter().map(move |&k| (b, k)))
            .collect()
    }
}
