#![allow(dead_code)]

use prophet_dlm::models::{LogitMatrix, ScriptedOracle};
use prophet_dlm::rng;
use prophet_dlm::{DecodeConfig, RemaskStrategy, TokenId, TokenSequence, Vocabulary};
use rand::Rng;

/// A random decoding problem over a scripted oracle.
pub struct Case {
    pub oracle: ScriptedOracle,
    pub seq0: TokenSequence,
    pub cfg: DecodeConfig,
}

/// Builds a random oracle with logits on a coarse grid (so ties occur) and a
/// valid config: gen_len <= 32, t_max <= 50.
pub fn random_case(seed: u64) -> Case {
    let mut r = rng::seeded(seed);
    let vocab_size = r.random_range(3..9usize);
    let mask = r.random_range(0..vocab_size) as TokenId;
    let vocab = Vocabulary::new(vocab_size, mask).unwrap();
    let content: Vec<TokenId> = vocab.content_tokens().collect();

    let prompt: Vec<TokenId> = (0..r.random_range(0..5))
        .map(|_| content[r.random_range(0..content.len())])
        .collect();
    let block_len = [1usize, 2, 3, 4, 5, 8, 16, 32][r.random_range(0..8)];
    let n_blocks = r.random_range(1..=32 / block_len);
    let gen_len = block_len * n_blocks;
    let t_max = r.random_range(n_blocks..=50);
    let n = prompt.len() + gen_len;

    let constant = r.random_bool(0.2);
    let first = random_matrix(&mut r, n, vocab_size, mask);
    let oracle = ScriptedOracle::from_fn(vocab.clone(), t_max, |_| {
        Ok(if constant {
            first.clone()
        } else {
            random_matrix(&mut r, n, vocab_size, mask)
        })
    })
    .unwrap();

    let mut cfg = DecodeConfig {
        t_max,
        gen_len,
        block_len,
        remask_strategy: if r.random_bool(0.5) {
            RemaskStrategy::Random
        } else {
            RemaskStrategy::LowConfidence
        },
        seed: r.random(),
        record_top1: true,
        ..Default::default()
    };
    if r.random_bool(0.3) {
        let start = prompt.len() + r.random_range(0..gen_len);
        let end = r.random_range(start + 1..=n);
        cfg.answer_region = Some(prophet_dlm::AnswerRegion::new(start, end));
    }
    let seq0 = TokenSequence::new(&prompt, gen_len, &vocab).unwrap();
    Case { oracle, seq0, cfg }
}

fn random_matrix<R: Rng>(r: &mut R, n: usize, v: usize, mask: TokenId) -> LogitMatrix {
    let values = (0..n * v)
        .map(|_| r.random_range(-6i32..=6) as f64 * 0.5)
        .collect();
    LogitMatrix::from_flat(values, n, v, mask).unwrap()
}
