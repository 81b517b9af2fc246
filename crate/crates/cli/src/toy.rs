//! Synthetic patterned data for the toy experiment.
//!
//! Content tokens `1..vocab_size` follow a fixed successor map
//! `next(a) = (a - 1 + stride) mod K + 1`. Corpus sequences are successor
//! chains with sparse random substitutions; held-out prompts are clean chains
//! whose answer is the continuation a few tokens after the prompt.

use std::path::PathBuf;

use clap::Args;
use prophet_dlm::{rng, AnswerRegion, TokenId};
use rand::Rng;

use crate::dataset::format_instance;
use crate::error::{CliError, CliResult};
use crate::manifest::write_file;
use crate::train::format_corpus;

#[derive(Debug, Clone, PartialEq)]
pub struct ToySpec {
    /// Includes the mask token 0.
    pub vocab_size: usize,
    pub stride: usize,
    pub sequences: usize,
    pub min_len: usize,
    pub max_len: usize,
    /// Per-token substitution probability in the corpus.
    pub noise: f64,
    pub prompts: usize,
    pub min_prompt: usize,
    pub max_prompt: usize,
    pub gen_len: usize,
    /// Answer starts this many tokens into the generation.
    pub answer_offset: usize,
    pub answer_len: usize,
    pub seed: u64,
}

impl Default for ToySpec {
    fn default() -> Self {
        Self {
            vocab_size: 21,
            stride: 7,
            sequences: 5000,
            min_len: 8,
            max_len: 24,
            noise: 0.02,
            prompts: 200,
            min_prompt: 4,
            max_prompt: 8,
            gen_len: 16,
            answer_offset: 4,
            answer_len: 4,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToyInstance {
    pub prompt: Vec<TokenId>,
    pub answer: Vec<TokenId>,
    pub region: AnswerRegion,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToyData {
    pub corpus: Vec<Vec<TokenId>>,
    pub instances: Vec<ToyInstance>,
}

impl ToySpec {
    fn k(&self) -> TokenId {
        (self.vocab_size - 1) as TokenId
    }

    pub fn next(&self, a: TokenId) -> TokenId {
        (a - 1 + self.stride as TokenId) % self.k() + 1
    }

    fn chain<R: Rng>(&self, len: usize, rng: &mut R) -> Vec<TokenId> {
        let mut out = Vec::with_capacity(len);
        let mut cur = rng.random_range(1..=self.k());
        for _ in 0..len {
            out.push(cur);
            cur = self.next(cur);
        }
        out
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |m: &str| Err(CliError::Config(m.to_string()));
        if self.vocab_size < 3 {
            return bad("vocab_size: need at least two content tokens");
        }
        if self.min_len < 1 || self.min_len > self.max_len || self.min_prompt < 1 || self.min_prompt > self.max_prompt {
            return bad("length ranges must be non-empty and start at 1 or more");
        }
        if self.answer_offset + self.answer_len > self.gen_len || self.answer_len == 0 {
            return bad("answer must be non-empty and fit inside gen_len");
        }
        if !(0.0..=1.0).contains(&self.noise) {
            return bad("noise: must be a probability");
        }
        Ok(())
    }

    pub fn generate(&self) -> CliResult<ToyData> {
        self.validate()?;
        let mut r = rng::seeded(self.seed);
        let corpus = (0..self.sequences)
            .map(|_| {
                let len = r.random_range(self.min_len..=self.max_len);
                let mut seq = self.chain(len, &mut r);
                for tok in &mut seq {
                    if r.random_bool(self.noise) {
                        *tok = r.random_range(1..=self.k());
                    }
                }
                seq
            })
            .collect();
        let instances = (0..self.prompts)
            .map(|_| {
                let plen = r.random_range(self.min_prompt..=self.max_prompt);
                let full = self.chain(plen + self.gen_len, &mut r);
                let start = plen + self.answer_offset;
                let end = start + self.answer_len;
                ToyInstance {
                    prompt: full[..plen].to_vec(),
                    answer: full[start..end].to_vec(),
                    region: AnswerRegion::new(start, end),
                }
            })
            .collect();
        Ok(ToyData { corpus, instances })
    }
}

impl ToyData {
    pub fn dataset_text(&self) -> String {
        let mut s = String::new();
        for inst in &self.instances {
            s.push_str(&format_instance(&inst.prompt, &inst.answer, inst.region));
            s.push('\n');
        }
        s
    }
}

#[derive(Debug, Clone, Args)]
pub struct ToyArgs {
    #[arg(long)]
    pub corpus_out: PathBuf,
    #[arg(long)]
    pub dataset_out: PathBuf,
    #[arg(long, default_value_t = 5000)]
    pub sequences: usize,
    #[arg(long, default_value_t = 200)]
    pub prompts: usize,
    #[arg(long, default_value_t = 16)]
    pub gen_len: usize,
    #[arg(long, env = "PROPHET_SEED", default_value_t = 0)]
    pub seed: u64,
}

pub fn cmd_toy(a: &ToyArgs) -> CliResult<()> {
    let spec = ToySpec {
        sequences: a.sequences,
        prompts: a.prompts,
        gen_len: a.gen_len,
        seed: a.seed,
        ..Default::default()
    };
    let data = spec.generate()?;
    write_file(&a.corpus_out, format_corpus(&data.corpus).as_bytes())?;
    write_file(&a.dataset_out, data.dataset_text().as_bytes())?;
    eprintln!("{} corpus sequences, {} instances", data.corpus.len(), data.instances.len());
    Ok(())
}
