//! `prophet train-toy`: fit an n-gram denoiser on a token-id corpus.

use std::path::PathBuf;

use clap::Args;
use prophet_dlm::models::NGramDenoiser;
use prophet_dlm::{TokenId, Vocabulary};

use crate::error::{CliError, CliResult};
use crate::manifest::write_file;

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    /// Whitespace-separated token ids, one sequence per line.
    #[arg(long)]
    pub corpus: PathBuf,
    /// Context tokens per side.
    #[arg(long, default_value_t = 1)]
    pub order: usize,
    /// Additive smoothing.
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long)]
    pub vocab_size: usize,
    #[arg(long, default_value_t = 0)]
    pub mask_id: TokenId,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn parse_corpus(text: &str) -> CliResult<Vec<Vec<TokenId>>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.split_whitespace()
                .map(|w| {
                    w.parse::<TokenId>()
                        .map_err(|_| CliError::Input(format!("corpus line {}: {w:?} is not a token id", i + 1)))
                })
                .collect()
        })
        .collect()
}

pub fn format_corpus(corpus: &[Vec<TokenId>]) -> String {
    let mut s = String::new();
    for seq in corpus {
        let words: Vec<String> = seq.iter().map(|t| t.to_string()).collect();
        s.push_str(&words.join(" "));
        s.push('\n');
    }
    s
}

/// Trains and writes the model; returns it for reporting.
pub fn train_file(a: &TrainArgs) -> CliResult<NGramDenoiser> {
    let vocab = Vocabulary::new(a.vocab_size, a.mask_id).map_err(|e| CliError::Config(e.to_string()))?;
    let text = std::fs::read_to_string(&a.corpus).map_err(|e| CliError::io(&a.corpus, e))?;
    let corpus = parse_corpus(&text)?;
    let model = NGramDenoiser::train(&corpus, a.order, a.alpha, &vocab)?;
    write_file(&a.out, model.to_text().as_bytes())?;
    Ok(model)
}

pub fn cmd_train(a: &TrainArgs) -> CliResult<()> {
    let model = train_file(a)?;
    println!("learned {} contexts", model.context_count());
    Ok(())
}
