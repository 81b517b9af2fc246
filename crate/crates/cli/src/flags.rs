//! Decoding flags shared by `decode` and `compare`.

use clap::{Args, ValueEnum};
use prophet_dlm::{AnswerRegion, DecodeConfig, RemaskStrategy, ThresholdParams, TokenId};

use crate::ids::parse_ids;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IdList(pub Vec<TokenId>);

pub fn id_list(s: &str) -> Result<IdList, String> {
    parse_ids(s).map(IdList)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Remask {
    Random,
    #[value(name = "low_conf", alias = "low_confidence")]
    LowConf,
}

impl From<Remask> for RemaskStrategy {
    fn from(r: Remask) -> Self {
        match r {
            Remask::Random => RemaskStrategy::Random,
            Remask::LowConf => RemaskStrategy::LowConfidence,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OnOff {
    On,
    Off,
}

#[derive(Debug, Clone, Args)]
pub struct DecodeFlags {
    /// Generation length in tokens.
    #[arg(long)]
    pub gen_len: Option<usize>,
    /// Step budget T_max.
    #[arg(long, default_value_t = 50)]
    pub steps: usize,
    /// Semi-autoregressive block length; defaults to the generation length.
    #[arg(long)]
    pub block_len: Option<usize>,
    #[arg(long, value_enum, default_value = "low_conf")]
    pub remask: Remask,
    #[arg(long, default_value_t = 8.0)]
    pub tau_high: f64,
    #[arg(long, default_value_t = 5.0)]
    pub tau_mid: f64,
    #[arg(long, default_value_t = 3.0)]
    pub tau_low: f64,
    #[arg(long, default_value_t = 0.33)]
    pub p1: f64,
    #[arg(long, default_value_t = 0.67)]
    pub p2: f64,
    #[arg(long, env = "PROPHET_SEED", default_value_t = 0)]
    pub seed: u64,
    /// 0 decodes greedily.
    #[arg(long, default_value_t = 0.0)]
    pub temperature: f64,
}

impl DecodeFlags {
    pub fn thresholds(&self) -> ThresholdParams {
        ThresholdParams {
            tau_high: self.tau_high,
            tau_mid: self.tau_mid,
            tau_low: self.tau_low,
            p1: self.p1,
            p2: self.p2,
        }
    }

    pub fn config(&self, gen_len: usize, prophet: bool, region: Option<AnswerRegion>, record_top1: bool) -> DecodeConfig {
        DecodeConfig {
            t_max: self.steps,
            gen_len,
            block_len: self.block_len.unwrap_or(gen_len),
            remask_strategy: self.remask.into(),
            prophet_enabled: prophet,
            thresholds: self.thresholds(),
            answer_region: region,
            seed: self.seed,
            record_top1,
            temperature: self.temperature,
        }
    }
}
