//! Decoding configuration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sequence::AnswerRegion;

/// How positions are chosen for unmasking at each refinement step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RemaskStrategy {
    /// Uniformly random subset of the masked positions in the current block.
    Random,
    /// Highest softmax top-1 probability first; the rest stay masked.
    #[default]
    LowConfidence,
}

impl std::str::FromStr for RemaskStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(Self::Random),
            "low_conf" | "low_confidence" => Ok(Self::LowConfidence),
            other => Err(Error::config("remask_strategy", format!("unknown strategy {other:?}"))),
        }
    }
}

/// Staged early-commit thresholds (logit units) and progress breakpoints.
///
/// `+inf` is allowed for any stage and disables commits in that stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdParams {
    #[serde(with = "float_repr")]
    pub tau_high: f64,
    #[serde(with = "float_repr")]
    pub tau_mid: f64,
    #[serde(with = "float_repr")]
    pub tau_low: f64,
    pub p1: f64,
    pub p2: f64,
}

impl Default for ThresholdParams {
    fn default() -> Self {
        Self {
            tau_high: 8.0,
            tau_mid: 5.0,
            tau_low: 3.0,
            p1: 0.33,
            p2: 0.67,
        }
    }
}

impl ThresholdParams {
    /// Same threshold at every stage.
    pub fn uniform(tau: f64) -> Self {
        Self {
            tau_high: tau,
            tau_mid: tau,
            tau_low: tau,
            ..Self::default()
        }
    }

    /// Thresholds that can never be met.
    pub fn never() -> Self {
        Self::uniform(f64::INFINITY)
    }

    pub fn validate(&self) -> Result<()> {
        let taus = [self.tau_high, self.tau_mid, self.tau_low];
        if taus.iter().any(|t| t.is_nan()) {
            return Err(Error::config("tau", "thresholds must not be NaN"));
        }
        if !(self.tau_high >= self.tau_mid && self.tau_mid >= self.tau_low) {
            return Err(Error::config(
                "tau ordering",
                format!(
                    "need tau_high >= tau_mid >= tau_low, got {} / {} / {}",
                    self.tau_high, self.tau_mid, self.tau_low
                ),
            ));
        }
        if self.tau_low < 0.0 {
            return Err(Error::config("tau_low", "must be non-negative"));
        }
        if !(0.0 < self.p1 && self.p1 < self.p2 && self.p2 < 1.0) {
            return Err(Error::config(
                "breakpoints",
                format!("need 0 < p1 < p2 < 1, got ({}, {})", self.p1, self.p2),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodeConfig {
    pub t_max: usize,
    pub gen_len: usize,
    pub block_len: usize,
    pub remask_strategy: RemaskStrategy,
    pub prophet_enabled: bool,
    pub thresholds: ThresholdParams,
    /// `None` means the whole generation region.
    pub answer_region: Option<AnswerRegion>,
    pub seed: u64,
    pub record_top1: bool,
    /// 0 is greedy.
    pub temperature: f64,
}

impl Default for DecodeConfig {
    fn default() -> Self {
        Self {
            t_max: 50,
            gen_len: 256,
            block_len: 32,
            remask_strategy: RemaskStrategy::LowConfidence,
            prophet_enabled: false,
            thresholds: ThresholdParams::default(),
            answer_region: None,
            seed: 0,
            record_top1: false,
            temperature: 0.0,
        }
    }
}

impl DecodeConfig {
    /// Checks the field invariants; the error names the first violated one.
    pub fn validate(&self) -> Result<()> {
        if self.t_max < 1 {
            return Err(Error::config("t_max", "must be at least 1"));
        }
        if self.gen_len < 1 {
            return Err(Error::config("gen_len", "must be at least 1"));
        }
        if self.block_len < 1 || self.block_len > self.gen_len {
            return Err(Error::config(
                "block_len",
                format!("must be in 1..={}, got {}", self.gen_len, self.block_len),
            ));
        }
        if !self.gen_len.is_multiple_of(self.block_len) {
            return Err(Error::config(
                "block_len",
                format!("{} does not divide gen_len {}", self.block_len, self.gen_len),
            ));
        }
        self.thresholds.validate()?;
        if let Some(r) = self.answer_region {
            if r.start >= r.end {
                return Err(Error::config("answer_region", "start must be < end"));
            }
        }
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(Error::config("temperature", "must be a finite non-negative number"));
        }
        Ok(())
    }

    /// Validates against a concrete prompt length, resolving the default
    /// answer region.
    pub fn resolve_region(&self, prompt_len: usize) -> Result<AnswerRegion> {
        let total = prompt_len + self.gen_len;
        let region = self
            .answer_region
            .unwrap_or(AnswerRegion::new(prompt_len, total));
        region.validate(prompt_len, total)?;
        Ok(region)
    }

    pub fn block_count(&self) -> usize {
        self.gen_len / self.block_len
    }
}

pub fn validate_config(cfg: &DecodeConfig) -> Result<()> {
    cfg.validate()
}

/// Serializes non-finite floats as the strings `"inf"`, `"-inf"`, `"nan"`
/// so they survive JSON.
pub mod float_repr {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("not a float: {other:?}"))),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field_of(err: Error) -> String {
        match err {
            Error::InvalidConfig(m) => m.split(':').next().unwrap().to_string(),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn paper_configuration_is_valid() {
        let cfg = DecodeConfig {
            gen_len: 256,
            block_len: 32,
            t_max: 50,
            ..Default::default()
        };
        assert!(validate_config(&cfg).is_ok());
    }

    #[test]
    fn non_divisor_block_len() {
        let cfg = DecodeConfig {
            gen_len: 10,
            block_len: 3,
            ..Default::default()
        };
        assert_eq!(field_of(validate_config(&cfg).unwrap_err()), "block_len");
    }

    #[test]
    fn tau_ordering() {
        let mut cfg = DecodeConfig::default();
        cfg.thresholds.tau_high = 3.0;
        cfg.thresholds.tau_mid = 5.0;
        assert_eq!(field_of(validate_config(&cfg).unwrap_err()), "tau ordering");
    }

    #[test]
    fn breakpoints_and_t_max() {
        let mut cfg = DecodeConfig::default();
        cfg.thresholds.p1 = 0.7;
        assert_eq!(field_of(cfg.validate().unwrap_err()), "breakpoints");
        let cfg = DecodeConfig {
            t_max: 0,
            ..Default::default()
        };
        assert_eq!(field_of(cfg.validate().unwrap_err()), "t_max");
    }

    #[test]
    fn infinite_thresholds_are_valid_and_serialize() {
        let cfg = DecodeConfig {
            thresholds: ThresholdParams::never(),
            ..Default::default()
        };
        assert!(cfg.validate().is_ok());
        let json = serde_json::to_string(&cfg).unwrap();
        assert!(json.contains("\"inf\""));
        let back: DecodeConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn default_region_is_generation_region() {
        let cfg = DecodeConfig {
            gen_len: 8,
            block_len: 8,
            ..Default::default()
        };
        assert_eq!(cfg.resolve_region(3).unwrap(), AnswerRegion::new(3, 11));
        let bad = DecodeConfig {
            answer_region: Some(AnswerRegion::new(1, 4)),
            ..cfg
        };
        assert!(bad.resolve_region(3).is_err());
    }
}
