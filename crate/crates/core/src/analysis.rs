//! Measurements over decode traces: when the answer first appears among the
//! top-1 predictions, how predictions evolve per position, and how early
//! commit compares with full decoding.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sequence::{AnswerRegion, TokenId, TokenSequence};
use crate::trace::DecodeTrace;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStats {
    /// `(t_max - t_first + 1) / t_max`, where `t_first` is the first step whose
    /// region top-1 equals the answer.
    pub first_match_fraction: f64,
    /// Same measure for the step from which the region top-1 never changes.
    pub stable_from_fraction: f64,
    pub first_match_step: usize,
    pub stable_from_step: usize,
    pub matched: bool,
}

fn region_top1(top1: &[TokenId], region: AnswerRegion) -> Result<&[TokenId]> {
    top1.get(region.start..region.end).ok_or_else(|| {
        Error::InvalidInput(format!(
            "region [{}, {}) exceeds a {}-token record",
            region.start,
            region.end,
            top1.len()
        ))
    })
}

/// Convergence fractions of one trace. Only defined when the final output
/// contains the answer; otherwise [`Error::NotApplicable`].
///
/// Fractions use `t_max` as denominator, so early-commit traces and full
/// traces are on the same scale.
pub fn first_match_step(trace: &DecodeTrace, answer: &[TokenId], region: AnswerRegion) -> Result<ConvergenceStats> {
    if !trace.has_top1() {
        return Err(Error::MissingTop1);
    }
    if answer.len() != region.len() {
        return Err(Error::InvalidInput(format!(
            "answer has {} tokens, region spans {}",
            answer.len(),
            region.len()
        )));
    }
    let views = trace
        .steps
        .iter()
        .map(|s| region_top1(s.top1.as_deref().unwrap_or_default(), region))
        .collect::<Result<Vec<_>>>()?;
    let last = *views.last().expect("has_top1 implies at least one step");
    if last != answer {
        return Err(Error::NotApplicable("final output does not contain the answer".into()));
    }
    let first = views.iter().position(|v| *v == answer).expect("the last step matches");
    let stable = views
        .iter()
        .rposition(|v| *v != last)
        .map_or(0, |i| i + 1);
    let fraction = |idx: usize| {
        let t = trace.steps[idx].t;
        (trace.t_max - t + 1) as f64 / trace.t_max as f64
    };
    Ok(ConvergenceStats {
        first_match_fraction: fraction(first),
        stable_from_fraction: fraction(stable),
        first_match_step: trace.steps[first].t,
        stable_from_step: trace.steps[stable].t,
        matched: true,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceHistogram {
    pub bins: Vec<HistogramBin>,
    pub n: usize,
    /// Exact share of inputs `<= 0.5`.
    pub frac_le_50: f64,
    /// Exact share of inputs `<= 0.7`.
    pub frac_le_70: f64,
}

impl ConvergenceHistogram {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_lo,bin_hi,count\n");
        for b in &self.bins {
            let _ = writeln!(out, "{},{},{}", b.lo, b.hi, b.count);
        }
        out
    }
}

/// Equal-width histogram over `(0, 1]`; bin `k` covers `(k/B, (k+1)/B]`.
pub fn convergence_histogram(fractions: &[f64], bin_count: usize) -> Result<ConvergenceHistogram> {
    if fractions.is_empty() {
        return Err(Error::EmptyInput);
    }
    if bin_count == 0 {
        return Err(Error::InvalidInput("bin count must be positive".into()));
    }
    if let Some(bad) = fractions.iter().find(|&&f| !(f > 0.0 && f <= 1.0)) {
        return Err(Error::InvalidInput(format!("fraction {bad} outside (0, 1]")));
    }
    let b = bin_count as f64;
    let mut bins: Vec<HistogramBin> = (0..bin_count)
        .map(|k| HistogramBin {
            lo: k as f64 / b,
            hi: (k + 1) as f64 / b,
            count: 0,
        })
        .collect();
    for &f in fractions {
        let mut k = ((f * b).ceil() as usize).clamp(1, bin_count) - 1;
        // products like 0.4 * 10 may round up past an exact boundary
        while k > 0 && f <= bins[k].lo {
            k -= 1;
        }
        while k + 1 < bin_count && f > bins[k].hi {
            k += 1;
        }
        bins[k].count += 1;
    }
    let n = fractions.len();
    let share = |cut: f64| fractions.iter().filter(|&&f| f <= cut).count() as f64 / n as f64;
    Ok(ConvergenceHistogram {
        bins,
        n,
        frac_le_50: share(0.5),
        frac_le_70: share(0.7),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DynamicsClass {
    Unchanged,
    Changed,
    Decoded,
}

impl DynamicsClass {
    pub fn code(self) -> char {
        match self {
            DynamicsClass::Unchanged => 'U',
            DynamicsClass::Changed => 'C',
            DynamicsClass::Decoded => 'D',
        }
    }
}

/// Per-position, per-step classification of top-1 behaviour. Rows are the
/// positions decoded during the trace, columns the trace's steps in order.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsMatrix {
    pub positions: Vec<usize>,
    pub steps: Vec<usize>,
    pub cells: Vec<Vec<DynamicsClass>>,
}

impl DynamicsMatrix {
    pub fn get(&self, row: usize, col: usize) -> DynamicsClass {
        self.cells[row][col]
    }

    pub fn count(&self, class: DynamicsClass) -> usize {
        self.cells.iter().flatten().filter(|&&c| c == class).count()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("position,step,class\n");
        for (row, &pos) in self.positions.iter().enumerate() {
            for (col, &t) in self.steps.iter().enumerate() {
                let _ = writeln!(out, "{pos},{t},{}", self.cells[row][col].code());
            }
        }
        out
    }
}

pub fn dynamics_matrix(trace: &DecodeTrace) -> Result<DynamicsMatrix> {
    if !trace.has_top1() {
        return Err(Error::MissingTop1);
    }
    let mut positions: Vec<usize> = trace
        .steps
        .iter()
        .flat_map(|s| s.unmasked_positions.iter().copied())
        .collect();
    positions.sort_unstable();
    positions.dedup();

    let top1: Vec<&[TokenId]> = trace.steps.iter().map(|s| s.top1.as_deref().unwrap_or_default()).collect();
    let width = top1[0].len();
    if top1.iter().any(|r| r.len() != width) || positions.last().is_some_and(|&p| p >= width) {
        return Err(Error::InvalidInput("top-1 records have inconsistent lengths".into()));
    }

    let cells = positions
        .iter()
        .map(|&pos| {
            trace
                .steps
                .iter()
                .enumerate()
                .map(|(col, step)| {
                    if step.unmasked_positions.binary_search(&pos).is_ok() {
                        DynamicsClass::Decoded
                    } else if col > 0 && top1[col][pos] != top1[col - 1][pos] {
                        DynamicsClass::Changed
                    } else {
                        DynamicsClass::Unchanged
                    }
                })
                .collect()
        })
        .collect();
    Ok(DynamicsMatrix {
        positions,
        steps: trace.steps.iter().map(|s| s.t).collect(),
        cells,
    })
}

pub fn speedup(full_steps: usize, used_steps: usize) -> Result<f64> {
    if used_steps == 0 {
        return Err(Error::InvalidInput("used_steps must be at least 1".into()));
    }
    Ok(full_steps as f64 / used_steps as f64)
}

/// Rounds to two decimals, the precision speedups are reported at.
pub fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

/// `"(2.34×)"`.
pub fn format_speedup(x: f64) -> String {
    format!("({x:.2}×)")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Agreement {
    pub exact: bool,
    pub token_match_fraction: f64,
}

/// Compares two outputs over the answer region.
pub fn agreement(full_out: &TokenSequence, prophet_out: &TokenSequence, region: AnswerRegion) -> Result<Agreement> {
    if full_out.len() != prophet_out.len() {
        return Err(Error::InvalidInput(format!(
            "outputs have lengths {} and {}",
            full_out.len(),
            prophet_out.len()
        )));
    }
    if region.is_empty() || region.end > full_out.len() {
        return Err(Error::InvalidInput("answer region outside the outputs".into()));
    }
    let a = &full_out.tokens()[region.start..region.end];
    let b = &prophet_out.tokens()[region.start..region.end];
    let matching = a.iter().zip(b).filter(|(x, y)| x == y).count();
    Ok(Agreement {
        exact: matching == region.len(),
        token_match_fraction: matching as f64 / region.len() as f64,
    })
}
