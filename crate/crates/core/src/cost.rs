//! Batch-count cost of the QA pipeline with and without the filter.
//!
//! Costs are in answer-model batches. Transformer latency grows roughly
//! with the square of the sequence length, so one filter batch at length
//! `seq_len_f` costs `(seq_len_f / seq_len_m)^2` of an answer-model batch.
//! The filter scores every question; the answer model only scores the
//! candidates of questions the filter lets through. Retrieval is not
//! counted, so real savings are larger.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostScenario {
    pub n_questions: u64,
    pub candidates_per_question: u64,
    pub batch_size: u64,
    pub seq_len_m: u64,
    pub seq_len_f: u64,
    /// Fraction of questions the filter discards.
    pub filter_fraction: f64,
}

impl CostScenario {
    pub fn validate(&self) -> Result<()> {
        if self.n_questions == 0
            || self.candidates_per_question == 0
            || self.batch_size == 0
            || self.seq_len_m == 0
            || self.seq_len_f == 0
        {
            return Err(Error::InvalidArgument("cost scenario counts and lengths must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.filter_fraction) {
            return Err(Error::InvalidArgument(format!(
                "filter fraction must lie in [0,1], got {}",
                self.filter_fraction
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub baseline_m_batches: u64,
    pub filtered_m_batches: u64,
    pub f_batches: u64,
    pub cost_ratio: f64,
    /// In answer-model batches.
    pub baseline_cost: f64,
    pub filtered_cost: f64,
    pub savings_pct: f64,
}

/// How many filter batches fit in the time of one answer-model batch.
pub fn cost_ratio(seq_len_m: u64, seq_len_f: u64) -> f64 {
    let r = seq_len_m as f64 / seq_len_f as f64;
    r * r
}

// Partial batches cost a whole batch. The slack absorbs float error in
// products such as n * (1 - phi).
fn batches(items: f64, batch_size: u64) -> u64 {
    (items / batch_size as f64 - 1e-9).ceil().max(0.0) as u64
}

pub fn pipeline_cost(s: &CostScenario) -> Result<CostBreakdown> {
    s.validate()?;
    let n = s.n_questions as f64;
    let c = s.candidates_per_question as f64;
    let baseline_m_batches = batches(n * c, s.batch_size);
    let filtered_m_batches = batches(n * (1.0 - s.filter_fraction) * c, s.batch_size);
    let f_batches = batches(n, s.batch_size);
    let ratio = cost_ratio(s.seq_len_m, s.seq_len_f);
    let baseline_cost = baseline_m_batches as f64;
    let filtered_cost = filtered_m_batches as f64 + f_batches as f64 / ratio;
    Ok(CostBreakdown {
        baseline_m_batches,
        filtered_m_batches,
        f_batches,
        cost_ratio: ratio,
        baseline_cost,
        filtered_cost,
        savings_pct: 100.0 * (baseline_cost - filtered_cost) / baseline_cost,
    })
}

/// Percentage of answer-model time saved by filtering.
pub fn savings_pct(s: &CostScenario) -> Result<f64> {
    pipeline_cost(s).map(|c| c.savings_pct)
}
