//! Choosing the filter threshold `tau2`.
//!
//! On a dev split, the filter at `tau2` is scored as a binary classifier of
//! the teacher's answer/abstain decision at `tau1`, with "answer" as the
//! positive class. The F1 of that classifier only changes when `tau2`
//! crosses a filter score, so checking one threshold per gap between
//! consecutive distinct scores (plus 0 and 1) finds the maximum over all of
//! `[0, 1]`.

use serde::{Deserialize, Serialize};

use crate::answer::Decision;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::filter::FilterModel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    /// Answer-model threshold the flags were derived from, when known.
    pub tau1: Option<f64>,
    pub tau2_star: f64,
    pub dev_agreement_f1: f64,
    pub candidates_examined: usize,
}

/// `0.0`, `1.0` and the midpoints between consecutive distinct scores,
/// ascending and deduplicated.
pub fn candidate_thresholds(f_scores: &[f64]) -> Result<Vec<f64>> {
    if f_scores.is_empty() {
        return Err(Error::Empty("filter scores"));
    }
    let mut sorted = f_scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    let mut out = vec![0.0, 1.0];
    out.extend(sorted.windows(2).map(|w| w[0] + (w[1] - w[0]) / 2.0).filter(|t| (0.0..=1.0).contains(t)));
    out.sort_by(f64::total_cmp);
    out.dedup();
    Ok(out)
}

fn f1_from_counts(tp: usize, fp: usize, fn_: usize) -> f64 {
    if tp == 0 {
        return 0.0;
    }
    let p = tp as f64 / (tp + fp) as f64;
    let r = tp as f64 / (tp + fn_) as f64;
    2.0 * p * r / (p + r)
}

/// Agreement F1 of `F(q) > tau2` against the teacher's answer flags.
pub fn agreement_f1(f_scores: &[f64], answer_flags: &[bool], tau2: f64) -> Result<f64> {
    if f_scores.len() != answer_flags.len() {
        return Err(Error::LengthMismatch {
            left: f_scores.len(),
            right: answer_flags.len(),
        });
    }
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for (&f, &flag) in f_scores.iter().zip(answer_flags) {
        match (f > tau2, flag) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    Ok(f1_from_counts(tp, fp, fn_))
}

/// The smallest candidate threshold with maximal agreement F1.
pub fn optimal_tau2(f_scores: &[f64], answer_flags: &[bool]) -> Result<CalibrationResult> {
    if f_scores.len() != answer_flags.len() {
        return Err(Error::LengthMismatch {
            left: f_scores.len(),
            right: answer_flags.len(),
        });
    }
    let candidates = candidate_thresholds(f_scores)?;

    let mut pairs: Vec<(f64, bool)> = f_scores.iter().copied().zip(answer_flags.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total_pos = answer_flags.iter().filter(|&&f| f).count();
    let total_neg = answer_flags.len() - total_pos;

    // Walk thresholds upward; everything at or below the threshold is
    // filtered out.
    let (mut below, mut pos_below) = (0, 0);
    let mut best: Option<(f64, f64)> = None;
    for &tau in &candidates {
        while below < pairs.len() && pairs[below].0 <= tau {
            pos_below += usize::from(pairs[below].1);
            below += 1;
        }
        let neg_below = below - pos_below;
        let f1 = f1_from_counts(total_pos - pos_below, total_neg - neg_below, pos_below);
        if best.is_none_or(|(_, b)| f1 > b) {
            best = Some((tau, f1));
        }
    }
    let (tau2_star, dev_agreement_f1) = best.expect("candidate set is never empty");
    Ok(CalibrationResult {
        tau1: None,
        tau2_star,
        dev_agreement_f1,
        candidates_examined: candidates.len(),
    })
}

/// Picks `tau2` for `model` against the teacher at `tau1`. The decisions
/// only need to carry `sigma`; answer flags are recomputed as
/// `sigma > tau1`.
pub fn calibrate_filter(model: &FilterModel, dev: &Dataset, dev_decisions: &[Decision], tau1: f64) -> Result<CalibrationResult> {
    if !(0.0..=1.0).contains(&tau1) {
        return Err(Error::InvalidArgument(format!("tau1 must lie in [0,1], got {tau1}")));
    }
    if dev.len() != dev_decisions.len() {
        return Err(Error::LengthMismatch {
            left: dev.len(),
            right: dev_decisions.len(),
        });
    }
    if let Some((q, d)) = dev.iter().zip(dev_decisions).find(|(q, d)| q.id != d.question_id) {
        return Err(Error::InvalidArgument(format!(
            "decision for {:?} is not aligned with question {:?}",
            d.question_id, q.id
        )));
    }
    let f_scores = model.predict_all(dev);
    let flags: Vec<bool> = dev_decisions.iter().map(|d| d.sigma > tau1).collect();
    let mut result = optimal_tau2(&f_scores, &flags)?;
    result.tau1 = Some(tau1);
    Ok(result)
}
