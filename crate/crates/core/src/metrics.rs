//! Precision, recall and F1 of an answering system.
//!
//! Precision is measured over the questions the system answers, recall over
//! all questions. When nothing is answered precision is undefined and is
//! carried as `None`; F1 is 0 in that case.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::answer::Decision;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrReF1 {
    pub precision: Option<f64>,
    pub recall: f64,
    pub f1: f64,
    pub answered: usize,
    pub correct_answered: usize,
    pub total: usize,
}

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

impl PrReF1 {
    pub fn from_counts(answered: usize, correct_answered: usize, total: usize) -> Result<Self> {
        if total == 0 {
            return Err(Error::Empty("evaluation set"));
        }
        if correct_answered > answered || answered > total {
            return Err(Error::InvalidArgument(format!(
                "inconsistent counts: {correct_answered} correct of {answered} answered of {total}"
            )));
        }
        let precision = (answered > 0).then(|| correct_answered as f64 / answered as f64);
        let recall = correct_answered as f64 / total as f64;
        let f1 = precision.map_or(0.0, |p| f1_score(p, recall));
        Ok(PrReF1 {
            precision,
            recall,
            f1,
            answered,
            correct_answered,
            total,
        })
    }
}

fn require_correct(d: &Decision) -> Result<bool> {
    d.correct.ok_or_else(|| Error::MissingField {
        id: d.question_id.clone(),
        field: "correct",
        context: "labeled evaluation".into(),
    })
}

/// Scores a list of answer decisions.
pub fn evaluate(decisions: &[Decision]) -> Result<PrReF1> {
    let mut answered = 0;
    let mut correct = 0;
    for d in decisions {
        if d.answered {
            answered += 1;
            if require_correct(d)? {
                correct += 1;
            }
        }
    }
    PrReF1::from_counts(answered, correct, decisions.len())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub tau: f64,
    pub metrics: PrReF1,
    /// Fraction of questions the filter discarded, for curves that involve
    /// a filter.
    pub filtered_fraction: Option<f64>,
}

/// Threshold sweep, sorted by ascending `tau`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub points: Vec<CurvePoint>,
}

pub const CURVE_CSV_HEADER: &str = "tau,precision,recall,f1,filtered_fraction";

impl Curve {
    /// CSV with six decimals; undefined values are empty cells.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CURVE_CSV_HEADER);
        out.push('\n');
        let cell = |v: Option<f64>| v.map(|v| format!("{v:.6}")).unwrap_or_default();
        for p in &self.points {
            let _ = writeln!(
                out,
                "{:.6},{},{:.6},{:.6},{}",
                p.tau,
                cell(p.metrics.precision),
                p.metrics.recall,
                p.metrics.f1,
                cell(p.filtered_fraction)
            );
        }
        out
    }
}

/// `points` evenly spaced thresholds covering `[0, 1]`.
pub fn uniform_grid(points: usize) -> Result<Vec<f64>> {
    if points < 2 {
        return Err(Error::InvalidArgument(format!("grid needs at least 2 points, got {points}")));
    }
    let last = (points - 1) as f64;
    Ok((0..points).map(|i| i as f64 / last).collect())
}

pub const DEFAULT_GRID_POINTS: usize = 1001;

fn check_taus(taus: &[f64]) -> Result<()> {
    if taus.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return Err(Error::InvalidArgument("thresholds must lie in [0,1]".into()));
    }
    if taus.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("thresholds must be sorted ascending".into()));
    }
    Ok(())
}

fn check_len(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::LengthMismatch { left: a, right: b });
    }
    Ok(())
}

fn count_point(correct: &[bool], answered: impl Iterator<Item = bool>) -> Result<PrReF1> {
    let (mut n, mut c) = (0, 0);
    for (ans, &ok) in answered.zip(correct) {
        if ans {
            n += 1;
            c += usize::from(ok);
        }
    }
    PrReF1::from_counts(n, c, correct.len())
}

/// Pr/Re/F1 of the answer model at each `tau` (answers when `sigma > tau`).
pub fn sweep(sigma: &[f64], correct: &[bool], taus: &[f64]) -> Result<Curve> {
    check_len(sigma.len(), correct.len())?;
    check_taus(taus)?;
    let points = taus
        .iter()
        .map(|&tau| {
            Ok(CurvePoint {
                tau,
                metrics: count_point(correct, sigma.iter().map(|&s| s > tau))?,
                filtered_fraction: None,
            })
        })
        .collect::<Result<_>>()?;
    Ok(Curve { points })
}

/// Filter and answer model sharing a single threshold: a question is
/// answered when `F(q) > tau` and `sigma > tau`.
pub fn joint_sweep(f_scores: &[f64], sigma: &[f64], correct: &[bool], taus: &[f64]) -> Result<Curve> {
    check_len(f_scores.len(), sigma.len())?;
    check_len(sigma.len(), correct.len())?;
    check_taus(taus)?;
    let points = taus
        .iter()
        .map(|&tau| {
            let answered = f_scores.iter().zip(sigma).map(|(&f, &s)| f > tau && s > tau);
            Ok(CurvePoint {
                tau,
                metrics: count_point(correct, answered)?,
                filtered_fraction: Some(filtered_fraction(f_scores, tau)),
            })
        })
        .collect::<Result<_>>()?;
    Ok(Curve { points })
}

/// Fraction of questions with `F(q) <= tau`.
pub fn filtered_fraction(f_scores: &[f64], tau: f64) -> f64 {
    if f_scores.is_empty() {
        return 0.0;
    }
    f_scores.iter().filter(|&&f| f <= tau).count() as f64 / f_scores.len() as f64
}

/// The answer model at `tau1` with and without the filter at `tau2` in
/// front of it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterReport {
    pub tau1: f64,
    pub tau2: f64,
    /// Percentage of questions discarded before the answer model runs.
    pub pct_filter: f64,
    /// Absent when either system answers nothing.
    pub delta_pr: Option<f64>,
    pub delta_re: f64,
    pub delta_f1: f64,
    pub base: PrReF1,
    pub filtered: PrReF1,
}

/// Applies the filter: answered questions stay answered only if
/// `F(q) > tau2`.
pub fn apply_filter(decisions: &[Decision], f_scores: &[f64], tau2: f64) -> Result<Vec<Decision>> {
    check_len(decisions.len(), f_scores.len())?;
    Ok(decisions
        .iter()
        .zip(f_scores)
        .map(|(d, &f)| Decision {
            answered: d.answered && f > tau2,
            ..d.clone()
        })
        .collect())
}

/// Compares `M<tau1>` with `F<tau2> -> M<tau1>`. The answered flags are
/// recomputed from each decision's `sigma`.
pub fn compare(decisions: &[Decision], f_scores: &[f64], tau1: f64, tau2: f64) -> Result<FilterReport> {
    for (name, t) in [("tau1", tau1), ("tau2", tau2)] {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidArgument(format!("{name} must lie in [0,1], got {t}")));
        }
    }
    let at_tau1: Vec<Decision> = decisions.iter().map(|d| d.at_threshold(tau1)).collect();
    let filtered_decisions = apply_filter(&at_tau1, f_scores, tau2)?;
    let base = evaluate(&at_tau1)?;
    let filtered = evaluate(&filtered_decisions)?;
    let delta_pr = match (base.precision, filtered.precision) {
        (Some(b), Some(f)) => Some(f - b),
        _ => None,
    };
    Ok(FilterReport {
        tau1,
        tau2,
        pct_filter: 100.0 * filtered_fraction(f_scores, tau2),
        delta_pr,
        delta_re: filtered.recall - base.recall,
        delta_f1: filtered.f1 - base.f1,
        base,
        filtered,
    })
}
