use serde::{Deserialize, Serialize};

use super::loss::Head;
use crate::answer::Decision;
use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// What the filter is trained to predict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TargetStrategy {
    /// The teacher score `sigma` itself.
    DistillRegression,
    /// Whether the teacher answers at `tau1`: `1(sigma > tau1)`.
    DistillClassification { tau1: f64 },
    /// Whether the teacher's answer is correct.
    Correctness,
    /// Human well-formedness score of the question.
    Wellformed,
}

impl TargetStrategy {
    pub fn name(&self) -> &'static str {
        match self {
            TargetStrategy::DistillRegression => "distill-regression",
            TargetStrategy::DistillClassification { .. } => "distill-classification",
            TargetStrategy::Correctness => "correctness",
            TargetStrategy::Wellformed => "wellformed",
        }
    }

    /// Head used when none is chosen explicitly.
    pub fn default_head(&self) -> Head {
        match self {
            TargetStrategy::DistillRegression | TargetStrategy::Wellformed => Head::Regression,
            TargetStrategy::DistillClassification { .. } | TargetStrategy::Correctness => Head::Classification,
        }
    }

    pub fn tau1(&self) -> Option<f64> {
        match *self {
            TargetStrategy::DistillClassification { tau1 } => Some(tau1),
            _ => None,
        }
    }

    fn needs_decisions(&self) -> bool {
        !matches!(self, TargetStrategy::Wellformed)
    }
}

/// Training targets, one per question, in dataset order.
#[derive(Debug, Clone, PartialEq)]
pub struct Targets {
    pub strategy: TargetStrategy,
    pub entries: Vec<(String, f64)>,
}

impl Targets {
    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|(_, v)| *v)
    }

    pub fn is_binary(&self) -> bool {
        self.values().all(|v| v == 0.0 || v == 1.0)
    }
}

/// Builds targets for `strategy`. `decisions` must be aligned with `ds`
/// unless the strategy is [`TargetStrategy::Wellformed`], which ignores them.
pub fn make_targets(ds: &Dataset, decisions: &[Decision], strategy: TargetStrategy) -> Result<Targets> {
    if let Some(t) = strategy.tau1() {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidArgument(format!("tau1 must lie in [0,1], got {t}")));
        }
    }
    if strategy.needs_decisions() {
        if decisions.len() != ds.len() {
            return Err(Error::LengthMismatch {
                left: ds.len(),
                right: decisions.len(),
            });
        }
        if let Some((q, d)) = ds.iter().zip(decisions).find(|(q, d)| q.id != d.question_id) {
            return Err(Error::InvalidArgument(format!(
                "decision for {:?} is not aligned with question {:?}",
                d.question_id, q.id
            )));
        }
    }

    let missing = |id: &str, field| Error::MissingField {
        id: id.to_owned(),
        field,
        context: format!("strategy {}", strategy.name()),
    };

    let mut entries = Vec::with_capacity(ds.len());
    for (i, q) in ds.iter().enumerate() {
        let value = match strategy {
            TargetStrategy::DistillRegression => decisions[i].sigma,
            TargetStrategy::DistillClassification { tau1 } => f64::from(u8::from(decisions[i].sigma > tau1)),
            TargetStrategy::Correctness => {
                let c = decisions[i].correct.or(q.correct).ok_or_else(|| missing(&q.id, "correct"))?;
                f64::from(u8::from(c))
            }
            TargetStrategy::Wellformed => q.wellformed.ok_or_else(|| missing(&q.id, "wellformed"))?,
        };
        entries.push((q.id.clone(), value));
    }
    Ok(Targets { strategy, entries })
}
