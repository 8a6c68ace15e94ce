//! Per-example losses of the filter and their derivatives.
//!
//! The regression head distills the teacher score with squared error; the
//! classification head distills the thresholded decision `1(sigma > tau1)`
//! with binary cross-entropy. Both heads put a sigmoid on the linear score,
//! so the chain rule through `pred = sigmoid(z)` is shared.

use serde::{Deserialize, Serialize};

use super::features::SparseVector;

/// Clamp used by cross-entropy to keep `ln` finite.
pub const CE_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Head {
    Regression,
    Classification,
}

impl Head {
    pub fn as_str(self) -> &'static str {
        match self {
            Head::Regression => "regression",
            Head::Classification => "classification",
        }
    }

    /// `(loss, dloss/dpred)` for this head.
    pub fn loss(self, pred: f64, target: f64) -> (f64, f64) {
        match self {
            Head::Regression => loss_regression(pred, target),
            Head::Classification => loss_classification(pred, target),
        }
    }

    /// `(loss, dloss/dz)` where `pred = sigmoid(z)`.
    pub fn loss_wrt_logit(self, z: f64, target: f64) -> (f64, f64) {
        let pred = sigmoid(z);
        let (loss, dpred) = self.loss(pred, target);
        (loss, dpred * pred * (1.0 - pred))
    }
}

impl std::fmt::Display for Head {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Head {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "regression" => Ok(Head::Regression),
            "classification" => Ok(Head::Classification),
            other => Err(crate::Error::InvalidArgument(format!("unknown head {other:?}"))),
        }
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Squared error `(pred - target)^2` and its derivative `2 (pred - target)`.
pub fn loss_regression(pred: f64, target: f64) -> (f64, f64) {
    let d = pred - target;
    (d * d, 2.0 * d)
}

/// Binary cross-entropy with the prediction clamped to `[eps, 1 - eps]`.
pub fn loss_classification(pred: f64, label: f64) -> (f64, f64) {
    let p = pred.clamp(CE_EPSILON, 1.0 - CE_EPSILON);
    let loss = -(label * p.ln() + (1.0 - label) * (1.0 - p).ln());
    (loss, (p - label) / (p * (1.0 - p)))
}

fn example_loss(head: Head, x: &SparseVector, target: f64, weights: &[f64], bias: f64) -> f64 {
    head.loss_wrt_logit(x.dot(weights) + bias, target).0
}

/// Largest relative disagreement between the analytic gradient and a
/// central finite difference (step `1e-5`), over every weight touched by
/// `x` and the bias.
pub fn gradient_check(head: Head, x: &SparseVector, target: f64, weights: &[f64], bias: f64) -> f64 {
    const H: f64 = 1e-5;
    let z = x.dot(weights) + bias;
    let (_, dz) = head.loss_wrt_logit(z, target);

    let rel = |analytic: f64, numeric: f64| (analytic - numeric).abs() / numeric.abs().max(1e-8);

    let mut w = weights.to_vec();
    let mut worst: f64 = 0.0;
    for &(i, xi) in x.entries() {
        let i = i as usize;
        let orig = w[i];
        w[i] = orig + H;
        let up = example_loss(head, x, target, &w, bias);
        w[i] = orig - H;
        let down = example_loss(head, x, target, &w, bias);
        w[i] = orig;
        worst = worst.max(rel(dz * xi, (up - down) / (2.0 * H)));
    }
    let up = example_loss(head, x, target, &w, bias + H);
    let down = example_loss(head, x, target, &w, bias - H);
    worst.max(rel(dz, (up - down) / (2.0 * H)))
}
