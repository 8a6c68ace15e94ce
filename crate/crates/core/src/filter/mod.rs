//! The question-only student filter `F`.
//!
//! `F(q) = sigmoid(w . x(q) + b)` over hashed unigram/bigram features of the
//! question text. It is trained either to regress the teacher score or to
//! classify the teacher's answer/abstain decision at a fixed `tau1`; the
//! correctness and well-formedness strategies give the two baselines.

pub mod features;
pub mod loss;
pub mod model;
pub mod targets;
pub mod train;

pub use features::{featurize, tokenize, FeatureConfig, SparseVector};
pub use loss::{gradient_check, loss_classification, loss_regression, sigmoid, Head};
pub use model::{load_model, save_model, FilterModel};
pub use targets::{make_targets, TargetStrategy, Targets};
pub use train::{continue_training, train, train_sequential, train_with_report, TrainConfig, TrainReport};

use crate::dataset::Question;

/// Student score `F(q)`.
pub fn predict(model: &FilterModel, question: &Question) -> f64 {
    model.predict(question)
}
