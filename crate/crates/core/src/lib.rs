//! Question filters distilled from a QA system's answer confidence.
//!
//! A QA system answers a question only when its best candidate's score
//! `sigma` clears a threshold `tau1`. Everything spent on questions it ends
//! up abstaining on is wasted. This crate trains a cheap question-only
//! filter to predict that score, picks the filter's own threshold `tau2`
//! on a dev split, and reports what filtering costs in recall and saves in
//! compute.
//!
//! Modules, bottom up:
//!
//! - [`dataset`]: question records, JSON-Lines I/O, seeded splits
//! - [`synthetic`]: datasets labeled by a hidden, known teacher
//! - [`answer`]: the teacher pipeline (retrieve, split, answer)
//! - [`filter`]: features, losses, training and persistence of the filter
//! - [`metrics`]: precision/recall/F1, threshold sweeps, filter reports
//! - [`calibration`]: choosing `tau2` on a dev split
//! - [`cost`]: batch-count cost model of the filtered pipeline

pub mod answer;
pub mod calibration;
pub mod cost;
pub mod dataset;
pub mod error;
pub mod filter;
pub mod metrics;
pub mod synthetic;

pub use answer::{answer, retrieve, run_pipeline, score_candidate, split_sentences, teacher_score, Corpus, Decision, Teacher};
pub use calibration::{calibrate_filter, candidate_thresholds, optimal_tau2, CalibrationResult};
pub use cost::{cost_ratio, pipeline_cost, savings_pct, CostBreakdown, CostScenario};
pub use dataset::{load_dataset, split_dataset, write_dataset, CandidateSet, Dataset, Question, SplitFractions, SplitTag};
pub use error::{Error, Result};
pub use filter::{FeatureConfig, FilterModel, Head, TargetStrategy, TrainConfig};
pub use metrics::{compare, evaluate, joint_sweep, sweep, Curve, CurvePoint, FilterReport, PrReF1};
pub use synthetic::{generate_synthetic, SynthConfig, SyntheticTeacherParams};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/datasets.md")]
    mod datasets {}
    #[doc = include_str!("../../../book/src/teacher.md")]
    mod teacher {}
    #[doc = include_str!("../../../book/src/filter.md")]
    mod filter {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
    #[doc = include_str!("../../../book/src/calibration.md")]
    mod calibration {}
    #[doc = include_str!("../../../book/src/cost.md")]
    mod cost {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
