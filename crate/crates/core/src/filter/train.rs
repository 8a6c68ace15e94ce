//! Seeded mini-batch SGD with linear warm-up.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::features::{featurize, FeatureConfig, SparseVector};
use super::loss::Head;
use super::model::FilterModel;
use super::targets::Targets;
use crate::dataset::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: u32,
    pub batch_size: usize,
    /// Fraction of all steps spent ramping the learning rate up from zero.
    pub warmup_fraction: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: DEFAULT_LEARNING_RATE,
            epochs: 3,
            batch_size: 128,
            warmup_fraction: 0.05,
        }
    }
}

/// Features are unit-norm and a default run is only a few dozen steps, so
/// the step size has to be large for the weights to move appreciably.
pub const DEFAULT_LEARNING_RATE: f64 = 10.0;

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "learning rate must be finite and >= 0, got {}",
                self.learning_rate
            )));
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::InvalidArgument("epochs and batch size must be >= 1".into()));
        }
        if !(0.0..1.0).contains(&self.warmup_fraction) {
            return Err(Error::InvalidArgument(format!(
                "warmup fraction must lie in [0,1), got {}",
                self.warmup_fraction
            )));
        }
        Ok(())
    }
}

/// Per-epoch mean training loss, measured over the full dataset after
/// each epoch.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainReport {
    pub epoch_losses: Vec<f64>,
}

impl TrainReport {
    pub fn final_loss(&self) -> Option<f64> {
        self.epoch_losses.last().copied()
    }
}

struct Examples {
    xs: Vec<SparseVector>,
    ys: Vec<f64>,
}

fn prepare(ds: &Dataset, targets: &Targets, head: Head, features: &FeatureConfig) -> Result<Examples> {
    if ds.is_empty() {
        return Err(Error::Empty("training dataset"));
    }
    if head == Head::Classification && !targets.is_binary() {
        return Err(Error::InvalidArgument(format!(
            "classification head needs binary targets; strategy {} produced non-binary values",
            targets.strategy.name()
        )));
    }
    let by_id: HashMap<&str, f64> = targets.entries.iter().map(|(id, v)| (id.as_str(), *v)).collect();
    let mut ys = Vec::with_capacity(ds.len());
    for q in ds {
        let y = by_id.get(q.id.as_str()).copied().ok_or_else(|| Error::MissingField {
            id: q.id.clone(),
            field: "target",
            context: format!("training with strategy {}", targets.strategy.name()),
        })?;
        ys.push(y);
    }
    let xs = ds.iter().map(|q| featurize(q, features)).collect();
    Ok(Examples { xs, ys })
}

fn mean_loss(model: &FilterModel, ex: &Examples) -> f64 {
    let total: f64 = ex
        .xs
        .iter()
        .zip(&ex.ys)
        .map(|(x, &y)| model.head.loss_wrt_logit(model.logit(x), y).0)
        .sum();
    total / ex.xs.len() as f64
}

fn run_epochs(model: &mut FilterModel, ex: &Examples, cfg: &TrainConfig, seed: u64) -> TrainReport {
    let n = ex.xs.len();
    let steps_per_epoch = n.div_ceil(cfg.batch_size);
    let total_steps = steps_per_epoch * cfg.epochs as usize;
    let warmup_steps = (cfg.warmup_fraction * total_steps as f64).ceil() as usize;

    let mut grad = vec![0.0; model.weights.len()];
    let mut touched: Vec<u32> = Vec::new();
    let mut order: Vec<usize> = (0..n).collect();
    let mut report = TrainReport::default();
    let mut step = 0usize;

    for _ in 0..cfg.epochs {
        // Epoch streams keep counting across calls so a second training
        // stage does not replay the first stage's shuffles.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(u64::from(model.epochs_trained));
        order.sort_unstable();
        order.shuffle(&mut rng);

        for batch in order.chunks(cfg.batch_size) {
            step += 1;
            let lr = if warmup_steps == 0 {
                cfg.learning_rate
            } else {
                cfg.learning_rate * (step as f64 / warmup_steps as f64).min(1.0)
            };

            let mut grad_bias = 0.0;
            for &i in batch {
                let x = &ex.xs[i];
                let (_, dz) = model.head.loss_wrt_logit(model.logit(x), ex.ys[i]);
                for &(j, v) in x.entries() {
                    grad[j as usize] += dz * v;
                    touched.push(j);
                }
                grad_bias += dz;
            }

            let scale = lr / batch.len() as f64;
            touched.sort_unstable();
            touched.dedup();
            for &j in &touched {
                let j = j as usize;
                model.weights[j] -= scale * grad[j];
                grad[j] = 0.0;
            }
            touched.clear();
            model.bias -= scale * grad_bias;
        }
        model.epochs_trained += 1;
        report.epoch_losses.push(mean_loss(model, ex));
    }
    report
}

/// Trains a fresh, zero-initialized filter.
pub fn train(
    ds: &Dataset,
    targets: &Targets,
    head: Head,
    cfg: &TrainConfig,
    features: &FeatureConfig,
    seed: u64,
) -> Result<FilterModel> {
    train_with_report(ds, targets, head, cfg, features, seed).map(|(m, _)| m)
}

pub fn train_with_report(
    ds: &Dataset,
    targets: &Targets,
    head: Head,
    cfg: &TrainConfig,
    features: &FeatureConfig,
    seed: u64,
) -> Result<(FilterModel, TrainReport)> {
    cfg.validate()?;
    features.validate()?;
    let tau1 = match head {
        Head::Classification => targets.strategy.tau1(),
        Head::Regression => None,
    };
    let mut model = FilterModel::zeros(head, tau1, *features, seed)?;
    let ex = prepare(ds, targets, head, features)?;
    let report = run_epochs(&mut model, &ex, cfg, seed);
    Ok((model, report))
}

/// Continues training an existing model on new data with its own schedule.
pub fn continue_training(
    model: &mut FilterModel,
    ds: &Dataset,
    targets: &Targets,
    cfg: &TrainConfig,
) -> Result<TrainReport> {
    cfg.validate()?;
    model.validate()?;
    let ex = prepare(ds, targets, model.head, &model.features)?;
    if model.head == Head::Classification {
        if let Some(t) = targets.strategy.tau1() {
            model.tau1_trained = Some(t);
        }
    }
    let seed = model.seed;
    Ok(run_epochs(model, &ex, cfg, seed))
}

/// Two-stage training: fit on `ds_a`, then keep the weights and fit on
/// `ds_b` with `cfg_b` (conventionally a smaller learning rate).
#[allow(clippy::too_many_arguments)]
pub fn train_sequential(
    ds_a: &Dataset,
    targets_a: &Targets,
    ds_b: &Dataset,
    targets_b: &Targets,
    head: Head,
    cfg_a: &TrainConfig,
    cfg_b: &TrainConfig,
    features: &FeatureConfig,
    seed: u64,
) -> Result<FilterModel> {
    let mut model = train(ds_a, targets_a, head, cfg_a, features, seed)?;
    continue_training(&mut model, ds_b, targets_b, cfg_b)?;
    Ok(model)
}
