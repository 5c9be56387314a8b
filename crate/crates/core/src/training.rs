//! Full-batch training with best-validation model selection.

use crate::config::RclConfig;
use crate::error::Result;
use crate::graph::{EdgeWeights, Graph, SplitKind};
use crate::nn::{accuracy, loss_and_grads, normalize, AdamConfig, GnnParams, LossOutput};

/// Outcome of one training run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    pub best_val_acc: f64,
    /// Test accuracy of the epoch with the best validation accuracy.
    pub test_acc: f64,
    pub best_epoch: u32,
    pub epochs: u32,
    /// Mean training cross-entropy per epoch.
    pub train_losses: Vec<f64>,
}

/// Keeps the parameters of the epoch with the highest validation accuracy
/// (earliest on ties).
#[derive(Debug)]
pub(crate) struct BestTracker {
    best: Option<(f64, f64, u32, GnnParams)>,
    losses: Vec<f64>,
}

impl BestTracker {
    pub fn new() -> Self {
        Self {
            best: None,
            losses: Vec::new(),
        }
    }

    /// Scores the forward pass behind `out`, which was computed with `params`.
    /// Returns the validation accuracy.
    pub fn observe(&mut self, g: &Graph, epoch: u32, params: &GnnParams, out: &LossOutput) -> Result<f64> {
        self.losses.push(out.classification);
        let logits = &out.cache.logits;
        let val = evaluate(logits, g, SplitKind::Val)?;
        if self.best.as_ref().is_none_or(|(v, ..)| val > *v) {
            let test = evaluate(logits, g, SplitKind::Test)?;
            self.best = Some((val, test, epoch, params.clone()));
        }
        Ok(val)
    }

    pub fn finish(self, epochs: u32) -> (GnnParams, RunMetrics) {
        let (best_val_acc, test_acc, best_epoch, params) =
            self.best.expect("at least one epoch observed");
        (
            params,
            RunMetrics {
                best_val_acc,
                test_acc,
                best_epoch,
                epochs,
                train_losses: self.losses,
            },
        )
    }
}

/// Accuracy on a split; zero when the split is empty.
fn evaluate(logits: &ndarray::Array2<f64>, g: &Graph, split: SplitKind) -> Result<f64> {
    if g.split().nodes(split).is_empty() {
        return Ok(0.0);
    }
    accuracy(logits, g, split)
}

/// Trains a fresh model for `cfg.epochs` epochs on a structure that may change
/// per epoch. `weights_at(t)` gives the edge weights for 0-based epoch `t`.
pub fn fit_with_schedule(
    g: &Graph,
    cfg: &RclConfig,
    mut weights_at: impl FnMut(u32) -> EdgeWeights,
) -> Result<(GnnParams, RunMetrics)> {
    cfg.validate()?;
    let adam = AdamConfig::default();
    let mut params = GnnParams::init(g.num_features(), cfg.hidden, g.num_classes(), cfg.seed);
    let mut tracker = BestTracker::new();
    for epoch in 0..cfg.epochs {
        let p = normalize(g, &weights_at(epoch))?;
        let out = loss_and_grads(&params, g, &p, None)?;
        tracker.observe(g, epoch, &params, &out)?;
        params.adam_step(&out.grads, cfg.lr, &adam)?;
    }
    Ok(tracker.finish(cfg.epochs))
}
