use crate::config::RclConfig;
use crate::error::{Error, Result};
use crate::graph::{EdgeWeights, Graph};
use crate::nn::{forward, loss_and_grads, normalize, AdamConfig, GnnParams, Reconstruction};
use crate::synth::EdgeDifficulty;
use crate::training::{fit_with_schedule, BestTracker, RunMetrics};

use super::decoder::edge_residuals;
use super::mask::{schedule_lambda, smooth_weights, update_mask, MaskState};
use super::trace::{CurriculumTrace, SelectionFractions, TraceRecord};

/// Starting point of a curriculum run.
#[derive(Debug, Clone)]
pub struct InitialStructure {
    pub state: MaskState,
    pub lambda0: f64,
    /// Weights for the first model step (the initial mask itself).
    pub weights: EdgeWeights,
    /// Residuals of the pretrained model on the full input structure.
    pub residuals: Vec<f64>,
}

/// Trains the plain backbone on the full input structure.
pub fn pretrain(g: &Graph, cfg: &RclConfig) -> Result<(GnnParams, RunMetrics)> {
    let ones = EdgeWeights::ones(g.num_edges());
    fit_with_schedule(g, cfg, |_| ones.clone())
}

/// Edge residuals of `params` evaluated on the full input structure.
pub fn structure_residuals(g: &Graph, params: &GnnParams) -> Result<Vec<f64>> {
    let p = normalize(g, &EdgeWeights::ones(g.num_edges()))?;
    let cache = forward(params, g.features().view(), &p)?;
    Ok(edge_residuals(&cache.z, g.edges()))
}

/// Picks `λ0` so that about `init_frac` of the edges start selected, and
/// returns it with the initial mask.
pub fn initial_mask(residuals: &[f64], cfg: &RclConfig) -> Result<(Vec<f64>, f64)> {
    cfg.validate()?;
    let mut sorted = residuals.to_vec();
    sorted.sort_by(f64::total_cmp);
    let lambda0 = match (sorted.first(), sorted.last()) {
        (Some(&lo), Some(&hi)) if hi > lo => {
            let k = ((cfg.init_frac * sorted.len() as f64).round() as usize).min(sorted.len() - 1);
            let q = sorted[k];
            if q > 0.0 {
                cfg.beta * q / 2.0
            } else {
                cfg.beta * hi / 4.0
            }
        }
        // All residuals equal: no ranking to exploit.
        (_, Some(&hi)) if hi > 0.0 => cfg.beta * hi / 4.0,
        _ => cfg.beta / 4.0,
    };
    let zeros = vec![0.0; residuals.len()];
    let s = update_mask(residuals, &zeros, lambda0, cfg.beta, 0.0)?;
    Ok((s, lambda0))
}

/// Initial mask from a model already trained on the full structure.
pub fn init_from_pretrained(g: &Graph, cfg: &RclConfig, pretrained: &GnnParams) -> Result<InitialStructure> {
    let residuals = structure_residuals(g, pretrained)?;
    let (s, lambda0) = initial_mask(&residuals, cfg)?;
    let weights = EdgeWeights::new(s.clone())?;
    Ok(InitialStructure {
        state: MaskState::new(s, lambda0, g.num_nodes()),
        lambda0,
        weights,
        residuals,
    })
}

/// Pretrains a plain backbone with the run seed and derives the initial mask.
pub fn init_structure(g: &Graph, cfg: &RclConfig) -> Result<InitialStructure> {
    let (pretrained, _) = pretrain(g, cfg)?;
    init_from_pretrained(g, cfg, &pretrained)
}

#[derive(Debug, Clone)]
pub struct RclOutcome {
    /// Parameters of the epoch with the best validation accuracy.
    pub params: GnnParams,
    pub trace: CurriculumTrace,
    pub metrics: RunMetrics,
    pub final_state: MaskState,
}

/// Runs the full curriculum, including pretraining.
pub fn train_rcl(g: &Graph, cfg: &RclConfig, difficulty: Option<&EdgeDifficulty>) -> Result<RclOutcome> {
    let init = init_structure(g, cfg)?;
    train_rcl_from(g, cfg, difficulty, init)
}

/// Runs the curriculum from a given initial structure. Each epoch takes one
/// optimizer step on the smoothed structure, rescores every edge from the
/// same forward pass, refreshes the mask and reweights the edges.
pub fn train_rcl_from(
    g: &Graph,
    cfg: &RclConfig,
    difficulty: Option<&EdgeDifficulty>,
    init: InitialStructure,
) -> Result<RclOutcome> {
    cfg.validate()?;
    if let Some(d) = difficulty {
        if d.len() != g.num_edges() {
            return Err(Error::Shape(format!(
                "{} difficulty labels for {} edges",
                d.len(),
                g.num_edges()
            )));
        }
    }
    let adam = AdamConfig::default();
    let mut params = GnnParams::init(g.num_features(), cfg.hidden, g.num_classes(), cfg.seed);
    let mut tracker = BestTracker::new();
    let mut trace = CurriculumTrace::default();

    let mut state = init.state;
    let mut weights = init.weights;
    if !cfg.learn_mask {
        state.s.fill(1.0);
        weights = EdgeWeights::ones(g.num_edges());
    }

    for epoch in 0..cfg.epochs {
        let iter = epoch + 1;
        let p = normalize(g, &weights)?;
        let recon = cfg.recon_in_wstep.then_some(Reconstruction {
            beta: cfg.beta,
            mask: &state.s,
        });
        let out = loss_and_grads(&params, g, &p, recon)?;
        let val_acc = tracker.observe(g, epoch, &params, &out)?;
        params.adam_step(&out.grads, cfg.lr, &adam)?;

        if cfg.learn_mask {
            if !state.saturated(cfg.epsilon_conv) {
                state.lambda = schedule_lambda(
                    init.lambda0,
                    cfg.beta,
                    cfg.epsilon_conv,
                    cfg.pace,
                    cfg.epochs,
                    iter,
                )?;
            }
            let residuals = edge_residuals(&out.cache.z, g.edges());
            state.s = update_mask(&residuals, &state.s, state.lambda, cfg.beta, cfg.gamma)?;
        }
        state.iter = iter;
        if epoch == 0 {
            state.node_losses = out.node_losses;
        } else {
            let d = cfg.loss_decay;
            for (avg, &l) in state.node_losses.iter_mut().zip(&out.node_losses) {
                *avg = d * *avg + (1.0 - d) * l;
            }
        }
        weights = smooth_weights(&mut state, g, cfg.smoothing)?;

        trace.records.push(TraceRecord {
            iter,
            lambda: state.lambda,
            num_selected: state.num_selected(),
            fractions: difficulty.map(|d| SelectionFractions::measure(&state.s, d)),
            train_loss: out.classification,
            val_acc,
        });
    }

    let (params, metrics) = tracker.finish(cfg.epochs);
    Ok(RclOutcome {
        params,
        trace,
        metrics,
        final_state: state,
    })
}
