//! Reference regimes: plain training and fixed-pace edge curricula.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::RclConfig;
use crate::curriculum::{pretrain, structure_residuals};
use crate::error::{Error, Result};
use crate::graph::{EdgeWeights, Graph};
use crate::nn::GnnParams;
use crate::training::{fit_with_schedule, RunMetrics};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PacingKind {
    Linear,
    Root,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OrderingKind {
    /// Ascending residual under the pretrained model.
    Residual,
    /// Seeded shuffle.
    Random,
}

impl fmt::Display for PacingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Linear => "linear",
            Self::Root => "root",
        })
    }
}

impl FromStr for PacingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Self::Linear),
            "root" => Ok(Self::Root),
            other => Err(Error::param(format!("unknown pacing {other:?}"))),
        }
    }
}

/// Number of edges admitted at iteration `t` of `total`.
pub fn pace_count(kind: PacingKind, t: u32, total: u32, num_edges: usize) -> Result<usize> {
    if total == 0 {
        return Err(Error::param("pacing needs at least one iteration"));
    }
    if t > total {
        return Err(Error::param(format!("iteration {t} beyond {total}")));
    }
    let frac = t as f64 / total as f64;
    let share = match kind {
        PacingKind::Linear => frac,
        PacingKind::Root => frac.sqrt(),
    };
    Ok(((share * num_edges as f64).round() as usize).min(num_edges))
}

/// Edge indices sorted by ascending residual; ties keep edge order.
pub fn residual_ordering(residuals: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..residuals.len()).collect();
    order.sort_by(|&a, &b| residuals[a].total_cmp(&residuals[b]));
    order
}

/// Seeded permutation of the edge indices.
pub fn random_ordering(num_edges: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..num_edges).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0f_ed9e5);
    order.shuffle(&mut rng);
    order
}

/// Plain training on the full structure.
pub fn train_vanilla(g: &Graph, cfg: &RclConfig) -> Result<(GnnParams, RunMetrics)> {
    pretrain(g, cfg)
}

/// Ordering for `kind`, scoring residual orderings with `pretrained`.
pub fn edge_ordering(g: &Graph, cfg: &RclConfig, kind: OrderingKind, pretrained: &GnnParams) -> Result<Vec<usize>> {
    match kind {
        OrderingKind::Residual => Ok(residual_ordering(&structure_residuals(g, pretrained)?)),
        OrderingKind::Random => Ok(random_ordering(g.num_edges(), cfg.seed)),
    }
}

/// Trains with the first `pace_count(t)` edges of `ordering` at weight 1
/// and the rest at 0, for 1-based iteration `t`.
pub fn train_paced_with(g: &Graph, cfg: &RclConfig, ordering: &[usize], pacing: PacingKind) -> Result<RunMetrics> {
    let e = g.num_edges();
    if ordering.len() != e {
        return Err(Error::Shape(format!("ordering of {} for {e} edges", ordering.len())));
    }
    let mut rank = vec![0usize; e];
    for (r, &edge) in ordering.iter().enumerate() {
        rank[edge] = r;
    }
    let mut failure = None;
    let (_, metrics) = fit_with_schedule(g, cfg, |epoch| {
        let k = match pace_count(pacing, epoch + 1, cfg.epochs, e) {
            Ok(k) => k,
            Err(err) => {
                failure.get_or_insert(err);
                e
            }
        };
        EdgeWeights::new(rank.iter().map(|&r| if r < k { 1.0 } else { 0.0 }).collect())
            .expect("binary weights")
    })?;
    match failure {
        Some(err) => Err(err),
        None => Ok(metrics),
    }
}

/// Pretrains when the ordering needs it, then runs the paced curriculum.
pub fn train_paced(g: &Graph, cfg: &RclConfig, ordering: OrderingKind, pacing: PacingKind) -> Result<RunMetrics> {
    let order = match ordering {
        OrderingKind::Residual => {
            let (pretrained, _) = pretrain(g, cfg)?;
            edge_ordering(g, cfg, ordering, &pretrained)?
        }
        OrderingKind::Random => random_ordering(g.num_edges(), cfg.seed),
    };
    train_paced_with(g, cfg, &order, pacing)
}
