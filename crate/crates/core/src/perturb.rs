//! Random structure attack: connect previously unlinked node pairs.

use std::collections::HashSet;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackSpec {
    /// Injected edges as a fraction of the original edge count.
    pub ratio: f64,
    pub seed: u64,
}

/// Adds `round(ratio · E)` edges drawn uniformly without replacement from
/// the unlinked, non-self pairs. Original edges keep their positions; the
/// injected ones follow them in sorted order.
pub fn inject_edges(g: &Graph, spec: &AttackSpec) -> Result<Graph> {
    if !(spec.ratio >= 0.0 && spec.ratio.is_finite()) {
        return Err(Error::param(format!("attack ratio {} must be ≥ 0", spec.ratio)));
    }
    let n = g.num_nodes();
    let e = g.num_edges();
    let m = (spec.ratio * e as f64).round() as usize;
    let free = (n * n.saturating_sub(1) / 2).saturating_sub(e);
    if m > free {
        return Err(Error::Infeasible(format!(
            "cannot inject {m} edges: only {free} unlinked pairs"
        )));
    }
    if m == 0 {
        return Ok(g.clone());
    }

    let existing: HashSet<(usize, usize)> = g.edges().iter().copied().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let injected = if 2 * m <= free {
        sample_by_rejection(n, m, &existing, &mut rng)
    } else {
        None
    }
    .unwrap_or_else(|| sample_by_enumeration(n, m, &existing, &mut rng));

    let mut parts = g.parts().clone();
    parts.edges.extend(injected);
    Graph::new(parts)
}

fn sample_by_rejection(
    n: usize,
    m: usize,
    existing: &HashSet<(usize, usize)>,
    rng: &mut ChaCha8Rng,
) -> Option<Vec<(usize, usize)>> {
    let cap = 50 * m + 1000;
    let mut chosen = HashSet::with_capacity(m);
    let mut attempts = 0;
    while chosen.len() < m {
        attempts += 1;
        if attempts > cap {
            return None;
        }
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u == v {
            continue;
        }
        let pair = (u.min(v), u.max(v));
        if !existing.contains(&pair) {
            chosen.insert(pair);
        }
    }
    let mut out: Vec<_> = chosen.into_iter().collect();
    out.sort_unstable();
    Some(out)
}

fn sample_by_enumeration(
    n: usize,
    m: usize,
    existing: &HashSet<(usize, usize)>,
    rng: &mut ChaCha8Rng,
) -> Vec<(usize, usize)> {
    let free: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .filter(|p| !existing.contains(p))
        .collect();
    let mut out: Vec<_> = index::sample(rng, free.len(), m)
        .into_iter()
        .map(|i| free[i])
        .collect();
    out.sort_unstable();
    out
}
