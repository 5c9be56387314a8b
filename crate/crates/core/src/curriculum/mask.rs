//! Closed-form mask updates, the age-parameter schedule and edge reweighting.

use crate::error::{Error, Result};
use crate::graph::{EdgeWeights, Graph};

/// Mask over the input edges together with the bookkeeping the
/// reweighting needs.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskState {
    /// Relaxed selection `S` in `[0, 1]`, aligned with the graph's edges.
    pub s: Vec<f64>,
    /// Number of iterations in which each edge was selected (`S > 0`).
    pub counts: Vec<u32>,
    /// Age parameter.
    pub lambda: f64,
    /// Completed iterations.
    pub iter: u32,
    /// Per-node training losses from the latest forward pass; zero for
    /// nodes outside the training split.
    pub node_losses: Vec<f64>,
}

impl MaskState {
    pub fn new(s: Vec<f64>, lambda: f64, num_nodes: usize) -> Self {
        Self {
            counts: vec![0; s.len()],
            s,
            lambda,
            iter: 0,
            node_losses: vec![0.0; num_nodes],
        }
    }

    pub fn num_selected(&self) -> usize {
        self.s.iter().filter(|&&x| x > 0.0).count()
    }

    /// True once every edge carries at least `1 - tol`.
    pub fn saturated(&self, tol: f64) -> bool {
        self.s.iter().all(|&x| x >= 1.0 - tol)
    }
}

/// Per-edge minimizer over `[0, 1]` of
/// `β·S·R + λ(S - 1)² + γ(S - S_prev)²`.
pub fn update_mask(residuals: &[f64], prev: &[f64], lambda: f64, beta: f64, gamma: f64) -> Result<Vec<f64>> {
    if !(lambda > 0.0) || !(beta > 0.0) || !(gamma >= 0.0) {
        return Err(Error::param(format!(
            "mask update needs λ > 0, β > 0, γ ≥ 0 (got {lambda}, {beta}, {gamma})"
        )));
    }
    if residuals.len() != prev.len() {
        return Err(Error::Shape(format!(
            "{} residuals, {} previous mask entries",
            residuals.len(),
            prev.len()
        )));
    }
    let denom = 2.0 * (lambda + gamma);
    Ok(residuals
        .iter()
        .zip(prev)
        .map(|(&r, &p)| ((2.0 * lambda + 2.0 * gamma * p - beta * r) / denom).clamp(0.0, 1.0))
        .collect())
}

/// Smallest age parameter at which every mask entry with `R ≤ 1` reaches
/// `1 - epsilon` (for `γ = 0`).
pub fn lambda_conv(beta: f64, epsilon: f64) -> f64 {
    beta / (2.0 * epsilon)
}

/// Geometric schedule from `lambda0` at iteration 0 to `λ_conv` at
/// iteration `epochs / pace`, held at `λ_conv` afterwards.
pub fn schedule_lambda(lambda0: f64, beta: f64, epsilon: f64, pace: u32, epochs: u32, t: u32) -> Result<f64> {
    let conv = lambda_conv(beta, epsilon);
    if !(lambda0 > 0.0) || lambda0 >= conv {
        return Err(Error::param(format!(
            "λ0 = {lambda0} must lie in (0, λ_conv = {conv})"
        )));
    }
    if pace == 0 || epochs == 0 {
        return Err(Error::param("pace and epochs must be positive"));
    }
    let progress = (t as f64 * pace as f64 / epochs as f64).min(1.0);
    if progress >= 1.0 {
        return Ok(conv);
    }
    Ok(lambda0 * (conv / lambda0).powf(progress))
}

/// Edge weights for the next model step: `ψ(e)·ρ(u)·ρ(v)·S_e`, where `ψ` is
/// the fraction of iterations the edge has been selected and
/// `ρ = exp(-loss)`. Counts selections of the current mask first. With
/// `smoothing` off the mask is returned unchanged.
pub fn smooth_weights(state: &mut MaskState, g: &Graph, smoothing: bool) -> Result<EdgeWeights> {
    if state.iter == 0 {
        return Err(Error::param("edge reweighting needs at least one completed iteration"));
    }
    if state.s.len() != g.num_edges() || state.node_losses.len() != g.num_nodes() {
        return Err(Error::Shape("mask state does not match graph".into()));
    }
    for (count, &s) in state.counts.iter_mut().zip(&state.s) {
        if s > 0.0 {
            *count += 1;
        }
    }
    if !smoothing {
        return EdgeWeights::new(state.s.clone());
    }
    let t = state.iter as f64;
    let rho: Vec<f64> = state.node_losses.iter().map(|l| (-l).exp()).collect();
    let weights = g
        .edges()
        .iter()
        .zip(&state.s)
        .zip(&state.counts)
        .map(|((&(u, v), &s), &count)| {
            let psi = (count as f64 / t).min(1.0);
            (psi * rho[u] * rho[v] * s).clamp(0.0, 1.0)
        })
        .collect();
    EdgeWeights::new(weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{GraphParts, Split};
    use ndarray::Array2;

    #[test]
    fn mask_examples() {
        assert_eq!(update_mask(&[0.0], &[0.0], 1.0, 2.0, 0.0).unwrap(), vec![1.0]);
        assert!((update_mask(&[0.5], &[0.0], 1.0, 2.0, 0.0).unwrap()[0] - 0.5).abs() < 1e-15);
        assert_eq!(update_mask(&[0.9], &[0.0], 0.1, 2.0, 0.0).unwrap(), vec![0.0]);
        assert!(update_mask(&[0.1], &[0.0], 0.0, 1.0, 0.0).is_err());
        assert!(update_mask(&[0.1], &[0.0, 1.0], 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn proximal_term_pulls_toward_previous() {
        let free = update_mask(&[0.6], &[0.0], 0.5, 1.0, 0.0).unwrap()[0];
        let held = update_mask(&[0.6], &[0.0], 0.5, 1.0, 5.0).unwrap()[0];
        assert!(held < free);
    }

    #[test]
    fn schedule_examples() {
        assert_eq!(schedule_lambda(0.05, 1.0, 1e-3, 1, 300, 0).unwrap(), 0.05);
        let at_end = schedule_lambda(0.05, 1.0, 1e-3, 3, 300, 100).unwrap();
        assert_eq!(at_end, lambda_conv(1.0, 1e-3));
        let mid = schedule_lambda(0.05, 1.0, 1e-3, 1, 300, 150).unwrap();
        assert!((mid - 5.0).abs() < 1e-12, "{mid}");
        assert_eq!(schedule_lambda(0.05, 1.0, 1e-3, 3, 300, 250).unwrap(), 500.0);
        assert!(schedule_lambda(500.0, 1.0, 1e-3, 1, 300, 0).is_err());
    }

    fn two_edge_graph() -> Graph {
        Graph::new(GraphParts {
            num_nodes: 3,
            num_classes: 1,
            features: Array2::zeros((3, 1)),
            labels: vec![0; 3],
            edges: vec![(0, 1), (1, 2)],
            split: Split {
                train: vec![0, 1],
                val: vec![2],
                test: vec![],
            },
        })
        .unwrap()
    }

    #[test]
    fn psi_is_selection_frequency() {
        let g = two_edge_graph();
        let mut st = MaskState::new(vec![0.8, 0.0], 1.0, 3);
        st.counts = vec![2, 1];
        st.iter = 4;
        let w = smooth_weights(&mut st, &g, true).unwrap();
        assert_eq!(st.counts, vec![3, 1]);
        assert!((w.values()[0] - 0.75 * 0.8).abs() < 1e-15);
        assert_eq!(w.values()[1], 0.0);
    }

    #[test]
    fn rho_follows_node_loss() {
        let g = two_edge_graph();
        let mut st = MaskState::new(vec![1.0, 1.0], 1.0, 3);
        st.iter = 1;
        st.node_losses = vec![0.0, 1e6, 0.0];
        let w = smooth_weights(&mut st, &g, true).unwrap();
        assert_eq!(w.values(), &[0.0, 0.0]);

        let mut st = MaskState::new(vec![1.0, 1.0], 1.0, 3);
        st.iter = 1;
        let w = smooth_weights(&mut st, &g, true).unwrap();
        assert_eq!(w.values(), &[1.0, 1.0]);
    }

    #[test]
    fn bypass_returns_mask() {
        let g = two_edge_graph();
        let mut st = MaskState::new(vec![0.3, 0.7], 1.0, 3);
        st.iter = 5;
        st.node_losses = vec![2.0, 2.0, 0.0];
        let w = smooth_weights(&mut st, &g, false).unwrap();
        assert_eq!(w.values(), &[0.3, 0.7]);
    }

    #[test]
    fn reweighting_needs_an_iteration() {
        let g = two_edge_graph();
        let mut st = MaskState::new(vec![0.3, 0.7], 1.0, 3);
        assert!(smooth_weights(&mut st, &g, true).is_err());
    }
}
