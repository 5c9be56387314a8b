//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use ndarray::Array2;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use rcl::graph::{EdgeWeights, Graph, GraphParts, Split};
use rcl::nn::{loss_and_grads, normalize, GnnParams, Reconstruction};

/// A random small graph with weights, model and mask.
pub struct Instance {
    pub graph: Graph,
    pub weights: EdgeWeights,
    pub params: GnnParams,
    pub mask: Vec<f64>,
    pub beta: f64,
}

pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, b: usize, c: usize, edge_prob: f64) -> Graph {
    let c = c.min(n);
    let features = Array2::from_shape_fn((n, b), |_| rng.random_range(-1.5..1.5));
    // The first `c` nodes carry one label each and train, so every class is
    // represented in the training split.
    let labels = (0..n).map(|i| if i < c { i } else { rng.random_range(0..c) }).collect();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(edge_prob) {
                edges.push((u, v));
            }
        }
    }
    let mut split = Split::default();
    split.train.extend(0..c);
    for i in c..n {
        match rng.random_range(0..3) {
            0 => split.train.push(i),
            1 => split.val.push(i),
            _ => split.test.push(i),
        }
    }
    Graph::new(GraphParts {
        num_nodes: n,
        num_classes: c,
        features,
        labels,
        edges,
        split,
    })
    .expect("random graph is valid")
}

pub fn random_instance(rng: &mut ChaCha8Rng, max_nodes: usize, max_hidden: usize) -> Instance {
    let n = rng.random_range(2..=max_nodes);
    let b = rng.random_range(1..=5);
    let h = rng.random_range(1..=max_hidden);
    let c = rng.random_range(2..=4);
    let density = rng.random_range(0.1..0.6);
    let graph = random_graph(rng, n, b, c, density);
    let e = graph.num_edges();
    let weights = EdgeWeights::new((0..e).map(|_| rng.random_range(0.0..=1.0)).collect()).unwrap();
    let w0 = Array2::from_shape_fn((b, h), |_| rng.random_range(-1.0..1.0));
    let w1 = Array2::from_shape_fn((h, c), |_| rng.random_range(-1.0..1.0));
    let mask = (0..e)
        .map(|_| if rng.random_bool(0.3) { 0.0 } else { rng.random_range(0.0..=1.0) })
        .collect();
    Instance {
        graph,
        weights,
        params: GnnParams::from_weights(w0, w1),
        mask,
        beta: rng.random_range(0.1..2.0),
    }
}

/// Worst relative error between analytic and central-difference gradients
/// over every weight entry, or `None` when a ReLU kink sits inside every
/// probed step for some entry. Relative error uses a 1e-4 floor on the
/// denominator so exact zeros compare absolutely.
pub fn gradient_check(inst: &Instance, with_recon: bool) -> Option<f64> {
    let p = normalize(&inst.graph, &inst.weights).unwrap();
    let recon = with_recon.then_some(Reconstruction {
        beta: inst.beta,
        mask: &inst.mask,
    });
    let out = loss_and_grads(&inst.params, &inst.graph, &p, recon).unwrap();
    let pattern = |params: &GnnParams| -> Vec<bool> {
        let o = loss_and_grads(params, &inst.graph, &p, recon).unwrap();
        o.cache.hidden_pre.iter().map(|&v| v > 0.0).collect()
    };
    let base_pattern = pattern(&inst.params);
    let mut worst: f64 = 0.0;
    for layer in 0..2 {
        let shape = if layer == 0 { inst.params.w0.dim() } else { inst.params.w1.dim() };
        for r in 0..shape.0 {
            for c in 0..shape.1 {
                let analytic = if layer == 0 { out.grads.w0[(r, c)] } else { out.grads.w1[(r, c)] };
                let mut numeric = None;
                for h in [1e-6, 1e-8] {
                    let shifted = |delta: f64| {
                        let mut w0 = inst.params.w0.clone();
                        let mut w1 = inst.params.w1.clone();
                        if layer == 0 {
                            w0[(r, c)] += delta;
                        } else {
                            w1[(r, c)] += delta;
                        }
                        GnnParams::from_weights(w0, w1)
                    };
                    let plus = shifted(h);
                    let minus = shifted(-h);
                    if pattern(&plus) != base_pattern || pattern(&minus) != base_pattern {
                        continue;
                    }
                    let lp = loss_and_grads(&plus, &inst.graph, &p, recon).unwrap().loss;
                    let lm = loss_and_grads(&minus, &inst.graph, &p, recon).unwrap().loss;
                    numeric = Some((lp - lm) / (2.0 * h));
                    break;
                }
                let numeric = numeric?;
                let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-4);
                worst = worst.max(rel);
            }
        }
    }
    Some(worst)
}

/// Scalar mask objective minimized over a 1e-4 grid on [0, 1].
pub fn grid_mask(r: f64, prev: f64, lambda: f64, beta: f64, gamma: f64) -> f64 {
    let objective = |s: f64| beta * s * r + lambda * (s - 1.0).powi(2) + gamma * (s - prev).powi(2);
    let mut best = (f64::INFINITY, 0.0);
    for k in 0..=10_000 {
        let s = k as f64 * 1e-4;
        let v = objective(s);
        if v < best.0 {
            best = (v, s);
        }
    }
    best.1
}

/// Dense propagation matrix built straight from the definition.
pub fn dense_propagation(g: &Graph, w: &[f64]) -> Array2<f64> {
    let n = g.num_nodes();
    let mut a = Array2::<f64>::eye(n);
    for (&(u, v), &x) in g.edges().iter().zip(w) {
        a[(u, v)] += x;
        a[(v, u)] += x;
    }
    let deg: Vec<f64> = a.rows().into_iter().map(|r| r.sum()).collect();
    Array2::from_shape_fn((n, n), |(i, j)| a[(i, j)] / (deg[i] * deg[j]).sqrt())
}

/// Dense two-layer forward: returns (Z, logits).
pub fn dense_forward(g: &Graph, w: &[f64], params: &GnnParams) -> (Array2<f64>, Array2<f64>) {
    let p = dense_propagation(g, w);
    let z = p.dot(g.features()).dot(&params.w0).mapv(|v| v.max(0.0));
    let logits = p.dot(&z).dot(&params.w1);
    (z, logits)
}
