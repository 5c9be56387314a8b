use ndarray::{Array2, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::adam::{AdamConfig, Moments};
use super::propagation::PropagationMatrix;
use crate::curriculum::decoder::{residual_from_dot, residual_slope};
use crate::error::{Error, Result};
use crate::graph::{Graph, SplitKind};

/// Two-layer graph-convolution weights with their optimizer state.
#[derive(Debug, Clone, PartialEq)]
pub struct GnnParams {
    /// `b × h`, input to hidden.
    pub w0: Array2<f64>,
    /// `h × C`, hidden to class logits.
    pub w1: Array2<f64>,
    pub moments0: Moments,
    pub moments1: Moments,
    pub step: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub w0: Array2<f64>,
    pub w1: Array2<f64>,
}

/// Activations of one forward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// `P · X`.
    pub px: Array2<f64>,
    /// Hidden pre-activation `P · X · W0`.
    pub hidden_pre: Array2<f64>,
    /// Hidden embeddings `relu(P · X · W0)`; row `i` is `z_i`.
    pub z: Array2<f64>,
    pub logits: Array2<f64>,
}

fn glorot(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let limit = (6.0 / (rows + cols) as f64).sqrt();
    Array2::from_shape_fn((rows, cols), |_| rng.random_range(-limit..limit))
}

impl GnnParams {
    /// Glorot-uniform weights drawn from `seed`.
    pub fn init(num_features: usize, hidden: usize, num_classes: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w0 = glorot(num_features, hidden, &mut rng);
        let w1 = glorot(hidden, num_classes, &mut rng);
        Self::from_weights(w0, w1)
    }

    pub fn from_weights(w0: Array2<f64>, w1: Array2<f64>) -> Self {
        Self {
            moments0: Moments::zeros(w0.dim()),
            moments1: Moments::zeros(w1.dim()),
            w0,
            w1,
            step: 0,
        }
    }

    pub fn hidden(&self) -> usize {
        self.w0.ncols()
    }

    pub fn is_finite(&self) -> bool {
        self.w0.iter().chain(self.w1.iter()).all(|x| x.is_finite())
    }

    /// One adaptive-moment update of both weight tensors.
    pub fn adam_step(&mut self, grads: &Gradients, lr: f64, cfg: &AdamConfig) -> Result<()> {
        if grads.w0.iter().chain(grads.w1.iter()).any(|g| !g.is_finite()) {
            return Err(Error::NonFinite("gradient"));
        }
        let step = self.step + 1;
        self.moments0.update(&mut self.w0, &grads.w0, lr, step, cfg)?;
        self.moments1.update(&mut self.w1, &grads.w1, lr, step, cfg)?;
        self.step = step;
        Ok(())
    }
}

/// `Z = relu(P·X·W0)`, `logits = P·Z·W1`.
pub fn forward(params: &GnnParams, x: ArrayView2<'_, f64>, p: &PropagationMatrix) -> Result<ForwardCache> {
    if x.nrows() != p.dim() || x.ncols() != params.w0.nrows() || params.w0.ncols() != params.w1.nrows() {
        return Err(Error::Shape(format!(
            "X {:?}, P {}, W0 {:?}, W1 {:?}",
            x.dim(),
            p.dim(),
            params.w0.dim(),
            params.w1.dim()
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("features"));
    }
    if !params.is_finite() {
        return Err(Error::NonFinite("parameters"));
    }
    let px = p.matmul(x);
    let hidden_pre = px.dot(&params.w0);
    let z = hidden_pre.mapv(|v| v.max(0.0));
    let logits = p.matmul(z.dot(&params.w1).view());
    Ok(ForwardCache {
        px,
        hidden_pre,
        z,
        logits,
    })
}

/// Edge reconstruction penalty `β Σ_e S_e R_e` added to the classifier loss.
#[derive(Debug, Clone, Copy)]
pub struct Reconstruction<'a> {
    pub beta: f64,
    /// Mask values aligned with the graph's edges.
    pub mask: &'a [f64],
}

#[derive(Debug, Clone)]
pub struct LossOutput {
    pub loss: f64,
    /// Mean cross-entropy over training nodes.
    pub classification: f64,
    pub reconstruction: f64,
    /// Cross-entropy per node; zero for nodes outside the training split.
    pub node_losses: Vec<f64>,
    pub grads: Gradients,
    pub cache: ForwardCache,
}

/// Numerically stable row-wise softmax.
pub fn softmax_rows(logits: &Array2<f64>) -> Array2<f64> {
    let mut out = logits.clone();
    for mut row in out.rows_mut() {
        let max = row.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row /= sum;
    }
    out
}

fn log_sum_exp(row: ndarray::ArrayView1<'_, f64>) -> f64 {
    let max = row.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Total loss, per-node training losses and exact gradients with respect
/// to both weight tensors. With `recon = None` the loss is plain
/// cross-entropy.
pub fn loss_and_grads(
    params: &GnnParams,
    g: &Graph,
    p: &PropagationMatrix,
    recon: Option<Reconstruction<'_>>,
) -> Result<LossOutput> {
    let train = &g.split().train;
    if train.is_empty() {
        return Err(Error::Empty("training split"));
    }
    if let Some(r) = &recon {
        if r.mask.len() != g.num_edges() {
            return Err(Error::Shape(format!(
                "{} mask entries for {} edges",
                r.mask.len(),
                g.num_edges()
            )));
        }
    }
    let cache = forward(params, g.features().view(), p)?;
    let labels = g.labels();
    let n_train = train.len() as f64;

    let mut node_losses = vec![0.0; g.num_nodes()];
    let mut d_logits = Array2::zeros(cache.logits.dim());
    let mut classification = 0.0;
    for &i in train {
        let row = cache.logits.row(i);
        let lse = log_sum_exp(row);
        let l = lse - row[labels[i]];
        node_losses[i] = l;
        classification += l;
        let mut grad_row = d_logits.row_mut(i);
        for (k, v) in row.iter().enumerate() {
            grad_row[k] = (v - lse).exp() / n_train;
        }
        grad_row[labels[i]] -= 1.0 / n_train;
    }
    classification /= n_train;

    // logits = P (Z W1), P symmetric.
    let p_dl = p.matmul(d_logits.view());
    let grad_w1 = cache.z.t().dot(&p_dl);
    let mut d_z = p_dl.dot(&params.w1.t());

    let mut reconstruction = 0.0;
    if let Some(r) = recon {
        for (&(i, j), &s) in g.edges().iter().zip(r.mask) {
            if s == 0.0 {
                continue;
            }
            let dot = cache.z.row(i).dot(&cache.z.row(j));
            reconstruction += s * residual_from_dot(dot);
            let coef = r.beta * s * residual_slope(dot);
            if coef != 0.0 {
                let zj = cache.z.row(j).to_owned();
                let zi = cache.z.row(i).to_owned();
                d_z.row_mut(i).scaled_add(coef, &zj);
                d_z.row_mut(j).scaled_add(coef, &zi);
            }
        }
        reconstruction *= r.beta;
    }

    let d_hidden = ndarray::Zip::from(&d_z)
        .and(&cache.hidden_pre)
        .map_collect(|&dz, &h| if h > 0.0 { dz } else { 0.0 });
    let grad_w0 = cache.px.t().dot(&d_hidden);

    Ok(LossOutput {
        loss: classification + reconstruction,
        classification,
        reconstruction,
        node_losses,
        grads: Gradients {
            w0: grad_w0,
            w1: grad_w1,
        },
        cache,
    })
}

/// Row argmax, ties to the lowest class index.
pub fn predict(logits: &Array2<f64>) -> Vec<usize> {
    logits.axis_iter(Axis(0)).map(argmax).collect()
}

fn argmax(row: ndarray::ArrayView1<'_, f64>) -> usize {
    let mut best = 0;
    for (k, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = k;
        }
    }
    best
}

/// Fraction of nodes in `split` whose argmax logit equals the label.
pub fn accuracy(logits: &Array2<f64>, g: &Graph, split: SplitKind) -> Result<f64> {
    let nodes = g.split().nodes(split);
    if nodes.is_empty() {
        return Err(Error::Empty("evaluation split"));
    }
    let labels = g.labels();
    let correct = nodes
        .iter()
        .filter(|&&i| argmax(logits.row(i)) == labels[i])
        .count();
    Ok(correct as f64 / nodes.len() as f64)
}
