//! Inner-product edge decoder and reconstruction residuals.

use ndarray::Array2;

/// Numerically stable logistic function.
pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Reconstructed value `σ(z_i · z_j)` for each listed edge.
pub fn decode(z: &Array2<f64>, edges: &[(usize, usize)]) -> Vec<f64> {
    edges
        .iter()
        .map(|&(i, j)| logistic(z.row(i).dot(&z.row(j))))
        .collect()
}

/// Squared mismatch against the input adjacency, which is 1 on every stored edge.
pub fn residuals(reconstructed: &[f64]) -> Vec<f64> {
    reconstructed.iter().map(|a| (a - 1.0).powi(2)).collect()
}

/// Residual computed straight from the inner product, `σ(-s)²`, which keeps
/// precision when `σ(s)` rounds to one.
pub fn residual_from_dot(dot: f64) -> f64 {
    logistic(-dot).powi(2)
}

/// Derivative of `(σ(s) - 1)²` with respect to `s`.
pub fn residual_slope(dot: f64) -> f64 {
    let neg = logistic(-dot);
    -2.0 * logistic(dot) * neg * neg
}

/// Residuals of every edge straight from the embeddings.
pub fn edge_residuals(z: &Array2<f64>, edges: &[(usize, usize)]) -> Vec<f64> {
    edges
        .iter()
        .map(|&(i, j)| residual_from_dot(z.row(i).dot(&z.row(j))))
        .collect()
}
