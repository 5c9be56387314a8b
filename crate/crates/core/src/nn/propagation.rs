use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::graph::{EdgeWeights, Graph};

/// Symmetric `D̂^{-1/2}(Ā + I)D̂^{-1/2}` in CSR form, diagonal included.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagationMatrix {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

/// Builds the self-loop-augmented, symmetrically normalized propagation
/// matrix for the weighted graph.
pub fn normalize(g: &Graph, w: &EdgeWeights) -> Result<PropagationMatrix> {
    if w.len() != g.num_edges() {
        return Err(Error::Shape(format!(
            "{} weights for {} edges",
            w.len(),
            g.num_edges()
        )));
    }
    let n = g.num_nodes();
    let weights = w.values();
    let csr = g.csr();

    let mut deg = vec![1.0; n];
    for (&(u, v), &x) in g.edges().iter().zip(weights) {
        deg[u] += x;
        deg[v] += x;
    }
    let inv_sqrt: Vec<f64> = deg.iter().map(|d| 1.0 / d.sqrt()).collect();

    let mut indptr = Vec::with_capacity(n + 1);
    let mut indices = Vec::with_capacity(n + 2 * g.num_edges());
    let mut values = Vec::with_capacity(indices.capacity());
    indptr.push(0);
    for i in 0..n {
        let mut row: Vec<(usize, f64)> = csr
            .row(i)
            .map(|(j, e)| (j, weights[e] * inv_sqrt[i] * inv_sqrt[j]))
            .collect();
        row.push((i, inv_sqrt[i] * inv_sqrt[i]));
        row.sort_unstable_by_key(|&(j, _)| j);
        for (j, x) in row {
            indices.push(j);
            values.push(x);
        }
        indptr.push(indices.len());
    }
    Ok(PropagationMatrix {
        n,
        indptr,
        indices,
        values,
    })
}

impl PropagationMatrix {
    pub fn identity(n: usize) -> Self {
        Self {
            n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let span = self.indptr[i]..self.indptr[i + 1];
        match self.indices[span.clone()].binary_search(&j) {
            Ok(k) => self.values[span.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.indptr[i]..self.indptr[i + 1];
        self.indices[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    /// Sparse-dense product `P · x`.
    pub fn matmul(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        assert_eq!(x.nrows(), self.n, "propagation dimension mismatch");
        let mut out = Array2::zeros((self.n, x.ncols()));
        for (i, mut out_row) in out.rows_mut().into_iter().enumerate() {
            for (j, p) in self.row(i) {
                out_row.scaled_add(p, &x.row(j));
            }
        }
        out
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut out = Array2::zeros((self.n, self.n));
        for i in 0..self.n {
            for (j, p) in self.row(i) {
                out[[i, j]] = p;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{GraphParts, Split};

    fn graph(n: usize, edges: Vec<(usize, usize)>) -> Graph {
        Graph::new(GraphParts {
            num_nodes: n,
            num_classes: 1,
            features: Array2::zeros((n, 1)),
            labels: vec![0; n],
            edges,
            split: Split {
                train: vec![0],
                ..Split::default()
            },
        })
        .unwrap()
    }

    #[test]
    fn single_node_is_identity() {
        let g = graph(1, vec![]);
        let p = normalize(&g, &EdgeWeights::ones(0)).unwrap();
        assert_eq!(p.to_dense(), ndarray::array![[1.0]]);
    }

    #[test]
    fn unit_edge_halves() {
        let g = graph(2, vec![(0, 1)]);
        let p = normalize(&g, &EdgeWeights::ones(1)).unwrap();
        assert!((p.get(0, 1) - 0.5).abs() < 1e-15);
        assert!((p.get(0, 0) - 0.5).abs() < 1e-15);
        assert_eq!(p.get(0, 1), p.get(1, 0));
    }

    #[test]
    fn zero_weights_give_identity() {
        let g = graph(4, vec![(0, 1), (1, 2), (2, 3)]);
        let p = normalize(&g, &EdgeWeights::zeros(3)).unwrap();
        assert_eq!(p.to_dense(), Array2::eye(4));
    }

    #[test]
    fn regular_graph_entries() {
        // 5-cycle: 2-regular.
        let g = graph(5, vec![(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)]);
        let p = normalize(&g, &EdgeWeights::ones(5)).unwrap();
        for &(u, v) in g.edges() {
            assert!((p.get(u, v) - 1.0 / 3.0).abs() < 1e-15);
        }
        assert!((p.get(0, 2)).abs() == 0.0);
    }

    #[test]
    fn weight_length_checked() {
        let g = graph(2, vec![(0, 1)]);
        assert!(normalize(&g, &EdgeWeights::ones(2)).is_err());
    }
}
