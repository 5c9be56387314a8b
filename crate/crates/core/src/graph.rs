//! Attributed, labeled, undirected graphs and their text file format.
//!
//! Edges are stored once as `(u, v)` with `u < v`; consumers expand them
//! symmetrically. Self-loops are never stored.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::Path;
use std::sync::OnceLock;

use ndarray::Array2;

use crate::error::{GraphError, Result};

/// Disjoint train/validation/test node index sets.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Split {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitKind {
    Train,
    Val,
    Test,
}

impl Split {
    pub fn nodes(&self, kind: SplitKind) -> &[usize] {
        match kind {
            SplitKind::Train => &self.train,
            SplitKind::Val => &self.val,
            SplitKind::Test => &self.test,
        }
    }
}

/// The raw fields of a graph. May violate invariants; see [`validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct GraphParts {
    pub num_nodes: usize,
    pub num_classes: usize,
    /// `num_nodes × num_features`.
    pub features: Array2<f64>,
    pub labels: Vec<usize>,
    pub edges: Vec<(usize, usize)>,
    pub split: Split,
}

/// A validated graph. Immutable after construction.
#[derive(Debug, Clone)]
pub struct Graph {
    parts: GraphParts,
    csr: OnceLock<Csr>,
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.parts == other.parts
    }
}

/// Compressed sparse row view of the symmetric adjacency. Each stored
/// neighbor carries the index of the undirected edge it came from.
#[derive(Debug, Clone)]
pub struct Csr {
    pub indptr: Vec<usize>,
    pub neighbors: Vec<usize>,
    pub edge_ids: Vec<usize>,
}

impl Csr {
    fn build(num_nodes: usize, edges: &[(usize, usize)]) -> Self {
        let mut counts = vec![0usize; num_nodes + 1];
        for &(u, v) in edges {
            counts[u + 1] += 1;
            counts[v + 1] += 1;
        }
        for i in 0..num_nodes {
            counts[i + 1] += counts[i];
        }
        let indptr = counts.clone();
        let mut cursor = counts;
        let mut neighbors = vec![0; 2 * edges.len()];
        let mut edge_ids = vec![0; 2 * edges.len()];
        for (e, &(u, v)) in edges.iter().enumerate() {
            neighbors[cursor[u]] = v;
            edge_ids[cursor[u]] = e;
            cursor[u] += 1;
            neighbors[cursor[v]] = u;
            edge_ids[cursor[v]] = e;
            cursor[v] += 1;
        }
        Self {
            indptr,
            neighbors,
            edge_ids,
        }
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let span = self.indptr[i]..self.indptr[i + 1];
        self.neighbors[span.clone()]
            .iter()
            .copied()
            .zip(self.edge_ids[span].iter().copied())
    }

    pub fn degree(&self, i: usize) -> usize {
        self.indptr[i + 1] - self.indptr[i]
    }
}

impl Graph {
    /// Builds a graph, rejecting any invariant violation.
    pub fn new(parts: GraphParts) -> Result<Self> {
        let violations = validate(&parts);
        if !violations.is_empty() {
            return Err(GraphError::Invalid(violations).into());
        }
        Ok(Self {
            parts,
            csr: OnceLock::new(),
        })
    }

    pub fn parts(&self) -> &GraphParts {
        &self.parts
    }

    pub fn into_parts(self) -> GraphParts {
        self.parts
    }

    pub fn num_nodes(&self) -> usize {
        self.parts.num_nodes
    }

    pub fn num_features(&self) -> usize {
        self.parts.features.ncols()
    }

    pub fn num_classes(&self) -> usize {
        self.parts.num_classes
    }

    pub fn num_edges(&self) -> usize {
        self.parts.edges.len()
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.parts.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.parts.labels
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.parts.edges
    }

    pub fn split(&self) -> &Split {
        &self.parts.split
    }

    pub fn csr(&self) -> &Csr {
        self.csr
            .get_or_init(|| Csr::build(self.parts.num_nodes, &self.parts.edges))
    }

    /// Always empty for a constructed graph.
    pub fn validate(&self) -> Vec<Violation> {
        validate(&self.parts)
    }
}

/// Per-edge weights in `[0, 1]`, aligned with [`Graph::edges`].
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeWeights(Vec<f64>);

impl EdgeWeights {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some((i, &w)) = values
            .iter()
            .enumerate()
            .find(|(_, w)| !(0.0..=1.0).contains(*w))
        {
            return Err(GraphError::WeightOutOfRange { index: i, value: w }.into());
        }
        Ok(Self(values))
    }

    pub fn ones(len: usize) -> Self {
        Self(vec![1.0; len])
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// One broken graph invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    FeatureShape { rows: usize, expected: usize },
    NonFiniteFeature { node: usize, column: usize },
    LabelCount { len: usize, expected: usize },
    LabelOutOfRange { node: usize },
    EdgeOutOfRange { edge: usize },
    SelfLoop { edge: usize },
    EdgeOrder { edge: usize },
    DuplicateEdge { edge: usize },
    SplitOutOfRange { node: usize },
    SplitOverlap,
    ClassMissingFromTrain { class: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::FeatureShape { rows, expected } => {
                write!(f, "feature_shape rows={rows} expected={expected}")
            }
            Self::NonFiniteFeature { node, column } => {
                write!(f, "non_finite_feature node={node} column={column}")
            }
            Self::LabelCount { len, expected } => {
                write!(f, "label_count len={len} expected={expected}")
            }
            Self::LabelOutOfRange { node } => write!(f, "label_out_of_range node={node}"),
            Self::EdgeOutOfRange { edge } => write!(f, "edge_out_of_range edge={edge}"),
            Self::SelfLoop { edge } => write!(f, "self_loop edge={edge}"),
            Self::EdgeOrder { edge } => write!(f, "edge_order edge={edge}"),
            Self::DuplicateEdge { edge } => write!(f, "duplicate_edge edge={edge}"),
            Self::SplitOutOfRange { node } => write!(f, "split_out_of_range node={node}"),
            Self::SplitOverlap => write!(f, "split_overlap"),
            Self::ClassMissingFromTrain { class } => {
                write!(f, "class_missing_from_train class={class}")
            }
        }
    }
}

/// Lists every invariant `parts` breaks; empty iff it is a valid graph.
pub fn validate(parts: &GraphParts) -> Vec<Violation> {
    let n = parts.num_nodes;
    let mut out = Vec::new();

    if parts.features.nrows() != n {
        out.push(Violation::FeatureShape {
            rows: parts.features.nrows(),
            expected: n,
        });
    }
    if let Some(((node, column), _)) = parts.features.indexed_iter().find(|(_, x)| !x.is_finite())
    {
        out.push(Violation::NonFiniteFeature { node, column });
    }
    if parts.labels.len() != n {
        out.push(Violation::LabelCount {
            len: parts.labels.len(),
            expected: n,
        });
    }
    for (node, &y) in parts.labels.iter().enumerate() {
        if y >= parts.num_classes {
            out.push(Violation::LabelOutOfRange { node });
        }
    }

    let mut seen = HashSet::with_capacity(parts.edges.len());
    for (edge, &(u, v)) in parts.edges.iter().enumerate() {
        if u >= n || v >= n {
            out.push(Violation::EdgeOutOfRange { edge });
        } else if u == v {
            out.push(Violation::SelfLoop { edge });
        } else if u > v {
            out.push(Violation::EdgeOrder { edge });
        }
        if !seen.insert((u.min(v), u.max(v))) {
            out.push(Violation::DuplicateEdge { edge });
        }
    }

    let mut owner = HashSet::new();
    let mut overlap = false;
    for set in [&parts.split.train, &parts.split.val, &parts.split.test] {
        for &node in set {
            if node >= n {
                out.push(Violation::SplitOutOfRange { node });
            }
            if !owner.insert(node) {
                overlap = true;
            }
        }
    }
    if overlap {
        out.push(Violation::SplitOverlap);
    }

    let mut present = vec![false; parts.num_classes];
    for &node in &parts.split.train {
        if let Some(&y) = parts.labels.get(node) {
            if y < parts.num_classes {
                present[y] = true;
            }
        }
    }
    for (class, seen) in present.into_iter().enumerate() {
        if !seen {
            out.push(Violation::ClassMissingFromTrain { class });
        }
    }
    out
}

/// Sum of incident edge weights per node.
pub fn weighted_degrees(g: &Graph, w: &EdgeWeights) -> Result<Vec<f64>> {
    if w.len() != g.num_edges() {
        return Err(GraphError::WeightLength {
            got: w.len(),
            expected: g.num_edges(),
        }
        .into());
    }
    let mut deg = vec![0.0; g.num_nodes()];
    for (&(u, v), &x) in g.edges().iter().zip(w.values()) {
        deg[u] += x;
        deg[v] += x;
    }
    Ok(deg)
}

/// Formats a real with 9 significant digits, in the style of C's `%.9g`.
pub fn format_real(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        strip_zeros(format!("{x:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", strip_zeros(mantissa.to_string()), exp.abs())
    }
}

fn strip_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Rounds to the value [`format_real`] would write, so in-memory data and
/// its file form agree exactly.
pub fn round_to_file_precision(x: f64) -> f64 {
    format_real(x).parse().expect("formatted real parses")
}

/// Serializes `g` in the line-oriented graph format.
pub fn write_graph(g: &Graph) -> String {
    let p = g.parts();
    let mut out = String::new();
    out.push_str(&format!(
        "{} {} {} {}\n",
        p.num_nodes,
        p.features.ncols(),
        p.num_classes,
        p.edges.len()
    ));
    for row in p.features.rows() {
        out.push_str(&join(row.iter().map(|&x| format_real(x))));
        out.push('\n');
    }
    out.push_str(&join(p.labels.iter()));
    out.push('\n');
    for set in [&p.split.train, &p.split.val, &p.split.test] {
        out.push_str(&join(set.iter()));
        out.push('\n');
    }
    for (u, v) in &p.edges {
        out.push_str(&format!("{u} {v}\n"));
    }
    out
}

fn join<T: ToString>(items: impl Iterator<Item = T>) -> String {
    items.map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn save_graph(g: &Graph, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, write_graph(g)).map_err(|source| GraphError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(())
}

pub fn load_graph(path: impl AsRef<Path>) -> Result<Graph> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| GraphError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_graph(&text)
}

fn parse_err(line: usize, kind: &'static str, detail: impl Into<String>) -> crate::error::Error {
    GraphError::Parse {
        line,
        kind,
        detail: detail.into(),
    }
    .into()
}

fn parse_fields<T: std::str::FromStr>(line_no: usize, line: &str, what: &'static str) -> Result<Vec<T>> {
    line.split_whitespace()
        .map(|tok| {
            tok.parse::<T>()
                .map_err(|_| parse_err(line_no, what, format!("cannot parse {tok:?}")))
        })
        .collect()
}

/// Parses the graph format. Line numbers in errors are 1-based.
pub fn parse_graph(text: &str) -> Result<Graph> {
    let lines: Vec<&str> = text.lines().collect();
    let line = |i: usize| -> Result<&str> {
        lines
            .get(i - 1)
            .copied()
            .ok_or_else(|| parse_err(i, "truncated", "unexpected end of file"))
    };

    let header: Vec<usize> = parse_fields(1, line(1)?, "malformed_header")?;
    let &[n, b, c, e] = header.as_slice() else {
        return Err(parse_err(1, "malformed_header", "expected `N b C E`"));
    };

    let mut features = Array2::zeros((n, b));
    for i in 0..n {
        let no = i + 2;
        let row: Vec<f64> = parse_fields(no, line(no)?, "malformed_features")?;
        if row.len() != b {
            return Err(parse_err(
                no,
                "malformed_features",
                format!("expected {b} values, found {}", row.len()),
            ));
        }
        if row.iter().any(|x| !x.is_finite()) {
            return Err(parse_err(no, "malformed_features", "non-finite value"));
        }
        features.row_mut(i).assign(&ndarray::ArrayView1::from(&row));
    }

    let label_line = n + 2;
    let labels: Vec<usize> = parse_fields(label_line, line(label_line)?, "malformed_labels")?;
    if labels.len() != n {
        return Err(parse_err(
            label_line,
            "malformed_labels",
            format!("expected {n} labels, found {}", labels.len()),
        ));
    }
    if let Some(node) = labels.iter().position(|&y| y >= c) {
        return Err(parse_err(
            label_line,
            "index_out_of_range",
            format!("label_out_of_range node={node}"),
        ));
    }

    let mut sets: [Vec<usize>; 3] = Default::default();
    let mut owner = HashSet::new();
    for (k, set) in sets.iter_mut().enumerate() {
        let no = n + 3 + k;
        *set = parse_fields(no, line(no)?, "malformed_split")?;
        for &node in set.iter() {
            if node >= n {
                return Err(parse_err(no, "index_out_of_range", format!("split node {node}")));
            }
            if !owner.insert(node) {
                return Err(parse_err(no, "split_overlap", format!("node {node}")));
            }
        }
    }
    let [train, val, test] = sets;

    let mut edges = Vec::with_capacity(e);
    let mut seen = HashSet::with_capacity(e);
    for k in 0..e {
        let no = n + 6 + k;
        let pair: Vec<usize> = parse_fields(no, line(no)?, "malformed_edge")?;
        let &[u, v] = pair.as_slice() else {
            return Err(parse_err(no, "malformed_edge", "expected `u v`"));
        };
        if u >= n || v >= n {
            return Err(parse_err(no, "index_out_of_range", format!("edge {u} {v}")));
        }
        if u == v {
            return Err(parse_err(no, "self_loop", format!("edge {u} {v}")));
        }
        if u > v {
            return Err(parse_err(no, "edge_order", format!("edge {u} {v} needs u < v")));
        }
        if !seen.insert((u, v)) {
            return Err(parse_err(no, "duplicate_edge", format!("edge {u} {v}")));
        }
        edges.push((u, v));
    }
    if let Some(extra) = lines[(n + 5 + e).min(lines.len())..]
        .iter()
        .position(|l| !l.trim().is_empty())
    {
        return Err(parse_err(n + 6 + e + extra, "trailing_data", "more lines than declared"));
    }

    Graph::new(GraphParts {
        num_nodes: n,
        num_classes: c,
        features,
        labels,
        edges,
        split: Split { train, val, test },
    })
}
