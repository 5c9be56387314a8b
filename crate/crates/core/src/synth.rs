//! Synthetic homophily graphs with ground-truth edge difficulty.
//!
//! Classes sit on a circle: class means are placed at angle `2πc/C` in the
//! first two feature coordinates, and cross-class edges become rarer as the
//! circular distance between the endpoint classes grows.

use std::collections::HashSet;
use std::f64::consts::PI;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::graph::{round_to_file_precision, Graph, GraphParts, Split};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthParams {
    pub num_nodes: usize,
    pub num_classes: usize,
    pub homo: f64,
    pub avg_degree: f64,
    pub feature_dim: usize,
    pub gaussian_spread: f64,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            num_nodes: 2000,
            num_classes: 10,
            homo: 0.5,
            avg_degree: 10.0,
            feature_dim: 16,
            gaussian_spread: 2.5,
            seed: 0,
        }
    }
}

impl SynthParams {
    pub fn validate(&self) -> Result<()> {
        if self.num_classes == 0 || self.num_nodes == 0 {
            return Err(Error::param("num_nodes and num_classes must be positive"));
        }
        if self.num_nodes % self.num_classes != 0 {
            return Err(Error::param(format!(
                "num_nodes {} not divisible by num_classes {}",
                self.num_nodes, self.num_classes
            )));
        }
        if !(self.homo > 0.0 && self.homo <= 1.0) {
            return Err(Error::param(format!("homo {} outside (0, 1]", self.homo)));
        }
        if !(self.avg_degree > 0.0 && self.avg_degree.is_finite()) {
            return Err(Error::param("avg_degree must be positive"));
        }
        if self.feature_dim < 2 {
            return Err(Error::param("feature_dim must be at least 2"));
        }
        if !(self.gaussian_spread > 0.0 && self.gaussian_spread.is_finite()) {
            return Err(Error::param("gaussian_spread must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Difficulty {
    Easy,
    Medium,
    Hard,
}

impl Difficulty {
    pub fn from_distance(d: usize) -> Self {
        match d {
            0 => Self::Easy,
            1 => Self::Medium,
            _ => Self::Hard,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Easy => "easy",
            Self::Medium => "medium",
            Self::Hard => "hard",
        }
    }
}

impl fmt::Display for Difficulty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Difficulty {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "easy" => Ok(Self::Easy),
            "medium" => Ok(Self::Medium),
            "hard" => Ok(Self::Hard),
            other => Err(Error::param(format!("unknown difficulty {other:?}"))),
        }
    }
}

/// Per-edge difficulty category, aligned with the graph's edge list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeDifficulty(pub Vec<Difficulty>);

impl EdgeDifficulty {
    /// Labels every edge of `g` by the circular distance of its endpoint classes.
    pub fn from_graph(g: &Graph) -> Result<Self> {
        let c = g.num_classes();
        let y = g.labels();
        g.edges()
            .iter()
            .map(|&(u, v)| circular_class_distance(y[u], y[v], c).map(Difficulty::from_distance))
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Sidecar text: one `u v category` line per edge, in edge order.
    pub fn to_sidecar(&self, g: &Graph) -> String {
        g.edges()
            .iter()
            .zip(&self.0)
            .map(|(&(u, v), d)| format!("{u} {v} {d}\n"))
            .collect()
    }

    pub fn save(&self, g: &Graph, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_sidecar(g)).map_err(|e| Error::io(path.display().to_string(), e))
    }

    /// Reads a sidecar, checking that it lists the edges of `g` in order.
    pub fn load(g: &Graph, path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text =
            fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let mut out = Vec::with_capacity(g.num_edges());
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        for (k, &(u, v)) in g.edges().iter().enumerate() {
            let line = lines
                .next()
                .ok_or_else(|| Error::param(format!("sidecar ends before edge {k}")))?;
            let toks: Vec<&str> = line.split_whitespace().collect();
            let ok = toks.len() == 3
                && toks[0].parse::<usize>().ok() == Some(u)
                && toks[1].parse::<usize>().ok() == Some(v);
            if !ok {
                return Err(Error::param(format!(
                    "sidecar line {} does not match edge {u} {v}",
                    k + 1
                )));
            }
            out.push(toks[2].parse()?);
        }
        if lines.next().is_some() {
            return Err(Error::param("sidecar has more lines than the graph has edges"));
        }
        Ok(Self(out))
    }
}

/// Shortest distance between two classes arranged on a circle of `c` classes.
pub fn circular_class_distance(c1: usize, c2: usize, c: usize) -> Result<usize> {
    if c1 >= c || c2 >= c {
        return Err(Error::param(format!("class index out of range for C={c}: ({c1}, {c2})")));
    }
    let d = c1.abs_diff(c2);
    Ok(d.min(c - d))
}

/// Fraction of edges joining same-label endpoints.
pub fn empirical_homophily(g: &Graph) -> Result<f64> {
    if g.num_edges() == 0 {
        return Err(Error::Empty("edge set"));
    }
    let y = g.labels();
    let same = g.edges().iter().filter(|&&(u, v)| y[u] == y[v]).count();
    Ok(same as f64 / g.num_edges() as f64)
}

const MAX_REJECTIONS: usize = 1000;

/// Draws a synthetic graph and the difficulty of each of its edges.
pub fn generate(p: &SynthParams) -> Result<(Graph, EdgeDifficulty)> {
    p.validate()?;
    let n = p.num_nodes;
    let c = p.num_classes;
    let per_class = n / c;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);

    let labels: Vec<usize> = (0..n).map(|i| i / per_class).collect();

    let mut features = Array2::zeros((n, p.feature_dim));
    for (i, mut row) in features.rows_mut().into_iter().enumerate() {
        let angle = 2.0 * PI * labels[i] as f64 / c as f64;
        for (k, x) in row.iter_mut().enumerate() {
            let mean = match k {
                0 => p.gaussian_spread * angle.cos(),
                1 => p.gaussian_spread * angle.sin(),
                _ => 0.0,
            };
            let noise: f64 = rng.sample(StandardNormal);
            *x = round_to_file_precision(mean + noise);
        }
    }

    let split = stratified_thirds(&labels, c, per_class, &mut rng);
    let edges = sample_edges(p, per_class, &mut rng)?;

    let graph = Graph::new(GraphParts {
        num_nodes: n,
        num_classes: c,
        features,
        labels,
        edges,
        split,
    })?;
    let difficulty = EdgeDifficulty::from_graph(&graph)?;
    Ok((graph, difficulty))
}

/// Equal random tripartition. Classes are laid out contiguously in a random
/// order and positions are dealt round-robin, so every class with at least
/// three nodes reaches the training set and set sizes differ by at most one.
fn stratified_thirds(labels: &[usize], c: usize, per_class: usize, rng: &mut ChaCha8Rng) -> Split {
    let mut class_order: Vec<usize> = (0..c).collect();
    class_order.shuffle(rng);
    let mut sets: [Vec<usize>; 3] = Default::default();
    let mut pos = 0;
    for class in class_order {
        let mut members: Vec<usize> = (class * per_class..(class + 1) * per_class).collect();
        members.shuffle(rng);
        for node in members {
            debug_assert_eq!(labels[node], class);
            sets[pos % 3].push(node);
            pos += 1;
        }
    }
    for s in &mut sets {
        s.sort_unstable();
    }
    let [train, val, test] = sets;
    Split { train, val, test }
}

fn sample_edges(p: &SynthParams, per_class: usize, rng: &mut ChaCha8Rng) -> Result<Vec<(usize, usize)>> {
    let n = p.num_nodes;
    let c = p.num_classes;
    let m = (n as f64 * p.avg_degree / 2.0).round() as usize;

    let same_pairs = c * per_class * per_class.saturating_sub(1) / 2;
    let total_pairs = n * (n - 1) / 2;
    let cross_pairs = total_pairs - same_pairs;
    let want_same = p.homo * m as f64;
    if want_same > same_pairs as f64 || m > total_pairs {
        return Err(Error::Infeasible(format!(
            "{m} edges at homo {} need {want_same:.0} same-class pairs, only {same_pairs} exist",
            p.homo
        )));
    }
    if (m as f64 - want_same) > cross_pairs as f64 {
        return Err(Error::Infeasible(format!(
            "{m} edges need more cross-class pairs than the {cross_pairs} available"
        )));
    }

    // Unnormalized weight of each circular distance: e^{-d} times the number
    // of node pairs at that distance.
    let max_d = c / 2;
    let distance_weights: Vec<f64> = (1..=max_d)
        .map(|d| {
            let class_pairs = if 2 * d == c { c / 2 } else { c };
            (-(d as f64)).exp() * (class_pairs * per_class * per_class) as f64
        })
        .collect();
    let weight_total: f64 = distance_weights.iter().sum();

    let mut seen = HashSet::with_capacity(m);
    let mut edges = Vec::with_capacity(m);
    while edges.len() < m {
        let same_class = max_d == 0 || rng.random::<f64>() < p.homo;
        let mut placed = false;
        for _ in 0..MAX_REJECTIONS {
            let (u, v) = if same_class {
                if per_class < 2 {
                    break;
                }
                let class = rng.random_range(0..c);
                let a = rng.random_range(0..per_class);
                let b = rng.random_range(0..per_class);
                (class * per_class + a, class * per_class + b)
            } else {
                let mut pick = rng.random::<f64>() * weight_total;
                let mut d = max_d;
                for (k, w) in distance_weights.iter().enumerate() {
                    if pick < *w {
                        d = k + 1;
                        break;
                    }
                    pick -= w;
                }
                let first = if 2 * d == c {
                    rng.random_range(0..c / 2)
                } else {
                    rng.random_range(0..c)
                };
                let second = (first + d) % c;
                (
                    first * per_class + rng.random_range(0..per_class),
                    second * per_class + rng.random_range(0..per_class),
                )
            };
            if u == v {
                continue;
            }
            let key = (u.min(v), u.max(v));
            if seen.insert(key) {
                edges.push(key);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(Error::Infeasible(format!(
                "edge sampler exhausted {MAX_REJECTIONS} attempts after {} edges",
                edges.len()
            )));
        }
    }
    edges.sort_unstable();
    Ok(edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(homo: f64) -> SynthParams {
        SynthParams {
            homo,
            seed: 11,
            ..SynthParams::default()
        }
    }

    #[test]
    fn circular_distance_examples() {
        assert_eq!(circular_class_distance(0, 0, 10).unwrap(), 0);
        assert_eq!(circular_class_distance(0, 9, 10).unwrap(), 1);
        assert_eq!(circular_class_distance(2, 7, 10).unwrap(), 5);
        assert!(circular_class_distance(10, 0, 10).is_err());
        for a in 0..7 {
            for b in 0..7 {
                let d = circular_class_distance(a, b, 7).unwrap();
                assert_eq!(d, circular_class_distance(b, a, 7).unwrap());
                assert!(d <= 3);
                assert_eq!(d == 0, a == b);
            }
        }
    }

    #[test]
    fn full_homophily_gives_only_easy_edges() {
        let (g, diff) = generate(&params(1.0)).unwrap();
        assert_eq!(empirical_homophily(&g).unwrap(), 1.0);
        assert!(diff.0.iter().all(|d| *d == Difficulty::Easy));
        assert_eq!(g.num_edges(), 10_000);
    }

    #[test]
    fn homophily_concentrates() {
        for homo in [0.5, 0.7] {
            let (g, _) = generate(&params(homo)).unwrap();
            let h = empirical_homophily(&g).unwrap();
            assert!((h - homo).abs() <= 0.03, "homo {homo}: got {h}");
        }
    }

    #[test]
    fn cross_class_ratio_near_e() {
        let (g, _) = generate(&params(0.5)).unwrap();
        let y = g.labels();
        let mut by_d = [0usize; 6];
        for &(u, v) in g.edges() {
            by_d[circular_class_distance(y[u], y[v], 10).unwrap()] += 1;
        }
        let ratio = by_d[1] as f64 / by_d[2] as f64;
        assert!((ratio / std::f64::consts::E - 1.0).abs() <= 0.25, "ratio {ratio}");
        for d in 1..5 {
            assert!(by_d[d] >= by_d[d + 1], "{by_d:?}");
        }
    }

    #[test]
    fn classes_and_splits_balanced() {
        let (g, _) = generate(&params(0.3)).unwrap();
        let mut sizes = [0usize; 10];
        for &y in g.labels() {
            sizes[y] += 1;
        }
        assert!(sizes.iter().all(|&s| s == 200));
        let s = g.split();
        let lens = [s.train.len(), s.val.len(), s.test.len()];
        assert_eq!(lens.iter().sum::<usize>(), 2000);
        assert!(lens.iter().max().unwrap() - lens.iter().min().unwrap() <= 1);
    }

    #[test]
    fn seeds_are_deterministic_and_distinct() {
        let (a, _) = generate(&params(0.4)).unwrap();
        let (b, _) = generate(&params(0.4)).unwrap();
        assert_eq!(a, b);
        let (c, _) = generate(&SynthParams { seed: 12, ..params(0.4) }).unwrap();
        assert_ne!(a.edges(), c.edges());
    }

    #[test]
    fn adjacent_class_means_closer_than_opposite() {
        let (g, _) = generate(&params(0.5)).unwrap();
        let x = g.features();
        let mean = |class: usize| -> Vec<f64> {
            let rows = x.slice(ndarray::s![class * 200..(class + 1) * 200, ..]);
            rows.mean_axis(ndarray::Axis(0)).unwrap().to_vec()
        };
        let dist = |a: &[f64], b: &[f64]| -> f64 {
            a.iter().zip(b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt()
        };
        let m0 = mean(0);
        assert!(dist(&m0, &mean(1)) < dist(&m0, &mean(5)));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(generate(&params(1.5)).is_err());
        assert!(generate(&params(0.0)).is_err());
        assert!(generate(&SynthParams { num_nodes: 2001, ..params(0.5) }).is_err());
        let dense = SynthParams {
            num_nodes: 20,
            avg_degree: 15.0,
            homo: 0.9,
            ..params(0.9)
        };
        assert!(matches!(generate(&dense), Err(Error::Infeasible(_))));
    }

    #[test]
    fn sidecar_round_trip() {
        let (g, diff) = generate(&SynthParams { num_nodes: 60, avg_degree: 3.0, ..params(0.5) }).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.txt");
        diff.save(&g, &path).unwrap();
        assert_eq!(EdgeDifficulty::load(&g, &path).unwrap(), diff);
    }

    #[test]
    fn homophily_edge_cases() {
        let (g, _) = generate(&SynthParams { num_nodes: 60, avg_degree: 3.0, ..params(1.0) }).unwrap();
        assert_eq!(empirical_homophily(&g).unwrap(), 1.0);
        let mut parts = g.into_parts();
        parts.edges.clear();
        assert!(empirical_homophily(&Graph::new(parts).unwrap()).is_err());
    }
}
