//! Relational curriculum learning for node classification on graphs.
//!
//! A two-layer graph-convolution model is trained while graph edges are
//! admitted from easy to hard. Edge difficulty is the model's own
//! reconstruction residual; the pace is set by an age parameter.

pub mod baselines;
pub mod config;
pub mod curriculum;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod nn;
pub mod perturb;
pub mod synth;
pub mod training;

pub use config::RclConfig;
pub use error::{Error, GraphError, Result};
pub use graph::{EdgeWeights, Graph, GraphParts, Split, SplitKind};
pub use training::RunMetrics;
