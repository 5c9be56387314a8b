//! Relational curriculum: edges are scored by how well the current node
//! embeddings reconstruct them, admitted through a relaxed mask whose
//! closed-form update is governed by a growing age parameter, and
//! reweighted by selection history and endpoint confidence.

pub mod decoder;
mod mask;
mod trace;
mod train;

pub use decoder::{decode, edge_residuals, logistic, residuals};
pub use mask::{lambda_conv, schedule_lambda, smooth_weights, update_mask, MaskState};
pub use trace::{CurriculumTrace, SelectionFractions, TraceRecord, TRACE_HEADER};
pub use train::{
    init_from_pretrained, init_structure, initial_mask, pretrain, structure_residuals,
    train_rcl, train_rcl_from, InitialStructure, RclOutcome,
};
