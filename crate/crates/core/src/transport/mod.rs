//! Partial optimal transport between tube embeddings.
//!
//! Each embedding is a uniform empirical distribution over its frame rows.
//! The distance moves a fixed mass `s` between the two distributions (rows
//! and columns may stay partly unmatched) at cosine cost, and takes the best
//! value over a grid of masses `s`.

mod cost;
mod distance;
mod exact;
mod matrix;
mod similarity;
mod simplex;
mod sinkhorn;

pub use cost::cost_matrix;
pub use distance::{mass_grid, ot_distance, ot_distance_from_cost, CostMode, OtConfig, OtDistance};
pub use exact::{exact_partial_ot, solve_exact_partial, ExactSolution, MAX_EXACT_SIZE};
pub use matrix::Matrix;
pub use similarity::{pooled_similarity, similarity, PooledKind, SimilarityMethod, DEFAULT_ALPHA};
pub use sinkhorn::{
    sinkhorn_partial, ScalingScheme, TransportProblem, TransportResult, MARGINAL_TOLERANCE, PLAN_TOLERANCE,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransportError {
    #[error("feature widths differ: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("invalid transport problem: {0}")]
    InvalidProblem(String),
    #[error("kernel vanished at tau = {tau}; use a larger temperature")]
    Degenerate { tau: f64 },
    #[error("exact solver handles at most {MAX_EXACT_SIZE}x{MAX_EXACT_SIZE}, got {rows}x{cols}")]
    TooLarge { rows: usize, cols: usize },
}
