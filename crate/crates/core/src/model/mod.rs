//! Mask tubes, embeddings, triplets and flow fields.

mod bank;
mod embedding;
mod encode;
mod flow;
mod mask;
mod tube;

pub use bank::{FamilyKey, TripletInstance, TripletRef, TubeBank, Video};
pub use embedding::{temporal_pool, PoolKind, TubeEmbedding};
pub use encode::{encode_tube, PAIR_FEATURES, SOLO_FEATURES};
pub use flow::{FlowField, FlowMap};
pub use mask::{rle_decode, rle_encode, Mask};
pub use tube::{viou, MaskTube, TubeFrame};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("expected a {}x{} grid, found {found} cells", expected.0, expected.1)]
    DimensionMismatch {
        expected: (usize, usize),
        found: usize,
    },
    #[error("run lengths sum to {found}, expected {expected}")]
    RleLength { expected: usize, found: u64 },
    #[error("tube {tube_id}: frame index {index} is not strictly increasing")]
    FrameOrder { tube_id: String, index: u32 },
    #[error("tube {tube_id}: frame {index} is outside the video's {num_frames} frames")]
    FrameOutOfRange {
        tube_id: String,
        index: u32,
        num_frames: u32,
    },
    #[error("tube {0} has no non-empty mask")]
    EmptyTube(String),
    #[error("window must be an odd integer >= 1, got {0}")]
    InvalidWindow(usize),
    #[error("embedding needs at least one frame and one feature")]
    EmptyEmbedding,
    #[error("embedding of {frames}x{dim} cannot hold {len} values")]
    EmbeddingShape { frames: usize, dim: usize, len: usize },
    #[error("embedding value at row {row}, column {col} is not finite")]
    NonFinite { row: usize, col: usize },
    #[error("flow field contains a non-finite displacement")]
    NonFiniteFlow,
    #[error("frame counts differ: {left} vs {right}")]
    FrameCountMismatch { left: usize, right: usize },
    #[error("{0:?} is not a permutation of the frame positions")]
    InvalidPermutation(Vec<usize>),
    #[error("video {video_id}: masks of {first} and {second} overlap on frame {frame}")]
    DisjointnessViolation {
        video_id: String,
        frame: u32,
        first: String,
        second: String,
    },
    #[error("video {video_id} has no tube {tube_id}")]
    UnknownTube { video_id: String, tube_id: String },
    #[error("no video {0}")]
    UnknownVideo(String),
    #[error("no triplet {}#{}", .0.video_id, .0.ordinal)]
    UnknownTriplet(TripletRef),
    #[error("duplicate tube id {0}")]
    DuplicateTube(String),
    #[error("duplicate video id {0}")]
    DuplicateVideo(String),
    #[error("video {video_id}: {reason}")]
    InvalidTriplet { video_id: String, reason: String },
}
