//! Contrastive batches: anchors, cross-video positives, shuffle and triplet
//! negatives, and the InfoNCE-style objective over OT similarities.

mod batch;
mod loss;
mod sampling;

pub use batch::{
    build_batch, build_batches, encode_anchor, make_anchor, shuffle_negative, AnchorPair, BatchConfig,
    BatchRecord, ContrastiveBatch, EmbeddingRef, Negative, NegativeKind, NegativeRecord, ShuffleMode, Skipped,
    TripletRecord,
};
pub use loss::{combine_loss, contrastive_loss, infonce, LossMode, LossReport};
pub use sampling::{
    anchor_seed, sample_permutations, sample_positive, sample_triplet_negatives, triplet_negative_weights,
};

use thiserror::Error;

use crate::model::{ModelError, TripletRef};
use crate::motion::MotionError;
use crate::transport::TransportError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ContrastiveError {
    #[error("no same-family triplet outside video {} for triplet {}", .0.video_id, .0.ordinal)]
    NoPositive(TripletRef),
    #[error("no negative available for triplet {} of video {}", .0.ordinal, .0.video_id)]
    NoNegative(TripletRef),
    #[error("the identity permutation would reproduce the anchor")]
    IdentityPermutation,
    #[error("permutations need at least 2 frames, got {0}")]
    TooFewFrames(usize),
    #[error("subject has {subject} frames but object has {object}")]
    FrameMismatch { subject: usize, object: usize },
    #[error("candidate {0} has the anchor's own family")]
    PositiveCandidate(usize),
    #[error("no flow field for video {0}")]
    MissingFlow(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error(transparent)]
    Motion(#[from] MotionError),
}
