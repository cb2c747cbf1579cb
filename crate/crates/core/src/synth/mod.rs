//! Deterministic synthetic scenes with analytic optical flow.
//!
//! Entities are rectangles or discs following closed-form trajectories, so
//! masks, flow and ground-truth relations are all exact. The corpus
//! generator gives every relation class a characteristic motion and varies
//! appearance (position, size, speed) from video to video.

mod corpus;
mod scene;

pub use corpus::{
    is_static_relation, make_corpus, motion_calibration_scene, pan_scene, relation_family, Corpus, CorpusSpec,
    RELATIONS,
};
pub use scene::{generate_scene, EntitySpec, RelationSpec, ScenarioSpec, Scene, Shape, Trajectory};

use thiserror::Error;

use crate::model::ModelError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("entity {entity} leaves the canvas at frame {frame}")]
    OutOfCanvas { entity: String, frame: u32 },
    #[error("entities {first} and {second} overlap at frame {frame}")]
    Overlap { first: String, second: String, frame: u32 },
    #[error("invalid scenario: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}
