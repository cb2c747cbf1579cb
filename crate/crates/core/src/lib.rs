pub mod ablation;
pub mod contrastive;
pub mod metrics;
pub mod model;
pub mod motion;
pub mod store;
pub mod synth;
pub mod transport;
