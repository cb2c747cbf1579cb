use serde::{Deserialize, Serialize};

use super::cost::{norm, ZERO_NORM};
use super::distance::{ot_distance, OtConfig};
use super::TransportError;
use crate::model::{temporal_pool, PoolKind, TubeEmbedding};

/// Default margin added to the negated transport distance.
pub const DEFAULT_ALPHA: f64 = 10.0;

/// `α − d_OT`.
pub fn similarity(ha: &TubeEmbedding, hb: &TubeEmbedding, alpha: f64, cfg: &OtConfig) -> Result<f64, TransportError> {
    Ok(alpha - ot_distance(ha, hb, cfg)?.distance)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PooledKind {
    Cosine,
    L2,
}

/// Mean-pools both tubes over time, then compares the pooled vectors: cosine
/// similarity, or the negated Euclidean distance for `L2`.
pub fn pooled_similarity(ha: &TubeEmbedding, hb: &TubeEmbedding, kind: PooledKind) -> Result<f64, TransportError> {
    if ha.dim() != hb.dim() {
        return Err(TransportError::DimensionMismatch {
            left: ha.dim(),
            right: hb.dim(),
        });
    }
    let pa = temporal_pool(ha, PoolKind::Mean);
    let pb = temporal_pool(hb, PoolKind::Mean);
    Ok(match kind {
        PooledKind::Cosine => {
            let (na, nb) = (norm(&pa), norm(&pb));
            if na < ZERO_NORM || nb < ZERO_NORM {
                0.0
            } else {
                pa.iter().zip(&pb).map(|(x, y)| x * y).sum::<f64>() / (na * nb)
            }
        }
        PooledKind::L2 => -pa.iter().zip(&pb).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt(),
    })
}

/// How two tube representations are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimilarityMethod {
    #[default]
    Ot,
    PoolCos,
    PoolL2,
}

impl SimilarityMethod {
    pub const ALL: [SimilarityMethod; 3] = [Self::Ot, Self::PoolCos, Self::PoolL2];

    pub fn evaluate(
        self,
        ha: &TubeEmbedding,
        hb: &TubeEmbedding,
        alpha: f64,
        cfg: &OtConfig,
    ) -> Result<f64, TransportError> {
        match self {
            Self::Ot => similarity(ha, hb, alpha, cfg),
            Self::PoolCos => pooled_similarity(ha, hb, PooledKind::Cosine),
            Self::PoolL2 => pooled_similarity(ha, hb, PooledKind::L2),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Ot => "Optimal transport",
            Self::PoolCos => "Pooling - Cosine similarity",
            Self::PoolL2 => "Pooling - L2",
        }
    }
}

impl std::str::FromStr for SimilarityMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ot" => Ok(Self::Ot),
            "pool-cos" => Ok(Self::PoolCos),
            "pool-l2" => Ok(Self::PoolL2),
            other => Err(format!("unknown method {other:?} (expected ot, pool-cos or pool-l2)")),
        }
    }
}
