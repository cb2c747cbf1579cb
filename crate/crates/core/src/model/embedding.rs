use super::tube::check_permutation;
use super::ModelError;

/// Per-frame features of a tube: a `frames × dim` row-major matrix, each row
/// a support point of the tube's empirical distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct TubeEmbedding {
    tube_id: String,
    frames: usize,
    dim: usize,
    data: Vec<f64>,
}

impl TubeEmbedding {
    pub fn new(
        tube_id: impl Into<String>,
        frames: usize,
        dim: usize,
        data: Vec<f64>,
    ) -> Result<Self, ModelError> {
        if frames == 0 || dim == 0 {
            return Err(ModelError::EmptyEmbedding);
        }
        if data.len() != frames * dim {
            return Err(ModelError::EmbeddingShape {
                frames,
                dim,
                len: data.len(),
            });
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(ModelError::NonFinite {
                row: i / dim,
                col: i % dim,
            });
        }
        Ok(Self {
            tube_id: tube_id.into(),
            frames,
            dim,
            data,
        })
    }

    pub fn from_rows(tube_id: impl Into<String>, rows: &[Vec<f64>]) -> Result<Self, ModelError> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(ModelError::EmbeddingShape {
                frames: rows.len(),
                dim,
                len: rows.iter().map(Vec::len).sum(),
            });
        }
        Self::new(tube_id, rows.len(), dim, rows.concat())
    }

    pub fn tube_id(&self) -> &str {
        &self.tube_id
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.data[t * self.dim..(t + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn with_id(mut self, tube_id: impl Into<String>) -> Self {
        self.tube_id = tube_id.into();
        self
    }

    /// Output row `k` is input row `perm[k]`.
    pub fn permute_rows(&self, perm: &[usize]) -> Result<TubeEmbedding, ModelError> {
        check_permutation(perm, self.frames)?;
        let data = perm.iter().flat_map(|&p| self.row(p).iter().copied()).collect();
        Ok(Self {
            data,
            ..self.clone()
        })
    }

    /// Row-wise concatenation `[self | other]`.
    pub fn concat(&self, other: &TubeEmbedding, tube_id: impl Into<String>) -> Result<Self, ModelError> {
        if self.frames != other.frames {
            return Err(ModelError::FrameCountMismatch {
                left: self.frames,
                right: other.frames,
            });
        }
        let data = self
            .rows()
            .zip(other.rows())
            .flat_map(|(a, b)| a.iter().chain(b).copied())
            .collect();
        Ok(Self {
            tube_id: tube_id.into(),
            frames: self.frames,
            dim: self.dim + other.dim,
            data,
        })
    }
}

/// Temporal pooling operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PoolKind {
    #[default]
    Mean,
    Max,
}

/// Collapses the frame axis into one `dim`-vector.
pub fn temporal_pool(e: &TubeEmbedding, kind: PoolKind) -> Vec<f64> {
    let mut out = match kind {
        PoolKind::Mean => vec![0.0; e.dim],
        PoolKind::Max => vec![f64::NEG_INFINITY; e.dim],
    };
    for row in e.rows() {
        for (o, &v) in out.iter_mut().zip(row) {
            match kind {
                PoolKind::Mean => *o += v,
                PoolKind::Max => *o = o.max(v),
            }
        }
    }
    if kind == PoolKind::Mean {
        let n = e.frames as f64;
        out.iter_mut().for_each(|o| *o /= n);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn pooling_single_row_is_identity() {
        let e = TubeEmbedding::from_rows("e", &[vec![1.5, -2.0]]).unwrap();
        assert_eq!(temporal_pool(&e, PoolKind::Mean), vec![1.5, -2.0]);
        assert_eq!(temporal_pool(&e, PoolKind::Max), vec![1.5, -2.0]);
    }

    #[test]
    fn mean_pooling_averages_rows() {
        let e = TubeEmbedding::from_rows("e", &[vec![0.0, 2.0], vec![2.0, 0.0]]).unwrap();
        assert_eq!(temporal_pool(&e, PoolKind::Mean), vec![1.0, 1.0]);
        assert_eq!(temporal_pool(&e, PoolKind::Max), vec![2.0, 2.0]);
    }

    #[test]
    fn rejects_non_finite_and_empty() {
        assert!(matches!(
            TubeEmbedding::new("e", 1, 2, vec![0.0, f64::NAN]),
            Err(ModelError::NonFinite { row: 0, col: 1 })
        ));
        assert!(TubeEmbedding::new("e", 0, 2, vec![]).is_err());
    }

    #[test]
    fn concat_places_columns_side_by_side() {
        let a = TubeEmbedding::from_rows("a", &[vec![1.0], vec![2.0]]).unwrap();
        let b = TubeEmbedding::from_rows("b", &[vec![3.0], vec![4.0]]).unwrap();
        let c = a.concat(&b, "ab").unwrap();
        assert_eq!(c.data(), &[1.0, 3.0, 2.0, 4.0]);
        assert_eq!(c.dim(), 2);
    }

    proptest! {
        #[test]
        fn mean_pool_ignores_row_order(
            rows in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 3), 1..7),
            seed in any::<u64>(),
        ) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let e = TubeEmbedding::from_rows("e", &rows).unwrap();
            let mut perm: Vec<usize> = (0..rows.len()).collect();
            perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let p = e.permute_rows(&perm).unwrap();
            for (x, y) in temporal_pool(&e, PoolKind::Mean).iter().zip(temporal_pool(&p, PoolKind::Mean)) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }
    }
}
