use super::{Matrix, TransportError};
use crate::model::TubeEmbedding;

/// Rows shorter than this are treated as carrying no direction.
pub const ZERO_NORM: f64 = 1e-12;

/// Cosine distance between every row of `hi` and every row of `hj`, in
/// `[0, 2]`. A pair involving a (near) zero row costs exactly 1.
pub fn cost_matrix(hi: &TubeEmbedding, hj: &TubeEmbedding) -> Result<Matrix, TransportError> {
    if hi.dim() != hj.dim() {
        return Err(TransportError::DimensionMismatch {
            left: hi.dim(),
            right: hj.dim(),
        });
    }
    let norms_i: Vec<f64> = hi.rows().map(norm).collect();
    let norms_j: Vec<f64> = hj.rows().map(norm).collect();
    let mut c = Matrix::zeros(hi.frames(), hj.frames());
    for (k, (ri, &ni)) in hi.rows().zip(&norms_i).enumerate() {
        for (l, (rj, &nj)) in hj.rows().zip(&norms_j).enumerate() {
            let d = if ni < ZERO_NORM || nj < ZERO_NORM {
                1.0
            } else {
                let dot: f64 = ri.iter().zip(rj).map(|(a, b)| a * b).sum();
                (1.0 - dot / (ni * nj)).clamp(0.0, 2.0)
            };
            c.set(k, l, d);
        }
    }
    Ok(c)
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn emb(rows: &[Vec<f64>]) -> TubeEmbedding {
        TubeEmbedding::from_rows("e", rows).unwrap()
    }

    #[test]
    fn cosine_distance_of_basic_directions() {
        let a = emb(&[vec![1.0, 0.0]]);
        let c = cost_matrix(&a, &emb(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, 0.0]])).unwrap();
        assert_eq!(c.row(0), &[0.0, 1.0, 2.0]);
    }

    #[test]
    fn zero_rows_cost_one() {
        let c = cost_matrix(&emb(&[vec![0.0, 0.0]]), &emb(&[vec![3.0, 1.0]])).unwrap();
        assert_eq!(c.get(0, 0), 1.0);
    }

    #[test]
    fn mismatched_width_is_an_error() {
        assert!(cost_matrix(&emb(&[vec![1.0]]), &emb(&[vec![1.0, 0.0]])).is_err());
    }
}
