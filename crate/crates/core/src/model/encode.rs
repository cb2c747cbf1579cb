//! Handcrafted per-frame tube encoder.
//!
//! Stands in for a learned temporal encoder. Each frame's row holds
//!
//! | column | feature |
//! |--------|---------|
//! | 0, 1   | centroid `(cx / W, cy / H)` |
//! | 2      | area fraction |
//! | 3, 4   | centroid velocity, normalized per frame |
//! | 5, 6   | centroid acceleration |
//! | 7, 8   | partner centroid minus own centroid (partner only) |
//! | 9, 10  | rate of that offset (partner only) |
//!
//! Rates are central differences over `window` neighbouring rows, with the
//! stencil clamped at the sequence ends; acceleration is the same difference
//! applied to the velocity sequence. Because rates depend on neighbouring
//! frames, reordering the masks changes the rows themselves, not merely their
//! order.
//!
//! Empty frames keep the last known centroid (the first known one for
//! leading gaps) and report area 0.

use super::embedding::TubeEmbedding;
use super::tube::MaskTube;
use super::ModelError;

/// Row width without a partner tube.
pub const SOLO_FEATURES: usize = 7;
/// Row width with a partner tube.
pub const PAIR_FEATURES: usize = 11;

/// Encodes `tube` frame by frame. When `partner` is given its masks are
/// looked up by frame index; missing or empty partner frames are carried the
/// same way as the tube's own gaps.
pub fn encode_tube(
    tube: &MaskTube,
    partner: Option<&MaskTube>,
    window: usize,
) -> Result<TubeEmbedding, ModelError> {
    if window == 0 || window.is_multiple_of(2) {
        return Err(ModelError::InvalidWindow(window));
    }
    let half = window / 2;
    let (w, h) = (tube.width() as f64, tube.height() as f64);
    let area_norm = w * h;

    let own: Vec<Option<(f64, f64)>> = tube.frames().iter().map(|f| f.mask.centroid()).collect();
    let own = fill_gaps(&own).ok_or_else(|| ModelError::EmptyTube(tube.tube_id().to_owned()))?;
    let cx: Vec<f64> = own.iter().map(|c| c.0 / w).collect();
    let cy: Vec<f64> = own.iter().map(|c| c.1 / h).collect();
    let vx = central_difference(&cx, half);
    let vy = central_difference(&cy, half);
    let ax = central_difference(&vx, half);
    let ay = central_difference(&vy, half);

    let relative = match partner {
        Some(p) => {
            let theirs: Vec<Option<(f64, f64)>> = tube
                .frames()
                .iter()
                .map(|f| p.mask_at(f.index).and_then(|m| m.centroid()))
                .collect();
            let theirs =
                fill_gaps(&theirs).ok_or_else(|| ModelError::EmptyTube(p.tube_id().to_owned()))?;
            let ox: Vec<f64> = theirs.iter().zip(&cx).map(|(c, x)| c.0 / w - x).collect();
            let oy: Vec<f64> = theirs.iter().zip(&cy).map(|(c, y)| c.1 / h - y).collect();
            let ovx = central_difference(&ox, half);
            let ovy = central_difference(&oy, half);
            Some((ox, oy, ovx, ovy))
        }
        None => None,
    };

    let dim = if relative.is_some() {
        PAIR_FEATURES
    } else {
        SOLO_FEATURES
    };
    let n = tube.len();
    let mut data = Vec::with_capacity(n * dim);
    for t in 0..n {
        let area = tube.frames()[t].mask.area() as f64 / area_norm;
        data.extend_from_slice(&[cx[t], cy[t], area, vx[t], vy[t], ax[t], ay[t]]);
        if let Some((ox, oy, ovx, ovy)) = &relative {
            data.extend_from_slice(&[ox[t], oy[t], ovx[t], ovy[t]]);
        }
    }
    TubeEmbedding::new(tube.tube_id(), n, dim, data)
}

fn fill_gaps(values: &[Option<(f64, f64)>]) -> Option<Vec<(f64, f64)>> {
    let first = values.iter().flatten().next().copied()?;
    let mut last = first;
    Some(
        values
            .iter()
            .map(|v| {
                if let Some(c) = v {
                    last = *c;
                }
                last
            })
            .collect(),
    )
}

fn central_difference(x: &[f64], half: usize) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|t| {
            let lo = t.saturating_sub(half);
            let hi = (t + half).min(n - 1);
            if hi == lo {
                0.0
            } else {
                (x[hi] - x[lo]) / (hi - lo) as f64
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Mask, TubeFrame};

    fn square_at(h: usize, w: usize, x0: usize, y0: usize, side: usize) -> Mask {
        let mut m = Mask::empty(h, w);
        for y in y0..y0 + side {
            for x in x0..x0 + side {
                m.set(y, x, true);
            }
        }
        m
    }

    fn tube_from_xs(id: &str, xs: &[usize]) -> MaskTube {
        let frames = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| TubeFrame {
                index: i as u32,
                mask: square_at(10, 40, x, 3, 2),
            })
            .collect();
        MaskTube::new(id, "c", 10, 40, frames).unwrap()
    }

    #[test]
    fn static_tube_has_zero_rates() {
        let t = tube_from_xs("s", &[5, 5, 5, 5]);
        let e = encode_tube(&t, None, 3).unwrap();
        assert_eq!(e.dim(), SOLO_FEATURES);
        for row in e.rows() {
            assert!(row[3..7].iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn unit_speed_gives_one_over_width_velocity() {
        let t = tube_from_xs("m", &[2, 3, 4, 5, 6]);
        let e = encode_tube(&t, None, 3).unwrap();
        for row in 1..4 {
            assert!((e.row(row)[3] - 1.0 / 40.0).abs() < 1e-12);
            assert!(e.row(row)[5].abs() < 1e-12);
        }
    }

    #[test]
    fn partner_adds_offset_columns() {
        let a = tube_from_xs("a", &[2, 4, 6]);
        let b = tube_from_xs("b", &[20, 20, 20]);
        let e = encode_tube(&a, Some(&b), 3).unwrap();
        assert_eq!(e.dim(), PAIR_FEATURES);
        assert!((e.row(0)[7] - 18.0 / 40.0).abs() < 1e-12);
        assert!((e.row(1)[9] + 2.0 / 40.0).abs() < 1e-12);
    }

    #[test]
    fn reordering_frames_changes_rows_for_accelerating_motion() {
        let t = tube_from_xs("acc", &[0, 1, 3, 6, 10, 15]);
        let e = encode_tube(&t, None, 3).unwrap();
        let rev: Vec<usize> = (0..6).rev().collect();
        let shuffled = encode_tube(&t.permute_frames(&rev).unwrap(), None, 3).unwrap();
        let moved = e.permute_rows(&rev).unwrap();
        assert_ne!(shuffled, moved);
        // The reversed tube has the same positions but opposite velocity.
        for k in 0..6 {
            assert_eq!(shuffled.row(k)[0], moved.row(k)[0]);
            assert!((shuffled.row(k)[3] + moved.row(k)[3]).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_frames_carry_centroid() {
        let mut t = tube_from_xs("g", &[2, 2, 2]);
        let mut frames = t.frames().to_vec();
        frames[1].mask = Mask::empty(10, 40);
        t = MaskTube::new("g", "c", 10, 40, frames).unwrap();
        let e = encode_tube(&t, None, 3).unwrap();
        assert_eq!(e.row(1)[0], e.row(0)[0]);
        assert_eq!(e.row(1)[2], 0.0);
    }

    #[test]
    fn all_empty_tube_is_an_error() {
        let frames = vec![TubeFrame { index: 0, mask: Mask::empty(4, 4) }];
        let t = MaskTube::new("e", "c", 4, 4, frames).unwrap();
        assert!(matches!(encode_tube(&t, None, 3), Err(ModelError::EmptyTube(_))));
    }

    #[test]
    fn even_window_is_rejected() {
        let t = tube_from_xs("s", &[5, 5]);
        assert!(matches!(encode_tube(&t, None, 2), Err(ModelError::InvalidWindow(2))));
    }
}
