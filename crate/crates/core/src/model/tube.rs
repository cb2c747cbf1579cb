use super::mask::Mask;
use super::ModelError;

/// One tracked frame of a mask tube.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TubeFrame {
    pub index: u32,
    pub mask: Mask,
}

/// An entity's binary segmentation tracked over a sequence of frames.
///
/// Frame indices are strictly increasing and every mask has the tube's
/// `height × width`. Frames may be empty (a tracker dropout).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskTube {
    tube_id: String,
    category: String,
    height: usize,
    width: usize,
    frames: Vec<TubeFrame>,
}

impl MaskTube {
    pub fn new(
        tube_id: impl Into<String>,
        category: impl Into<String>,
        height: usize,
        width: usize,
        frames: Vec<TubeFrame>,
    ) -> Result<Self, ModelError> {
        let tube_id = tube_id.into();
        for frame in &frames {
            if frame.mask.dims() != (height, width) {
                return Err(ModelError::DimensionMismatch {
                    expected: (height, width),
                    found: frame.mask.height() * frame.mask.width(),
                });
            }
        }
        if let Some(w) = frames.windows(2).find(|w| w[1].index <= w[0].index) {
            return Err(ModelError::FrameOrder {
                tube_id,
                index: w[1].index,
            });
        }
        Ok(Self {
            tube_id,
            category: category.into(),
            height,
            width,
            frames,
        })
    }

    pub fn tube_id(&self) -> &str {
        &self.tube_id
    }

    pub fn category(&self) -> &str {
        &self.category
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn frames(&self) -> &[TubeFrame] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// First and last frame index, if any.
    pub fn span(&self) -> Option<(u32, u32)> {
        Some((self.frames.first()?.index, self.frames.last()?.index))
    }

    pub fn mask_at(&self, index: u32) -> Option<&Mask> {
        self.frames
            .binary_search_by_key(&index, |f| f.index)
            .ok()
            .map(|i| &self.frames[i].mask)
    }

    pub fn covers(&self, begin: u32, end: u32) -> bool {
        self.span().is_some_and(|(b, e)| b <= begin && e >= end)
    }

    /// The frames with `begin <= index <= end`.
    pub fn crop(&self, begin: u32, end: u32) -> MaskTube {
        let frames = self
            .frames
            .iter()
            .filter(|f| f.index >= begin && f.index <= end)
            .cloned()
            .collect();
        MaskTube {
            frames,
            ..self.clone_meta()
        }
    }

    /// Reorders the masks while keeping the frame indices: output frame `k`
    /// carries the mask of input frame `perm[k]`.
    pub fn permute_frames(&self, perm: &[usize]) -> Result<MaskTube, ModelError> {
        check_permutation(perm, self.frames.len())?;
        let frames = self
            .frames
            .iter()
            .zip(perm)
            .map(|(slot, &src)| TubeFrame {
                index: slot.index,
                mask: self.frames[src].mask.clone(),
            })
            .collect();
        Ok(MaskTube {
            frames,
            ..self.clone_meta()
        })
    }

    fn clone_meta(&self) -> MaskTube {
        MaskTube {
            tube_id: self.tube_id.clone(),
            category: self.category.clone(),
            height: self.height,
            width: self.width,
            frames: Vec::new(),
        }
    }
}

pub(crate) fn check_permutation(perm: &[usize], len: usize) -> Result<(), ModelError> {
    let mut seen = vec![false; len];
    if perm.len() != len {
        return Err(ModelError::InvalidPermutation(perm.to_vec()));
    }
    for &p in perm {
        if p >= len || std::mem::replace(&mut seen[p], true) {
            return Err(ModelError::InvalidPermutation(perm.to_vec()));
        }
    }
    Ok(())
}

/// Volume IoU of two tubes over the union of their frame indices; a frame
/// missing from one tube counts as an empty mask there. Returns 0 when both
/// volumes are empty.
pub fn viou(a: &MaskTube, b: &MaskTube) -> Result<f64, ModelError> {
    if (a.height, a.width) != (b.height, b.width) {
        return Err(ModelError::DimensionMismatch {
            expected: (a.height, a.width),
            found: b.height * b.width,
        });
    }
    let (mut inter, mut union) = (0usize, 0usize);
    let (fa, fb) = (&a.frames, &b.frames);
    let (mut i, mut j) = (0, 0);
    while i < fa.len() || j < fb.len() {
        match (fa.get(i), fb.get(j)) {
            (Some(x), Some(y)) if x.index == y.index => {
                inter += x.mask.intersection_area(&y.mask);
                union += x.mask.union_area(&y.mask);
                i += 1;
                j += 1;
            }
            (Some(x), Some(y)) if x.index < y.index => {
                union += x.mask.area();
                i += 1;
            }
            (Some(_), Some(y)) => {
                union += y.mask.area();
                j += 1;
            }
            (Some(x), None) => {
                union += x.mask.area();
                i += 1;
            }
            (None, Some(y)) => {
                union += y.mask.area();
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    Ok(if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tube(id: &str, frames: Vec<(u32, Mask)>) -> MaskTube {
        let (h, w) = frames[0].1.dims();
        let frames = frames
            .into_iter()
            .map(|(index, mask)| TubeFrame { index, mask })
            .collect();
        MaskTube::new(id, "thing", h, w, frames).unwrap()
    }

    fn square(h: usize, w: usize, y0: usize, x0: usize, side: usize) -> Mask {
        let mut m = Mask::empty(h, w);
        for y in y0..y0 + side {
            for x in x0..x0 + side {
                m.set(y, x, true);
            }
        }
        m
    }

    #[test]
    fn viou_of_tube_with_itself_is_one() {
        let t = tube("a", vec![(0, square(6, 6, 1, 1, 2)), (1, square(6, 6, 2, 2, 2))]);
        assert_eq!(viou(&t, &t).unwrap(), 1.0);
    }

    #[test]
    fn viou_of_disjoint_tubes_is_zero() {
        let a = tube("a", vec![(0, square(6, 6, 0, 0, 2))]);
        let b = tube("b", vec![(0, square(6, 6, 3, 3, 2))]);
        assert_eq!(viou(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn viou_of_offset_squares_counts_cells() {
        // 2x2 squares shifted by one column: |∩| = 2, |∪| = 6.
        let a = tube("a", vec![(0, square(4, 4, 0, 0, 2))]);
        let b = tube("b", vec![(0, square(4, 4, 0, 1, 2))]);
        assert!((viou(&a, &b).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn viou_pads_missing_frames_with_empty_masks() {
        let a = tube("a", vec![(0, square(4, 4, 0, 0, 2)), (1, square(4, 4, 0, 0, 2))]);
        let b = tube("b", vec![(1, square(4, 4, 0, 0, 2))]);
        assert!((viou(&a, &b).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn viou_rejects_mismatched_canvas() {
        let a = tube("a", vec![(0, square(4, 4, 0, 0, 2))]);
        let b = tube("b", vec![(0, square(5, 4, 0, 0, 2))]);
        assert!(viou(&a, &b).is_err());
    }

    #[test]
    fn viou_of_empty_volumes_is_zero() {
        let a = tube("a", vec![(0, Mask::empty(3, 3))]);
        assert_eq!(viou(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn rejects_unsorted_frames() {
        let frames = vec![
            TubeFrame { index: 2, mask: Mask::empty(2, 2) },
            TubeFrame { index: 2, mask: Mask::empty(2, 2) },
        ];
        assert!(matches!(
            MaskTube::new("t", "c", 2, 2, frames),
            Err(ModelError::FrameOrder { index: 2, .. })
        ));
    }

    #[test]
    fn permute_keeps_indices_and_moves_masks() {
        let t = tube("a", vec![(3, square(4, 4, 0, 0, 1)), (5, square(4, 4, 2, 2, 1))]);
        let p = t.permute_frames(&[1, 0]).unwrap();
        assert_eq!(p.frames()[0].index, 3);
        assert_eq!(p.frames()[0].mask, t.frames()[1].mask);
        assert!(t.permute_frames(&[0, 0]).is_err());
    }

    fn random_tube(id: &'static str, cells: Vec<bool>, frames: usize) -> MaskTube {
        let per = cells.len() / frames;
        let fs = (0..frames)
            .map(|f| TubeFrame {
                index: f as u32,
                mask: Mask::from_cells(3, per / 3, cells[f * per..(f + 1) * per].to_vec()).unwrap(),
            })
            .collect();
        MaskTube::new(id, "c", 3, per / 3, fs).unwrap()
    }

    proptest! {
        #[test]
        fn viou_is_symmetric_and_bounded(
            a in prop::collection::vec(any::<bool>(), 36),
            b in prop::collection::vec(any::<bool>(), 36),
        ) {
            let ta = random_tube("a", a, 3);
            let tb = random_tube("b", b, 3);
            let ab = viou(&ta, &tb).unwrap();
            prop_assert_eq!(ab, viou(&tb, &ta).unwrap());
            prop_assert!((0.0..=1.0).contains(&ab));
            if ta.frames().iter().any(|f| !f.mask.is_empty()) {
                prop_assert_eq!(viou(&ta, &ta).unwrap(), 1.0);
            }
        }

        #[test]
        fn growing_both_masks_at_a_cell_never_lowers_frame_iou(
            a in prop::collection::vec(any::<bool>(), 16),
            b in prop::collection::vec(any::<bool>(), 16),
            cell in 0usize..16,
        ) {
            let ma = Mask::from_cells(4, 4, a).unwrap();
            let mb = Mask::from_cells(4, 4, b).unwrap();
            let before = tube("a", vec![(0, ma.clone())]);
            let before_b = tube("b", vec![(0, mb.clone())]);
            let (mut ga, mut gb) = (ma, mb);
            ga.set(cell / 4, cell % 4, true);
            gb.set(cell / 4, cell % 4, true);
            let after = viou(&tube("a", vec![(0, ga)]), &tube("b", vec![(0, gb)])).unwrap();
            prop_assert!(after >= viou(&before, &before_b).unwrap());
        }
    }
}
