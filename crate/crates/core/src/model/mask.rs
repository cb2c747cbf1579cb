//! Binary segmentation masks and their run-length encoding.
//!
//! Runs alternate zero/one in row-major order and always start with a zero
//! run, which may have length 0 when the first cell is set.

use super::ModelError;

/// A binary `height × width` grid, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    height: usize,
    width: usize,
    cells: Vec<bool>,
}

impl Mask {
    /// An all-zero mask.
    pub fn empty(height: usize, width: usize) -> Self {
        Self {
            height,
            width,
            cells: vec![false; height * width],
        }
    }

    pub fn from_cells(height: usize, width: usize, cells: Vec<bool>) -> Result<Self, ModelError> {
        if cells.len() != height * width {
            return Err(ModelError::DimensionMismatch {
                expected: (height, width),
                found: cells.len(),
            });
        }
        Ok(Self {
            height,
            width,
            cells,
        })
    }

    /// Builds a mask from rows of 0/1 values. Panics on ragged rows; meant for
    /// tests and small hand-written fixtures.
    pub fn from_rows(rows: &[&[u8]]) -> Self {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.len());
        let mut cells = Vec::with_capacity(height * width);
        for row in rows {
            assert_eq!(row.len(), width, "ragged mask rows");
            cells.extend(row.iter().map(|&v| v != 0));
        }
        Self {
            height,
            width,
            cells,
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize) -> bool {
        self.cells[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, y: usize, x: usize, value: bool) {
        self.cells[y * self.width + x] = value;
    }

    /// Number of set cells.
    pub fn area(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.cells.iter().any(|&c| c)
    }

    /// Mean pixel-center coordinate `(x, y)` of the set cells, or `None` for an
    /// empty mask.
    pub fn centroid(&self) -> Option<(f64, f64)> {
        let mut n = 0usize;
        let mut sx = 0.0;
        let mut sy = 0.0;
        for (i, &c) in self.cells.iter().enumerate() {
            if c {
                n += 1;
                sx += (i % self.width) as f64 + 0.5;
                sy += (i / self.width) as f64 + 0.5;
            }
        }
        (n > 0).then(|| (sx / n as f64, sy / n as f64))
    }

    pub fn intersection_area(&self, other: &Mask) -> usize {
        self.cells
            .iter()
            .zip(&other.cells)
            .filter(|(&a, &b)| a && b)
            .count()
    }

    pub fn union_area(&self, other: &Mask) -> usize {
        self.cells
            .iter()
            .zip(&other.cells)
            .filter(|(&a, &b)| a || b)
            .count()
    }

    pub fn overlaps(&self, other: &Mask) -> bool {
        self.cells.iter().zip(&other.cells).any(|(&a, &b)| a && b)
    }
}

/// Run-length encodes a mask in row-major order, starting with a zero run.
pub fn rle_encode(mask: &Mask) -> Vec<u32> {
    let mut runs = Vec::new();
    let mut current = false;
    let mut len = 0u32;
    for &cell in &mask.cells {
        if cell == current {
            len += 1;
        } else {
            runs.push(len);
            current = cell;
            len = 1;
        }
    }
    runs.push(len);
    runs
}

/// Decodes runs produced by [`rle_encode`]. The runs must sum to exactly
/// `height · width`.
pub fn rle_decode(runs: &[u32], height: usize, width: usize) -> Result<Mask, ModelError> {
    let expected = height * width;
    let total: u64 = runs.iter().map(|&r| u64::from(r)).sum();
    if total != expected as u64 {
        return Err(ModelError::RleLength {
            expected,
            found: total,
        });
    }
    let mut cells = Vec::with_capacity(expected);
    let mut value = false;
    for &run in runs {
        cells.extend(std::iter::repeat_n(value, run as usize));
        value = !value;
    }
    Ok(Mask {
        height,
        width,
        cells,
    })
}
