//! Strong-motion tube selection from optical flow.
//!
//! A tube's score is the largest, over its frames, of the median Sobel
//! response of the flow-magnitude map taken over the tube's mask pixels that
//! sit on a flow edge. Camera pans move the whole frame alike and so leave no
//! edges; only motion that differs from its surroundings scores.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{FlowField, FlowMap, MaskTube};

/// Default selection threshold.
pub const DEFAULT_GAMMA: f64 = 9.0;
/// Edge responses at or below this value are ignored.
pub const DEFAULT_EDGE_EPS: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MotionError {
    #[error("grid is {height}x{width}; the Sobel filter needs at least 3x3")]
    GridTooSmall { height: usize, width: usize },
    #[error("tube {tube_id} is {tube:?} but the flow is {flow:?}")]
    DimensionMismatch {
        tube_id: String,
        tube: (usize, usize),
        flow: (usize, usize),
    },
    #[error("flow has no transitions")]
    NoTransitions,
}

/// Row-major scalar grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub height: usize,
    pub width: usize,
    pub values: Vec<f64>,
}

impl Grid {
    pub fn new(height: usize, width: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), height * width, "grid size");
        Self { height, width, values }
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize) -> f64 {
        self.values[y * self.width + x]
    }
}

pub fn flow_magnitude(map: &FlowMap) -> Grid {
    let values = map
        .vectors()
        .iter()
        .map(|v| f64::from(v[0]).hypot(f64::from(v[1])))
        .collect();
    Grid::new(map.height(), map.width(), values)
}

/// Sobel gradient magnitude with edge-replicated borders.
pub fn sobel_edges(mag: &Grid) -> Result<Grid, MotionError> {
    let (h, w) = (mag.height, mag.width);
    if h < 3 || w < 3 {
        return Err(MotionError::GridTooSmall { height: h, width: w });
    }
    let at = |y: isize, x: isize| mag.get(y.clamp(0, h as isize - 1) as usize, x.clamp(0, w as isize - 1) as usize);
    let mut values = Vec::with_capacity(h * w);
    for y in 0..h as isize {
        for x in 0..w as isize {
            let gx = (at(y - 1, x + 1) + 2.0 * at(y, x + 1) + at(y + 1, x + 1))
                - (at(y - 1, x - 1) + 2.0 * at(y, x - 1) + at(y + 1, x - 1));
            let gy = (at(y + 1, x - 1) + 2.0 * at(y + 1, x) + at(y + 1, x + 1))
                - (at(y - 1, x - 1) + 2.0 * at(y - 1, x) + at(y - 1, x + 1));
            values.push(gx.hypot(gy));
        }
    }
    Ok(Grid::new(h, w, values))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotionScore {
    pub tube_id: String,
    #[serde(rename = "per_frame")]
    pub per_frame_medians: Vec<f64>,
    pub score: f64,
    pub passed: bool,
}

/// Scores a tube against `flow`. Frame `t` uses transition `t → t+1`; frames
/// past the last transition reuse it.
///
/// `passed` is left false; [`select_strong_motion`] sets it for a threshold.
pub fn tube_motion_score(tube: &MaskTube, flow: &FlowField, edge_eps: f64) -> Result<MotionScore, MotionError> {
    if (tube.height(), tube.width()) != (flow.height(), flow.width()) {
        return Err(MotionError::DimensionMismatch {
            tube_id: tube.tube_id().to_owned(),
            tube: (tube.height(), tube.width()),
            flow: (flow.height(), flow.width()),
        });
    }
    let transitions = flow.transitions();
    if transitions.is_empty() {
        return Err(MotionError::NoTransitions);
    }
    let mut edges: Vec<Option<Grid>> = vec![None; transitions.len()];
    let mut per_frame = Vec::with_capacity(tube.len());
    for frame in tube.frames() {
        let k = (frame.index as usize).min(transitions.len() - 1);
        if edges[k].is_none() {
            edges[k] = Some(sobel_edges(&flow_magnitude(&transitions[k]))?);
        }
        let grid = edges[k].as_ref().expect("filled above");
        let mut inside: Vec<f64> = frame
            .mask
            .cells()
            .iter()
            .zip(&grid.values)
            .filter(|(&m, &e)| m && e > edge_eps)
            .map(|(_, &e)| e)
            .collect();
        per_frame.push(median(&mut inside));
    }
    let score = per_frame.iter().copied().fold(0.0, f64::max);
    Ok(MotionScore {
        tube_id: tube.tube_id().to_owned(),
        per_frame_medians: per_frame,
        score,
        passed: false,
    })
}

fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Selection {
    pub passing: Vec<String>,
    pub scores: Vec<MotionScore>,
}

/// Tubes whose score exceeds `gamma`, with the full report in input order.
pub fn select_strong_motion<'a>(
    tubes: impl IntoIterator<Item = &'a MaskTube>,
    flow: &FlowField,
    gamma: f64,
    edge_eps: f64,
) -> Result<Selection, MotionError> {
    let mut scores = Vec::new();
    for tube in tubes {
        let mut s = tube_motion_score(tube, flow, edge_eps)?;
        s.passed = s.score > gamma;
        scores.push(s);
    }
    let passing = scores.iter().filter(|s| s.passed).map(|s| s.tube_id.clone()).collect();
    Ok(Selection { passing, scores })
}
