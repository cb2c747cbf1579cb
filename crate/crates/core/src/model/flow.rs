use super::ModelError;

/// Dense displacement map for one frame transition, in pixels per frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowMap {
    height: usize,
    width: usize,
    /// `(dx, dy)` per pixel, row-major.
    vectors: Vec<[f32; 2]>,
}

impl FlowMap {
    pub fn uniform(height: usize, width: usize, v: [f32; 2]) -> Self {
        Self {
            height,
            width,
            vectors: vec![v; height * width],
        }
    }

    pub fn from_vectors(height: usize, width: usize, vectors: Vec<[f32; 2]>) -> Result<Self, ModelError> {
        if vectors.len() != height * width {
            return Err(ModelError::DimensionMismatch {
                expected: (height, width),
                found: vectors.len(),
            });
        }
        if vectors.iter().flatten().any(|v| !v.is_finite()) {
            return Err(ModelError::NonFiniteFlow);
        }
        Ok(Self {
            height,
            width,
            vectors,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn vectors(&self) -> &[[f32; 2]] {
        &self.vectors
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize) -> [f32; 2] {
        self.vectors[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, y: usize, x: usize, v: [f32; 2]) {
        self.vectors[y * self.width + x] = v;
    }
}

/// Optical flow of a video: transition `i` maps frame `i` to frame `i + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowField {
    pub video_id: String,
    height: usize,
    width: usize,
    transitions: Vec<FlowMap>,
}

impl FlowField {
    pub fn new(
        video_id: impl Into<String>,
        height: usize,
        width: usize,
        transitions: Vec<FlowMap>,
    ) -> Result<Self, ModelError> {
        if let Some(m) = transitions.iter().find(|m| (m.height, m.width) != (height, width)) {
            return Err(ModelError::DimensionMismatch {
                expected: (height, width),
                found: m.height * m.width,
            });
        }
        Ok(Self {
            video_id: video_id.into(),
            height,
            width,
            transitions,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn transitions(&self) -> &[FlowMap] {
        &self.transitions
    }

    /// Multiplies every vector by `factor`.
    pub fn scaled(&self, factor: f32) -> FlowField {
        let transitions = self
            .transitions
            .iter()
            .map(|m| FlowMap {
                vectors: m.vectors.iter().map(|v| [v[0] * factor, v[1] * factor]).collect(),
                ..m.clone()
            })
            .collect();
        FlowField {
            transitions,
            ..self.clone()
        }
    }
}
