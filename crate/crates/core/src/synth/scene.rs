use serde::{Deserialize, Serialize};

use super::SynthError;
use crate::model::{FlowField, FlowMap, Mask, MaskTube, TripletInstance, TubeFrame, Video};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Shape {
    /// Axis-aligned, centred on the entity position.
    Rect { width: f64, height: f64 },
    Disc { radius: f64 },
}

impl Shape {
    fn half_extent(&self) -> (f64, f64) {
        match *self {
            Shape::Rect { width, height } => (width / 2.0, height / 2.0),
            Shape::Disc { radius } => (radius, radius),
        }
    }

    fn contains(&self, centre: [f64; 2], x: f64, y: f64) -> bool {
        let (dx, dy) = (x - centre[0], y - centre[1]);
        match *self {
            Shape::Rect { width, height } => {
                dx >= -width / 2.0 && dx < width / 2.0 && dy >= -height / 2.0 && dy < height / 2.0
            }
            Shape::Disc { radius } => dx * dx + dy * dy <= radius * radius,
        }
    }
}

/// World-space path of an entity's centre; `t` counts frames from 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Trajectory {
    Static,
    Linear { velocity: [f64; 2] },
    /// Displacement over transition `t → t+1` is `velocity + t·accel`.
    Accelerating { velocity: [f64; 2], accel: [f64; 2] },
    /// Circle around `centre`; the start position is ignored.
    Circular {
        centre: [f64; 2],
        radius: f64,
        omega: f64,
        phase: f64,
    },
}

impl Trajectory {
    pub fn position(&self, start: [f64; 2], t: u32) -> [f64; 2] {
        let tf = f64::from(t);
        match *self {
            Trajectory::Static => start,
            Trajectory::Linear { velocity } => [start[0] + velocity[0] * tf, start[1] + velocity[1] * tf],
            Trajectory::Accelerating { velocity, accel } => {
                let k = tf * (tf - 1.0) / 2.0;
                [
                    start[0] + velocity[0] * tf + accel[0] * k,
                    start[1] + velocity[1] * tf + accel[1] * k,
                ]
            }
            Trajectory::Circular {
                centre,
                radius,
                omega,
                phase,
            } => {
                let a = phase + omega * tf;
                [centre[0] + radius * a.cos(), centre[1] + radius * a.sin()]
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntitySpec {
    pub id: String,
    pub category: String,
    pub shape: Shape,
    pub start: [f64; 2],
    pub trajectory: Trajectory,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationSpec {
    pub subject: String,
    pub relation: String,
    pub object: String,
    pub begin: u32,
    pub end: u32,
}

/// One synthetic video. Positions are in pixels with `(0, 0)` at the top-left
/// corner of the canvas; the camera pan shifts everything in the image by
/// `pan` per frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub video_id: String,
    pub seed: u64,
    pub height: usize,
    pub width: usize,
    pub num_frames: u32,
    #[serde(default)]
    pub pan: [f64; 2],
    pub entities: Vec<EntitySpec>,
    pub relations: Vec<RelationSpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub video: Video,
    pub flow: FlowField,
}

impl ScenarioSpec {
    /// Image-space centre of entity `e` at frame `t`.
    pub fn image_position(&self, e: &EntitySpec, t: u32) -> [f64; 2] {
        let p = e.trajectory.position(e.start, t);
        let tf = f64::from(t);
        [p[0] + self.pan[0] * tf, p[1] + self.pan[1] * tf]
    }
}

/// Rasterizes every entity, checks containment and disjointness, and emits
/// the analytic flow: entity pixels carry the entity's image displacement to
/// the next frame and background pixels carry the pan.
pub fn generate_scene(spec: &ScenarioSpec) -> Result<Scene, SynthError> {
    let (h, w) = (spec.height, spec.width);
    if spec.num_frames == 0 || h == 0 || w == 0 {
        return Err(SynthError::InvalidSpec("canvas and frame count must be positive".into()));
    }
    for (i, e) in spec.entities.iter().enumerate() {
        if spec.entities[..i].iter().any(|f| f.id == e.id) {
            return Err(SynthError::InvalidSpec(format!("entity {} is defined twice", e.id)));
        }
    }

    let mut masks: Vec<Vec<Mask>> = Vec::with_capacity(spec.entities.len());
    for e in &spec.entities {
        let (hx, hy) = e.shape.half_extent();
        let mut frames = Vec::with_capacity(spec.num_frames as usize);
        for t in 0..spec.num_frames {
            let c = spec.image_position(e, t);
            if c[0] - hx < 0.0 || c[1] - hy < 0.0 || c[0] + hx > w as f64 || c[1] + hy > h as f64 {
                return Err(SynthError::OutOfCanvas {
                    entity: e.id.clone(),
                    frame: t,
                });
            }
            frames.push(rasterize(&e.shape, c, h, w));
        }
        masks.push(frames);
    }
    for t in 0..spec.num_frames as usize {
        for i in 0..masks.len() {
            for j in i + 1..masks.len() {
                if masks[i][t].overlaps(&masks[j][t]) {
                    return Err(SynthError::Overlap {
                        first: spec.entities[i].id.clone(),
                        second: spec.entities[j].id.clone(),
                        frame: t as u32,
                    });
                }
            }
        }
    }

    let pan = [spec.pan[0] as f32, spec.pan[1] as f32];
    let mut transitions = Vec::with_capacity(spec.num_frames.saturating_sub(1) as usize);
    for t in 0..spec.num_frames.saturating_sub(1) {
        let mut map = FlowMap::uniform(h, w, pan);
        for (e, frames) in spec.entities.iter().zip(&masks) {
            let (a, b) = (spec.image_position(e, t), spec.image_position(e, t + 1));
            let v = [(b[0] - a[0]) as f32, (b[1] - a[1]) as f32];
            let mask = &frames[t as usize];
            for y in 0..h {
                for x in 0..w {
                    if mask.get(y, x) {
                        map.set(y, x, v);
                    }
                }
            }
        }
        transitions.push(map);
    }

    let tubes = spec
        .entities
        .iter()
        .zip(masks)
        .map(|(e, frames)| {
            let frames = frames
                .into_iter()
                .enumerate()
                .map(|(t, mask)| TubeFrame { index: t as u32, mask })
                .collect();
            MaskTube::new(e.id.clone(), e.category.clone(), h, w, frames)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let triplets = spec
        .relations
        .iter()
        .map(|r| TripletInstance {
            video_id: spec.video_id.clone(),
            subject: r.subject.clone(),
            object: r.object.clone(),
            relation: r.relation.clone(),
            begin: r.begin,
            end: r.end,
            confidence: None,
        })
        .collect();
    let video = Video {
        video_id: spec.video_id.clone(),
        num_frames: spec.num_frames,
        height: h,
        width: w,
        tubes,
        triplets,
    };
    video.validate()?;
    let flow = FlowField::new(spec.video_id.clone(), h, w, transitions)?;
    Ok(Scene { video, flow })
}

/// Pixel `(x, y)` is set when its centre `(x + ½, y + ½)` lies in the shape.
fn rasterize(shape: &Shape, centre: [f64; 2], h: usize, w: usize) -> Mask {
    let mut m = Mask::empty(h, w);
    let (hx, hy) = shape.half_extent();
    let x0 = (centre[0] - hx).floor().max(0.0) as usize;
    let y0 = (centre[1] - hy).floor().max(0.0) as usize;
    let x1 = ((centre[0] + hx).ceil() as usize).min(w);
    let y1 = ((centre[1] + hy).ceil() as usize).min(h);
    for y in y0..y1 {
        for x in x0..x1 {
            if shape.contains(centre, x as f64 + 0.5, y as f64 + 0.5) {
                m.set(y, x, true);
            }
        }
    }
    m
}
