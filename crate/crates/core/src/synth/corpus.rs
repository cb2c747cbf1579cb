use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::scene::{generate_scene, EntitySpec, RelationSpec, ScenarioSpec, Scene, Shape, Trajectory};
use super::SynthError;
use crate::model::{FamilyKey, FlowField, TubeBank};

/// The five relation families, each with its own motion pattern.
pub const RELATIONS: [&str; 5] = ["circling", "chasing", "moving_toward", "next_to", "on"];

/// Category triple of each entry of [`RELATIONS`].
pub fn relation_family(relation: &str) -> Option<FamilyKey> {
    let (s, o) = match relation {
        "on" => ("ball", "table"),
        "next_to" => ("person", "table"),
        "moving_toward" => ("person", "ball"),
        "chasing" => ("dog", "ball"),
        "circling" => ("dog", "person"),
        _ => return None,
    };
    Some(FamilyKey::new(s, relation, o))
}

/// `on` and `next_to` are static; the rest move.
pub fn is_static_relation(relation: &str) -> bool {
    matches!(relation, "on" | "next_to")
}

/// Layout of a generated corpus. Each video stacks `relations_per_video`
/// horizontal lanes of `lane_height` pixels, one relation per lane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub num_videos: usize,
    pub seed: u64,
    pub num_frames: u32,
    pub width: usize,
    pub lane_height: usize,
    pub relations_per_video: usize,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        Self {
            num_videos: 8,
            seed: 42,
            num_frames: 4,
            width: 128,
            lane_height: 48,
            relations_per_video: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub specs: Vec<ScenarioSpec>,
    pub bank: TubeBank,
    pub flows: Vec<FlowField>,
}

impl Corpus {
    pub fn flow(&self, video_id: &str) -> Option<&FlowField> {
        self.flows.iter().find(|f| f.video_id == video_id)
    }
}

/// Video `v` holds relations `v, v+1, …` (cyclically), each in its own fixed lane, so
/// every family recurs across videos with fresh positions, sizes and speeds.
pub fn make_corpus(spec: &CorpusSpec) -> Result<Corpus, SynthError> {
    if spec.relations_per_video == 0 || spec.relations_per_video > RELATIONS.len() {
        return Err(SynthError::InvalidSpec(format!(
            "relations_per_video must be in 1..={}",
            RELATIONS.len()
        )));
    }
    if spec.num_frames < 2 || spec.width < 128 || spec.lane_height < 48 {
        return Err(SynthError::InvalidSpec(
            "corpus needs at least 2 frames, width 128 and lane height 48".into(),
        ));
    }
    let mut specs = Vec::with_capacity(spec.num_videos);
    let mut scenes: Vec<Scene> = Vec::with_capacity(spec.num_videos);
    for v in 0..spec.num_videos {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(v as u64);
        let video = video_spec(spec, v, &mut rng);
        scenes.push(generate_scene(&video)?);
        specs.push(video);
    }
    let (videos, flows) = scenes.into_iter().map(|s| (s.video, s.flow)).unzip();
    Ok(Corpus {
        specs,
        bank: TubeBank { videos },
        flows,
    })
}

fn video_spec(spec: &CorpusSpec, v: usize, rng: &mut ChaCha8Rng) -> ScenarioSpec {
    let mut entities = Vec::new();
    let mut relations = Vec::new();
    for k in 0..spec.relations_per_video {
        let lane = (v + k) % RELATIONS.len();
        let relation = RELATIONS[lane];
        let top = (lane * spec.lane_height) as f64;
        let (sub, obj) = lane_entities(relation, lane, top, spec.num_frames, rng);
        relations.push(RelationSpec {
            subject: sub.id.clone(),
            relation: relation.to_owned(),
            object: obj.id.clone(),
            begin: 0,
            end: spec.num_frames - 1,
        });
        entities.extend([sub, obj]);
    }
    ScenarioSpec {
        video_id: format!("v{v:02}"),
        seed: spec.seed,
        height: spec.lane_height * RELATIONS.len(),
        width: spec.width,
        num_frames: spec.num_frames,
        pan: [0.0, 0.0],
        entities,
        relations,
    }
}

fn entity(lane: usize, category: &str, shape: Shape, start: [f64; 2], trajectory: Trajectory) -> EntitySpec {
    EntitySpec {
        id: format!("l{lane}.{category}"),
        category: category.to_owned(),
        shape,
        start,
        trajectory,
    }
}

/// Subject and object of one lane, in lane coordinates offset by `top`.
/// Layouts fit a 128 x 48 lane; speeds are scaled so the total travel over
/// `frames` frames stays the same as over six.
fn lane_entities(
    relation: &str,
    lane: usize,
    top: f64,
    frames: u32,
    rng: &mut ChaCha8Rng,
) -> (EntitySpec, EntitySpec) {
    let mid = top + 24.0;
    let pace = 5.0 / f64::from(frames.max(2) - 1);
    match relation {
        "on" => {
            let (tw, th) = (rng.gen_range(28.0..40.0), rng.gen_range(8.0..10.0));
            let tx = rng.gen_range(30.0..98.0);
            let ty = top + 34.0;
            let r = rng.gen_range(4.0..6.0);
            let bx = tx + rng.gen_range(-6.0..6.0);
            let table = entity(lane, "table", Shape::Rect { width: tw, height: th }, [tx, ty], Trajectory::Static);
            let ball = entity(lane, "ball", Shape::Disc { radius: r }, [bx, ty - th / 2.0 - r - 1.0], Trajectory::Static);
            (ball, table)
        }
        "next_to" => {
            let (tw, th) = (rng.gen_range(28.0..40.0), rng.gen_range(8.0..10.0));
            let tx = rng.gen_range(60.0..98.0);
            let (pw, ph) = (rng.gen_range(8.0..10.0), rng.gen_range(20.0..24.0));
            let floor = top + 40.0;
            let px = tx - tw / 2.0 - rng.gen_range(3.0..6.0) - pw / 2.0;
            let table = entity(lane, "table", Shape::Rect { width: tw, height: th }, [tx, floor - th / 2.0], Trajectory::Static);
            let person = entity(lane, "person", Shape::Rect { width: pw, height: ph }, [px, floor - ph / 2.0], Trajectory::Static);
            (person, table)
        }
        "moving_toward" => {
            let (pw, ph) = (rng.gen_range(8.0..10.0), rng.gen_range(16.0..20.0));
            let start = [rng.gen_range(10.0..16.0), mid];
            let velocity = [rng.gen_range(9.0..11.0) * pace, 0.0];
            let accel = [rng.gen_range(1.0..2.0) * pace * pace, 0.0];
            let r = rng.gen_range(4.0..6.0);
            let ball_at = [122.0 - r - rng.gen_range(0.0..2.0), mid + rng.gen_range(-4.0..4.0)];
            let person = entity(
                lane,
                "person",
                Shape::Rect { width: pw, height: ph },
                start,
                Trajectory::Accelerating { velocity, accel },
            );
            let ball = entity(lane, "ball", Shape::Disc { radius: r }, ball_at, Trajectory::Static);
            (person, ball)
        }
        "chasing" => {
            let speed = rng.gen_range(12.0..15.0) * pace;
            let y = mid + rng.gen_range(-4.0..4.0);
            let dog_x = rng.gen_range(8.0..12.0);
            let ball_x = dog_x + rng.gen_range(20.0..26.0);
            let velocity = [speed, 0.0];
            let dog = entity(
                lane,
                "dog",
                Shape::Disc {
                    radius: rng.gen_range(4.0..5.0),
                },
                [dog_x, y],
                Trajectory::Linear { velocity },
            );
            let ball = entity(
                lane,
                "ball",
                Shape::Disc {
                    radius: rng.gen_range(3.0..5.0),
                },
                [ball_x, y + rng.gen_range(-2.0..2.0)],
                Trajectory::Linear { velocity },
            );
            (dog, ball)
        }
        "circling" => {
            let centre = [rng.gen_range(40.0..88.0), mid];
            let radius = rng.gen_range(16.0..18.0);
            let speed: f64 = rng.gen_range(12.0..16.0) * pace.min(2.0);
            // Chord length per frame equals `speed`.
            let omega = 2.0 * (speed / (2.0 * radius)).asin();
            let phase = rng.gen_range(0.0..std::f64::consts::TAU);
            let person = entity(
                lane,
                "person",
                Shape::Rect {
                    width: 8.0,
                    height: rng.gen_range(10.0..12.0),
                },
                centre,
                Trajectory::Static,
            );
            let dog = entity(
                lane,
                "dog",
                Shape::Disc {
                    radius: rng.gen_range(3.5..4.5),
                },
                centre,
                Trajectory::Circular {
                    centre,
                    radius,
                    omega,
                    phase,
                },
            );
            (dog, person)
        }
        other => unreachable!("no layout for relation {other}"),
    }
}

/// A square moving right at `speed` px/frame above a static square of the
/// same size, on a `48 x 128` canvas over five frames.
pub fn motion_calibration_scene(speed: f64) -> Result<Scene, SynthError> {
    let square = Shape::Rect {
        width: 12.0,
        height: 12.0,
    };
    generate_scene(&ScenarioSpec {
        video_id: "calibration".into(),
        seed: 0,
        height: 48,
        width: 128,
        num_frames: 5,
        pan: [0.0, 0.0],
        entities: vec![
            EntitySpec {
                id: "mover".into(),
                category: "ball".into(),
                shape: square,
                start: [10.0, 14.0],
                trajectory: Trajectory::Linear { velocity: [speed, 0.0] },
            },
            EntitySpec {
                id: "static".into(),
                category: "table".into(),
                shape: square,
                start: [64.0, 36.0],
                trajectory: Trajectory::Static,
            },
        ],
        relations: Vec::new(),
    })
}

/// Two entities at rest in the world, filmed by a camera panning at `pan`.
pub fn pan_scene(pan: [f64; 2]) -> Result<Scene, SynthError> {
    generate_scene(&ScenarioSpec {
        video_id: "pan".into(),
        seed: 0,
        height: 48,
        width: 128,
        num_frames: 5,
        pan,
        entities: vec![
            EntitySpec {
                id: "disc".into(),
                category: "ball".into(),
                shape: Shape::Disc { radius: 6.0 },
                start: [40.0, 16.0],
                trajectory: Trajectory::Static,
            },
            EntitySpec {
                id: "box".into(),
                category: "table".into(),
                shape: Shape::Rect {
                    width: 20.0,
                    height: 10.0,
                },
                start: [70.0, 34.0],
                trajectory: Trajectory::Static,
            },
        ],
        relations: Vec::new(),
    })
}
