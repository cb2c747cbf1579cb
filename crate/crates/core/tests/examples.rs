//! Worked input/output cases across the pipeline.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tubegraph::contrastive::{
    encode_anchor, sample_positive, sample_triplet_negatives, shuffle_negative, triplet_negative_weights,
    ContrastiveError, ShuffleMode,
};
use tubegraph::metrics::{grounded_triplets, match_triplet, recall_at_k, GroundedTriplet, MetricsError, PredictedTriplet};
use tubegraph::model::{FamilyKey, Mask, MaskTube, TripletRef, TubeBank, TubeEmbedding, TubeFrame};
use tubegraph::motion::{select_strong_motion, tube_motion_score, DEFAULT_EDGE_EPS, DEFAULT_GAMMA};
use tubegraph::store::{bank_to_json, build_index};
use tubegraph::synth::{
    generate_scene, make_corpus, motion_calibration_scene, CorpusSpec, EntitySpec, RelationSpec, ScenarioSpec, Shape,
    Trajectory,
};
use tubegraph::transport::{ot_distance, pooled_similarity, similarity, OtConfig, PooledKind};

fn square(id: &str, category: &str, x: f64) -> EntitySpec {
    EntitySpec {
        id: id.into(),
        category: category.into(),
        shape: Shape::Rect {
            width: 6.0,
            height: 6.0,
        },
        start: [x, 10.0],
        trajectory: Trajectory::Static,
    }
}

fn relation(subject: &str, relation: &str, object: &str) -> RelationSpec {
    RelationSpec {
        subject: subject.into(),
        relation: relation.into(),
        object: object.into(),
        begin: 0,
        end: 2,
    }
}

fn scenario(video_id: &str, entities: Vec<EntitySpec>, relations: Vec<RelationSpec>) -> ScenarioSpec {
    ScenarioSpec {
        video_id: video_id.into(),
        seed: 0,
        height: 20,
        width: 80,
        num_frames: 3,
        pan: [0.0, 0.0],
        entities,
        relations,
    }
}

/// Video `a` holds (person, kicking, ball), (person, kicking, box) and
/// (dog, on, floor); video `b` holds one more (person, kicking, ball).
fn kicking_bank(with_cross_video_positive: bool) -> TubeBank {
    let a = scenario(
        "a",
        vec![
            square("p", "person", 5.0),
            square("b", "ball", 15.0),
            square("x", "box", 25.0),
            square("d", "dog", 35.0),
            square("f", "floor", 45.0),
        ],
        vec![
            relation("p", "kicking", "b"),
            relation("p", "kicking", "x"),
            relation("d", "on", "f"),
        ],
    );
    let mut videos = vec![generate_scene(&a).unwrap().video];
    if with_cross_video_positive {
        let b = scenario(
            "b",
            vec![square("p", "person", 10.0), square("b", "ball", 30.0)],
            vec![relation("p", "kicking", "b")],
        );
        videos.push(generate_scene(&b).unwrap().video);
    }
    TubeBank { videos }
}

fn anchor_ref() -> TripletRef {
    TripletRef {
        video_id: "a".into(),
        ordinal: 0,
    }
}

#[test]
fn similarity_of_identical_and_antipodal_tubes() {
    let h = TubeEmbedding::from_rows("h", &[vec![0.3, -1.0], vec![0.8, 0.2], vec![-0.5, 0.5]]).unwrap();
    let cold = OtConfig::default().with_tau(1e-4);
    assert!((similarity(&h, &h, 10.0, &cold).unwrap() - 10.0).abs() < 1e-3);
    assert!(ot_distance(&h, &h, &cold).unwrap().distance < 1e-3);

    let right = TubeEmbedding::from_rows("r", &vec![vec![1.0, 0.0]; 3]).unwrap();
    let left = TubeEmbedding::from_rows("l", &vec![vec![-1.0, 0.0]; 4]).unwrap();
    let s = similarity(&right, &left, 10.0, &OtConfig::default()).unwrap();
    assert!((s - 8.0).abs() < 1e-9);

    assert!((pooled_similarity(&h, &h, PooledKind::Cosine).unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(pooled_similarity(&h, &h, PooledKind::L2).unwrap(), 0.0);
}

#[test]
fn positive_is_forced_when_unique() {
    let bank = kicking_bank(true);
    let index = build_index(&bank).unwrap();
    for seed in 0..20 {
        let p = sample_positive(&anchor_ref(), &index, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        assert_eq!(p, TripletRef { video_id: "b".into(), ordinal: 0 });
    }
}

#[test]
fn same_video_match_is_not_a_positive() {
    let with_self = kicking_bank(false);
    let index = build_index(&with_self).unwrap();
    assert!(matches!(
        sample_positive(&anchor_ref(), &index, &mut ChaCha8Rng::seed_from_u64(0)),
        Err(ContrastiveError::NoPositive(_))
    ));
}

#[test]
fn hard_negative_weights_and_frequencies() {
    let anchor = FamilyKey::new("person", "kicking", "ball");
    let w = triplet_negative_weights(
        &anchor,
        &[FamilyKey::new("person", "kicking", "box"), FamilyKey::new("dog", "on", "floor")],
    )
    .unwrap();
    assert_eq!(w, vec![0.75, 0.25]);

    let bank = kicking_bank(true);
    let index = build_index(&bank).unwrap();
    let trials = 10_000;
    let mut kicking_box = 0;
    for seed in 0..trials {
        let drawn = sample_triplet_negatives(&anchor_ref(), &index, 1, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        kicking_box += usize::from(drawn[0].ordinal == 1);
    }
    let freq = kicking_box as f64 / f64::from(trials as u32);
    assert!((freq - 0.75).abs() < 0.02, "{freq}");

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let all = sample_triplet_negatives(&anchor_ref(), &index, 10, &mut rng).unwrap();
    assert_eq!(all.len(), 2);
    let again = sample_triplet_negatives(&anchor_ref(), &index, 10, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
    assert_eq!(all, again);
}

#[test]
fn static_anchor_is_unchanged_by_reencoding() {
    let bank = kicking_bank(false);
    let video = &bank.videos[0];
    let t = &video.triplets[0];
    let anchor = encode_anchor(video, t, 3).unwrap();
    let (s, o) = video.triplet_tubes(t).unwrap();
    let neg = shuffle_negative(&anchor, (s, o), &[2, 1, 0], ShuffleMode::Reencode, 3).unwrap();
    assert_eq!(neg.data(), anchor.joint.data());
}

#[test]
fn accelerating_tube_separates_from_its_reversal() {
    let mut ball = square("b", "ball", 4.0);
    ball.trajectory = Trajectory::Accelerating {
        velocity: [4.0, 0.0],
        accel: [6.0, 0.0],
    };
    let mut spec = ScenarioSpec {
        num_frames: 4,
        width: 64,
        ..scenario("acc", vec![ball, square("t", "table", 60.0)], vec![relation("b", "moving_toward", "t")])
    };
    spec.relations[0].end = 3;
    let video = generate_scene(&spec).unwrap().video;
    let t = &video.triplets[0];
    let anchor = encode_anchor(&video, t, 3).unwrap();
    let (s, o) = video.triplet_tubes(t).unwrap();
    let neg = shuffle_negative(&anchor, (s, o), &[3, 2, 1, 0], ShuffleMode::Reencode, 3).unwrap();
    let d = ot_distance(&anchor.joint, &neg, &OtConfig::default()).unwrap().distance;
    assert!(d > 0.05, "{d}");
}

#[test]
fn motion_filter_thresholds() {
    let scene = motion_calibration_scene(12.0).unwrap();
    let tubes = &scene.video.tubes;
    let mixed = select_strong_motion(tubes, &scene.flow, DEFAULT_GAMMA, DEFAULT_EDGE_EPS).unwrap();
    assert_eq!(mixed.passing, vec!["mover".to_owned()]);
    assert!(select_strong_motion(tubes, &scene.flow, f64::INFINITY, DEFAULT_EDGE_EPS)
        .unwrap()
        .passing
        .is_empty());
    let all = select_strong_motion(tubes, &scene.flow, 0.0, DEFAULT_EDGE_EPS).unwrap();
    assert_eq!(all.passing, vec!["mover".to_owned()]);

    let still = motion_calibration_scene(0.0).unwrap();
    for tube in &still.video.tubes {
        assert_eq!(tube_motion_score(tube, &still.flow, DEFAULT_EDGE_EPS).unwrap().score, 0.0);
    }
}

fn strip(id: &str, category: &str, cells: std::ops::Range<usize>) -> MaskTube {
    let mut mask = Mask::empty(1, 10);
    cells.for_each(|x| mask.set(0, x, true));
    MaskTube::new(id, category, 1, 10, vec![TubeFrame { index: 0, mask }]).unwrap()
}

fn triplet(relation: &str, subject: MaskTube, object: MaskTube) -> GroundedTriplet {
    GroundedTriplet {
        video_id: "v".into(),
        subject,
        object,
        relation: relation.into(),
    }
}

#[test]
fn triplet_matching_rules() {
    let gt = triplet("on", strip("s", "ball", 0..4), strip("o", "table", 0..10));
    let same = PredictedTriplet {
        triplet: gt.clone(),
        confidence: 1.0,
    };
    assert!(match_triplet(&same, &gt, 0.5).unwrap());
    let relabelled = PredictedTriplet {
        triplet: GroundedTriplet {
            relation: "under".into(),
            ..gt.clone()
        },
        confidence: 1.0,
    };
    assert!(!match_triplet(&relabelled, &gt, 0.5).unwrap());

    // Subject vIoU 2/5, object vIoU 9/10.
    let shifted = PredictedTriplet {
        triplet: triplet("on", strip("s", "ball", 2..5), strip("o", "table", 0..9)),
        confidence: 1.0,
    };
    assert!(!match_triplet(&shifted, &gt, 0.5).unwrap());
    assert!(match_triplet(&shifted, &gt, 0.1).unwrap());
}

#[test]
fn recall_edge_cases() {
    let corpus = make_corpus(&CorpusSpec::default()).unwrap();
    let gts = grounded_triplets(&corpus.bank.videos[0]).unwrap();
    let preds: Vec<PredictedTriplet> = gts
        .iter()
        .map(|g| PredictedTriplet {
            triplet: g.clone(),
            confidence: 0.5,
        })
        .collect();
    let r = recall_at_k(&preds, &gts, gts.len(), 0.5).unwrap();
    assert_eq!((r.recall, r.mean_recall), (1.0, 1.0));
    let none = recall_at_k(&[], &gts, 5, 0.5).unwrap();
    assert_eq!((none.recall, none.mean_recall), (0.0, 0.0));
    assert_eq!(recall_at_k(&preds, &gts, 0, 0.5), Err(MetricsError::InvalidK));
}

#[test]
fn static_disc_has_identical_masks_and_no_flow() {
    let disc = EntitySpec {
        id: "d".into(),
        category: "ball".into(),
        shape: Shape::Disc { radius: 4.0 },
        start: [20.0, 10.0],
        trajectory: Trajectory::Static,
    };
    let scene = generate_scene(&ScenarioSpec {
        num_frames: 5,
        ..scenario("disc", vec![disc], Vec::new())
    })
    .unwrap();
    let frames = scene.video.tubes[0].frames();
    assert_eq!(frames.len(), 5);
    assert!(frames.iter().all(|f| f.mask == frames[0].mask && !f.mask.is_empty()));
    assert!(scene
        .flow
        .transitions()
        .iter()
        .all(|m| m.vectors().iter().all(|v| *v == [0.0, 0.0])));
}

#[test]
fn linear_disc_moves_two_pixels_per_frame() {
    let disc = EntitySpec {
        id: "d".into(),
        category: "ball".into(),
        shape: Shape::Disc { radius: 3.0 },
        start: [10.0, 10.0],
        trajectory: Trajectory::Linear { velocity: [2.0, 0.0] },
    };
    let scene = generate_scene(&ScenarioSpec {
        num_frames: 5,
        ..scenario("disc", vec![disc], Vec::new())
    })
    .unwrap();
    let xs: Vec<f64> = scene.video.tubes[0]
        .frames()
        .iter()
        .map(|f| f.mask.centroid().unwrap().0)
        .collect();
    for w in xs.windows(2) {
        assert!((w[1] - w[0] - 2.0).abs() < 1e-12, "{xs:?}");
    }
}

#[test]
fn corpus_families_recur_across_videos() {
    let corpus = make_corpus(&CorpusSpec::default()).unwrap();
    assert_eq!(corpus.bank.videos.len(), 8);
    assert!(corpus.bank.videos.iter().all(|v| v.triplets.len() == 3));
    let index = build_index(&corpus.bank).unwrap();
    for r in index.all() {
        assert!(!index.positive_candidates(r).is_empty(), "{r:?}");
    }
    let again = make_corpus(&CorpusSpec::default()).unwrap();
    assert_eq!(bank_to_json(&corpus.bank), bank_to_json(&again.bank));
}

#[test]
fn static_relations_fail_the_motion_filter() {
    let corpus = make_corpus(&CorpusSpec::default()).unwrap();
    let mut seen = 0;
    for video in &corpus.bank.videos {
        let flow = corpus.flow(&video.video_id).unwrap();
        for t in video.triplets.iter().filter(|t| t.relation == "on") {
            let pair = encode_anchor(video, t, 3).unwrap();
            for row in pair.sub.rows().chain(pair.obj.rows()) {
                assert!(row[3..7].iter().all(|v| v.abs() < 1e-12), "{row:?}");
            }
            let (s, o) = video.triplet_tubes(t).unwrap();
            let sel = select_strong_motion([s, o], flow, DEFAULT_GAMMA, DEFAULT_EDGE_EPS).unwrap();
            assert!(sel.passing.is_empty());
            seen += 1;
        }
    }
    assert!(seen > 0);
}

#[test]
fn moving_toward_closes_the_gap() {
    let corpus = make_corpus(&CorpusSpec::default()).unwrap();
    let mut seen = 0;
    for video in &corpus.bank.videos {
        for t in video.triplets.iter().filter(|t| t.relation == "moving_toward") {
            let pair = encode_anchor(video, t, 3).unwrap();
            let gaps: Vec<f64> = pair.sub.rows().map(|r| r[7].hypot(r[8])).collect();
            assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
            seen += 1;
        }
    }
    assert!(seen > 0);
}
