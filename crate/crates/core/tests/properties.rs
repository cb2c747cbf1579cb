use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tubegraph::contrastive::{infonce, sample_permutations};
use tubegraph::model::{rle_decode, rle_encode, FlowField, FlowMap, Mask, TubeBank, TubeEmbedding};
use tubegraph::store::{
    bank_from_json, bank_to_json, decode_embedding, decode_flow, embedding_from_json, embedding_to_json,
    encode_embedding, encode_flow, Manifest,
};
use tubegraph::synth::{generate_scene, EntitySpec, RelationSpec, ScenarioSpec, Shape, Trajectory};
use tubegraph::transport::{exact_partial_ot, sinkhorn_partial, Matrix, TransportProblem};

fn mask() -> impl Strategy<Value = Mask> {
    (1usize..7, 1usize..7).prop_flat_map(|(h, w)| {
        proptest::collection::vec(any::<bool>(), h * w).prop_map(move |cells| Mask::from_cells(h, w, cells).unwrap())
    })
}

fn embedding() -> impl Strategy<Value = TubeEmbedding> {
    (1usize..6, 1usize..12).prop_flat_map(|(t, d)| {
        proptest::collection::vec(-1e3f64..1e3, t * d).prop_map(move |data| TubeEmbedding::new("e", t, d, data).unwrap())
    })
}

fn flow() -> impl Strategy<Value = FlowField> {
    (0usize..4, 1usize..5, 1usize..5).prop_flat_map(|(n, h, w)| {
        proptest::collection::vec(proptest::collection::vec(any::<[f32; 2]>(), h * w), n).prop_map(move |maps| {
            let maps = maps.into_iter().map(|v| FlowMap::from_vectors(h, w, v).unwrap()).collect();
            FlowField::new("f", h, w, maps).unwrap()
        })
    })
}

/// Two squares in separate halves of the canvas, one of them drifting.
fn bank() -> impl Strategy<Value = TubeBank> {
    (2u32..6, 0.0f64..8.0, 0.0f64..8.0, -1.0f64..1.0).prop_map(|(frames, x, y, v)| {
        let square = |id: &str, start: [f64; 2], trajectory| EntitySpec {
            id: id.into(),
            category: id.into(),
            shape: Shape::Rect {
                width: 4.0,
                height: 4.0,
            },
            start,
            trajectory,
        };
        let spec = ScenarioSpec {
            video_id: "p".into(),
            seed: 0,
            height: 20,
            width: 40,
            num_frames: frames,
            pan: [0.0, 0.0],
            entities: vec![
                square("a", [6.0 + x, 6.0 + y], Trajectory::Linear { velocity: [v, 0.0] }),
                square("b", [30.0, 10.0], Trajectory::Static),
            ],
            relations: vec![RelationSpec {
                subject: "a".into(),
                relation: "near".into(),
                object: "b".into(),
                begin: 0,
                end: frames - 1,
            }],
        };
        TubeBank {
            videos: vec![generate_scene(&spec).unwrap().video],
        }
    })
}

fn problem() -> impl Strategy<Value = TransportProblem> {
    (1usize..6, 1usize..6).prop_flat_map(|(n, m)| {
        (
            proptest::collection::vec(0.0f64..2.0, n * m),
            1usize..=n.min(m),
            prop_oneof![Just(0.01), Just(0.1), Just(1.0)],
        )
            .prop_map(move |(c, k, tau)| {
                let mass = k as f64 / n.min(m) as f64;
                TransportProblem::uniform(Matrix::from_vec(n, m, c), mass, tau, 1000).unwrap()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn rle_round_trips(m in mask()) {
        let runs = rle_encode(&m);
        prop_assert_eq!(runs.iter().map(|&r| r as usize).sum::<usize>(), m.height() * m.width());
        prop_assert_eq!(rle_decode(&runs, m.height(), m.width()).unwrap(), m);
    }

    #[test]
    fn embedding_formats_round_trip(e in embedding()) {
        let json = embedding_to_json(&e);
        prop_assert_eq!(embedding_from_json(&json).unwrap(), e.clone());
        let bytes = encode_embedding(&e);
        let back = decode_embedding(&bytes, "e").unwrap();
        prop_assert_eq!(encode_embedding(&back), bytes);
        for (a, b) in e.data().iter().zip(back.data()) {
            prop_assert!((a - b).abs() <= 1e-4 * a.abs().max(1.0));
        }
    }

    #[test]
    fn flow_round_trips(f in flow()) {
        let bytes = encode_flow(&f);
        let back = decode_flow(&bytes, "f").unwrap();
        prop_assert_eq!(encode_flow(&back), bytes);
    }

    #[test]
    fn bank_round_trips(b in bank()) {
        let text = bank_to_json(&b);
        let back = bank_from_json(&text).unwrap();
        prop_assert_eq!(&back, &b);
        prop_assert_eq!(bank_to_json(&back), text);
    }

    #[test]
    fn entropic_plans_are_feasible_and_never_beat_the_optimum(p in problem()) {
        let r = sinkhorn_partial(&p).unwrap();
        prop_assert!(r.violation(&p) <= 1e-9);
        prop_assert!(r.plan.data().iter().all(|&x| x >= 0.0));
        let exact = exact_partial_ot(&p.cost, &p.source, &p.target, p.mass).unwrap();
        prop_assert!(r.cost_per_mass >= exact - 1e-7, "{} < {}", r.cost_per_mass, exact);
    }

    #[test]
    fn infonce_is_nonnegative_and_shift_invariant(
        pos in -20.0f64..20.0,
        negs in proptest::collection::vec(-20.0f64..20.0, 1..8),
        c in -100.0f64..100.0,
    ) {
        let l = infonce(pos, &negs);
        prop_assert!(l >= 0.0);
        let moved: Vec<f64> = negs.iter().map(|x| x + c).collect();
        prop_assert!((l - infonce(pos + c, &moved)).abs() < 1e-9);
    }

    #[test]
    fn permutations_are_distinct_non_identity_bijections(frames in 2usize..7, count in 1usize..10, seed: u64) {
        let perms = sample_permutations(frames, count, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let factorial: usize = (1..=frames).product();
        prop_assert_eq!(perms.len(), count.min(factorial - 1));
        for (i, p) in perms.iter().enumerate() {
            let mut sorted = p.clone();
            sorted.sort_unstable();
            prop_assert_eq!(sorted, (0..frames).collect::<Vec<_>>());
            prop_assert!(p.iter().enumerate().any(|(k, &v)| k != v));
            prop_assert!(!perms[..i].contains(p));
        }
    }
}

#[test]
fn manifest_flags_modified_files() {
    let dir = tempfile::tempdir().unwrap();
    let mut m = Manifest::default();
    m.write_file(dir.path(), "a/x.bin", b"hello").unwrap();
    m.write_file(dir.path(), "y.bin", b"world").unwrap();
    assert!(m.stale_files(dir.path()).unwrap().is_empty());
    std::fs::write(dir.path().join("y.bin"), b"World").unwrap();
    assert_eq!(m.stale_files(dir.path()).unwrap(), vec!["y.bin".to_owned()]);
    assert_eq!(Manifest::from_json(&m.to_json()).unwrap(), m);
}
