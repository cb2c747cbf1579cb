use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sampling::{anchor_seed, sample_permutations, sample_positive, sample_triplet_negatives};
use super::ContrastiveError;
use crate::model::{encode_tube, FlowField, MaskTube, TripletInstance, TripletRef, TubeBank, TubeEmbedding, Video};
use crate::motion::{tube_motion_score, DEFAULT_EDGE_EPS, DEFAULT_GAMMA};
use crate::store::TripletIndex;

/// Subject and object embeddings of a triplet and their row-wise
/// concatenation `[H_sub, H_obj]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorPair {
    pub triplet: TripletInstance,
    pub sub: TubeEmbedding,
    pub obj: TubeEmbedding,
    pub joint: TubeEmbedding,
}

pub fn make_anchor(sub: TubeEmbedding, obj: TubeEmbedding, triplet: TripletInstance) -> Result<AnchorPair, ContrastiveError> {
    if sub.frames() != obj.frames() {
        return Err(ContrastiveError::FrameMismatch {
            subject: sub.frames(),
            object: obj.frames(),
        });
    }
    let joint = sub.concat(&obj, format!("{}+{}", sub.tube_id(), obj.tube_id()))?;
    Ok(AnchorPair { triplet, sub, obj, joint })
}

/// Crops both tubes to the triplet span and encodes each with the other as
/// partner.
pub fn encode_anchor(video: &Video, triplet: &TripletInstance, window: usize) -> Result<AnchorPair, ContrastiveError> {
    let (s, o) = cropped_tubes(video, triplet)?;
    encode_cropped(&s, &o, triplet, window)
}

fn cropped_tubes(video: &Video, triplet: &TripletInstance) -> Result<(MaskTube, MaskTube), ContrastiveError> {
    let (s, o) = video.triplet_tubes(triplet)?;
    Ok((s.crop(triplet.begin, triplet.end), o.crop(triplet.begin, triplet.end)))
}

fn encode_cropped(
    sub: &MaskTube,
    obj: &MaskTube,
    triplet: &TripletInstance,
    window: usize,
) -> Result<AnchorPair, ContrastiveError> {
    let hs = encode_tube(sub, Some(obj), window)?;
    let ho = encode_tube(obj, Some(sub), window)?;
    make_anchor(hs, ho, triplet.clone())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShuffleMode {
    /// Reorder the masks of both tubes, then encode again.
    #[default]
    Reencode,
    /// Reorder the rows of the anchor embedding.
    #[serde(rename = "rowpermute")]
    RowPermute,
}

impl std::str::FromStr for ShuffleMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "reencode" => Ok(Self::Reencode),
            "rowpermute" => Ok(Self::RowPermute),
            other => Err(format!("unknown shuffle mode {other:?} (expected reencode or rowpermute)")),
        }
    }
}

/// Temporally shuffled copy of the anchor. `tubes` are the anchor's subject
/// and object tubes; they are cropped to the triplet span here.
pub fn shuffle_negative(
    anchor: &AnchorPair,
    tubes: (&MaskTube, &MaskTube),
    pi: &[usize],
    mode: ShuffleMode,
    window: usize,
) -> Result<TubeEmbedding, ContrastiveError> {
    if pi.iter().enumerate().all(|(i, &p)| i == p) {
        return Err(ContrastiveError::IdentityPermutation);
    }
    match mode {
        ShuffleMode::RowPermute => Ok(anchor.joint.permute_rows(pi)?),
        ShuffleMode::Reencode => {
            let t = &anchor.triplet;
            let s = tubes.0.crop(t.begin, t.end).permute_frames(pi)?;
            let o = tubes.1.crop(t.begin, t.end).permute_frames(pi)?;
            Ok(encode_cropped(&s, &o, t, window)?.joint)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NegativeKind {
    Shuffle,
    Triplet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Negative {
    pub kind: NegativeKind,
    pub embedding: TubeEmbedding,
    /// Frame permutation of a shuffle negative.
    pub pi: Option<Vec<usize>>,
    /// Triplet a triplet negative was drawn from.
    pub source: Option<TripletRef>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContrastiveBatch {
    pub anchor_ref: TripletRef,
    pub anchor: AnchorPair,
    pub positive_ref: TripletRef,
    pub positive: AnchorPair,
    pub negatives: Vec<Negative>,
    pub seed: u64,
    /// Larger motion score of the anchor's two tubes over the span.
    pub motion_score: f64,
}

impl ContrastiveBatch {
    pub fn negatives_of(&self, kind: NegativeKind) -> impl Iterator<Item = &Negative> {
        self.negatives.iter().filter(move |n| n.kind == kind)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchConfig {
    pub window: usize,
    pub n_shuffle: usize,
    pub n_triplet: usize,
    pub shuffle_mode: ShuffleMode,
    pub gamma: f64,
    pub edge_eps: f64,
    pub seed: u64,
}

impl Default for BatchConfig {
    fn default() -> Self {
        Self {
            window: 3,
            n_shuffle: 2,
            n_triplet: 4,
            shuffle_mode: ShuffleMode::Reencode,
            gamma: DEFAULT_GAMMA,
            edge_eps: DEFAULT_EDGE_EPS,
            seed: 0,
        }
    }
}

/// Builds the batch of one anchor. Draws happen in a fixed order from a
/// generator seeded with `seed`: positive, permutations, triplet negatives.
/// Shuffle negatives are only made when one of the anchor's tubes passes the
/// motion filter.
pub fn build_batch(
    bank: &TubeBank,
    index: &TripletIndex,
    flows: &[FlowField],
    anchor_ref: &TripletRef,
    cfg: &BatchConfig,
    seed: u64,
) -> Result<ContrastiveBatch, ContrastiveError> {
    let (video, triplet) = bank.triplet(anchor_ref)?;
    let (sub, obj) = cropped_tubes(video, triplet)?;
    let tag = format!("{}.t{}", anchor_ref.video_id, anchor_ref.ordinal);
    let relabel = |mut pair: AnchorPair, name: &str| {
        pair.joint = pair.joint.with_id(format!("{tag}.{name}"));
        pair
    };
    let anchor = relabel(encode_cropped(&sub, &obj, triplet, cfg.window)?, "anchor");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let positive_ref = sample_positive(anchor_ref, index, &mut rng)?;
    let (pv, pt) = bank.triplet(&positive_ref)?;
    let positive = relabel(encode_anchor(pv, pt, cfg.window)?, "positive");

    let flow = flows
        .iter()
        .find(|f| f.video_id == video.video_id)
        .ok_or_else(|| ContrastiveError::MissingFlow(video.video_id.clone()))?;
    let motion_score = tube_motion_score(&sub, flow, cfg.edge_eps)?
        .score
        .max(tube_motion_score(&obj, flow, cfg.edge_eps)?.score);

    let mut negatives = Vec::new();
    let frames = anchor.joint.frames();
    if motion_score > cfg.gamma && cfg.n_shuffle > 0 && frames >= 2 {
        for (k, pi) in sample_permutations(frames, cfg.n_shuffle, &mut rng)?.into_iter().enumerate() {
            let e = shuffle_negative(&anchor, (&sub, &obj), &pi, cfg.shuffle_mode, cfg.window)?;
            negatives.push(Negative {
                kind: NegativeKind::Shuffle,
                embedding: e.with_id(format!("{tag}.shuffle{k}")),
                pi: Some(pi),
                source: None,
            });
        }
    }
    if cfg.n_triplet > 0 {
        match sample_triplet_negatives(anchor_ref, index, cfg.n_triplet, &mut rng) {
            Ok(refs) => {
                for (k, r) in refs.into_iter().enumerate() {
                    let (nv, nt) = bank.triplet(&r)?;
                    let e = encode_anchor(nv, nt, cfg.window)?.joint;
                    negatives.push(Negative {
                        kind: NegativeKind::Triplet,
                        embedding: e.with_id(format!("{tag}.triplet{k}")),
                        pi: None,
                        source: Some(r),
                    });
                }
            }
            Err(ContrastiveError::NoNegative(_)) => {}
            Err(e) => return Err(e),
        }
    }
    if negatives.is_empty() {
        return Err(ContrastiveError::NoNegative(anchor_ref.clone()));
    }
    Ok(ContrastiveBatch {
        anchor_ref: anchor_ref.clone(),
        anchor,
        positive_ref,
        positive,
        negatives,
        seed,
        motion_score,
    })
}

/// An anchor that produced no batch.
#[derive(Debug, Clone, PartialEq)]
pub struct Skipped {
    pub anchor: TripletRef,
    pub reason: ContrastiveError,
}

/// One batch per indexed triplet, in index order. Anchor `i` samples with
/// seed `cfg.seed ^ i`, so the output does not depend on how rayon splits the
/// work.
pub fn build_batches(
    bank: &TubeBank,
    index: &TripletIndex,
    flows: &[FlowField],
    cfg: &BatchConfig,
) -> (Vec<ContrastiveBatch>, Vec<Skipped>) {
    let anchors: Vec<&TripletRef> = index.all().collect();
    let results: Vec<_> = anchors
        .par_iter()
        .enumerate()
        .map(|(i, r)| build_batch(bank, index, flows, r, cfg, anchor_seed(cfg.seed, i)))
        .collect();
    let mut batches = Vec::new();
    let mut skipped = Vec::new();
    for (r, res) in anchors.into_iter().zip(results) {
        match res {
            Ok(b) => batches.push(b),
            Err(reason) => skipped.push(Skipped {
                anchor: r.clone(),
                reason,
            }),
        }
    }
    (batches, skipped)
}

/// Locates an embedding: a file and the id stored in it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddingRef {
    pub path: String,
    pub tube_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripletRecord {
    pub video_id: String,
    pub ordinal: usize,
    pub subject: String,
    pub object: String,
    pub relation: String,
    pub begin: u32,
    pub end: u32,
    pub embedding_ref: EmbeddingRef,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NegativeRecord {
    pub kind: NegativeKind,
    pub embedding_ref: EmbeddingRef,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pi: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<TripletRef>,
}

/// Serializable form of a batch; embeddings are stored separately.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchRecord {
    pub anchor: TripletRecord,
    pub positive: TripletRecord,
    pub negatives: Vec<NegativeRecord>,
    pub seed: u64,
    pub motion_score: f64,
}

impl BatchRecord {
    /// `path_of` maps an embedding id to the file it is written to.
    pub fn from_batch(b: &ContrastiveBatch, path_of: impl Fn(&str) -> String) -> Self {
        let refer = |e: &TubeEmbedding| EmbeddingRef {
            path: path_of(e.tube_id()),
            tube_id: e.tube_id().to_owned(),
        };
        let triplet = |r: &TripletRef, p: &AnchorPair| TripletRecord {
            video_id: r.video_id.clone(),
            ordinal: r.ordinal,
            subject: p.triplet.subject.clone(),
            object: p.triplet.object.clone(),
            relation: p.triplet.relation.clone(),
            begin: p.triplet.begin,
            end: p.triplet.end,
            embedding_ref: refer(&p.joint),
        };
        Self {
            anchor: triplet(&b.anchor_ref, &b.anchor),
            positive: triplet(&b.positive_ref, &b.positive),
            negatives: b
                .negatives
                .iter()
                .map(|n| NegativeRecord {
                    kind: n.kind,
                    embedding_ref: refer(&n.embedding),
                    pi: n.pi.clone(),
                    source: n.source.clone(),
                })
                .collect(),
            seed: b.seed,
            motion_score: b.motion_score,
        }
    }
}
