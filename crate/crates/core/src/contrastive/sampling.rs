use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;

use super::ContrastiveError;
use crate::model::{FamilyKey, TripletRef};
use crate::store::TripletIndex;

/// Seed of the sampler for the anchor at position `ordinal` of a run.
pub fn anchor_seed(seed: u64, ordinal: usize) -> u64 {
    seed ^ ordinal as u64
}

/// Uniform draw among same-family triplets of other videos, in index order.
pub fn sample_positive<R: Rng>(anchor: &TripletRef, index: &TripletIndex, rng: &mut R) -> Result<TripletRef, ContrastiveError> {
    let candidates = index.positive_candidates(anchor);
    if candidates.is_empty() {
        return Err(ContrastiveError::NoPositive(anchor.clone()));
    }
    Ok(candidates[rng.gen_range(0..candidates.len())].clone())
}

/// `count` distinct non-identity permutations of `0..frames`, or all of them
/// when fewer exist. For three or more frames the first is the reversal; the
/// rest come from Fisher–Yates shuffles, redrawn on repeats.
pub fn sample_permutations<R: Rng>(frames: usize, count: usize, rng: &mut R) -> Result<Vec<Vec<usize>>, ContrastiveError> {
    if frames < 2 {
        return Err(ContrastiveError::TooFewFrames(frames));
    }
    let available = (2..=frames as u64)
        .try_fold(1u64, |acc, k| acc.checked_mul(k))
        .map_or(usize::MAX, |f| usize::try_from(f - 1).unwrap_or(usize::MAX));
    let count = count.min(available);
    let identity: Vec<usize> = (0..frames).collect();
    let mut out: Vec<Vec<usize>> = Vec::with_capacity(count);
    if frames >= 3 && count > 0 {
        out.push(identity.iter().rev().copied().collect());
    }
    while out.len() < count {
        let mut p = identity.clone();
        for i in (1..frames).rev() {
            p.swap(i, rng.gen_range(0..=i));
        }
        if p != identity && !out.contains(&p) {
            out.push(p);
        }
    }
    Ok(out)
}

/// `1 + shared components` for each candidate, normalized to sum to 1.
pub fn triplet_negative_weights(anchor: &FamilyKey, candidates: &[FamilyKey]) -> Result<Vec<f64>, ContrastiveError> {
    if candidates.is_empty() {
        return Err(ContrastiveError::NoNegative(TripletRef {
            video_id: String::new(),
            ordinal: 0,
        }));
    }
    let mut raw = Vec::with_capacity(candidates.len());
    for (i, c) in candidates.iter().enumerate() {
        let shared = anchor.shared_components(c);
        if shared == 3 {
            return Err(ContrastiveError::PositiveCandidate(i));
        }
        raw.push(1.0 + shared as f64);
    }
    let total: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|w| w / total).collect())
}

/// Draws up to `count` same-video triplets of other families without
/// replacement, each draw proportional to the remaining weights.
pub fn sample_triplet_negatives<R: Rng>(
    anchor: &TripletRef,
    index: &TripletIndex,
    count: usize,
    rng: &mut R,
) -> Result<Vec<TripletRef>, ContrastiveError> {
    let family = index
        .family_of(anchor)
        .ok_or_else(|| ContrastiveError::NoNegative(anchor.clone()))?;
    let mut pool: Vec<&TripletRef> = index.negative_candidates(anchor);
    if pool.is_empty() {
        return Err(ContrastiveError::NoNegative(anchor.clone()));
    }
    let keys: Vec<FamilyKey> = pool.iter().map(|r| index.family_of(r).expect("indexed").clone()).collect();
    let mut weights = triplet_negative_weights(family, &keys)?;
    let mut out = Vec::with_capacity(count.min(pool.len()));
    while out.len() < count && !pool.is_empty() {
        let pick = WeightedIndex::new(&weights).expect("weights are positive").sample(rng);
        out.push(pool.remove(pick).clone());
        weights.remove(pick);
    }
    Ok(out)
}
