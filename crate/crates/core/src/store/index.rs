use std::collections::BTreeMap;

use crate::model::{FamilyKey, ModelError, TripletRef, TubeBank};

/// Triplets grouped by category family and by video, in `(video_id, ordinal)`
/// order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TripletIndex {
    by_family: BTreeMap<FamilyKey, Vec<TripletRef>>,
    by_video: BTreeMap<String, Vec<TripletRef>>,
    families: BTreeMap<TripletRef, FamilyKey>,
}

pub fn build_index(bank: &TubeBank) -> Result<TripletIndex, ModelError> {
    let mut index = TripletIndex::default();
    for video in &bank.videos {
        for (ordinal, triplet) in video.triplets.iter().enumerate() {
            let key = video.family(triplet)?;
            let r = TripletRef {
                video_id: video.video_id.clone(),
                ordinal,
            };
            index.by_family.entry(key.clone()).or_default().push(r.clone());
            index.by_video.entry(r.video_id.clone()).or_default().push(r.clone());
            index.families.insert(r, key);
        }
    }
    for refs in index.by_family.values_mut().chain(index.by_video.values_mut()) {
        refs.sort();
    }
    Ok(index)
}

impl TripletIndex {
    pub fn len(&self) -> usize {
        self.families.len()
    }

    pub fn is_empty(&self) -> bool {
        self.families.is_empty()
    }

    pub fn family_of(&self, r: &TripletRef) -> Option<&FamilyKey> {
        self.families.get(r)
    }

    pub fn families(&self) -> impl Iterator<Item = (&FamilyKey, &[TripletRef])> {
        self.by_family.iter().map(|(k, v)| (k, v.as_slice()))
    }

    pub fn family(&self, key: &FamilyKey) -> &[TripletRef] {
        self.by_family.get(key).map_or(&[], Vec::as_slice)
    }

    pub fn video(&self, video_id: &str) -> &[TripletRef] {
        self.by_video.get(video_id).map_or(&[], Vec::as_slice)
    }

    /// Every indexed triplet in `(video_id, ordinal)` order.
    pub fn all(&self) -> impl Iterator<Item = &TripletRef> {
        self.families.keys()
    }

    /// Same-family triplets from other videos.
    pub fn positive_candidates(&self, anchor: &TripletRef) -> Vec<&TripletRef> {
        let Some(key) = self.family_of(anchor) else {
            return Vec::new();
        };
        self.family(key).iter().filter(|r| r.video_id != anchor.video_id).collect()
    }

    /// Triplets of the anchor's video whose family differs from the anchor's.
    pub fn negative_candidates(&self, anchor: &TripletRef) -> Vec<&TripletRef> {
        let Some(key) = self.family_of(anchor) else {
            return Vec::new();
        };
        self.video(&anchor.video_id).iter().filter(|r| self.families[*r] != *key).collect()
    }
}
