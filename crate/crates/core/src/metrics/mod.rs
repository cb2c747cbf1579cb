//! Triplet recall under volume IoU: R@K and mR@K.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::model::{viou, MaskTube, ModelError, TubeBank, Video};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("K must be positive")]
    InvalidK,
    #[error("predicted triplet {ordinal} of video {video_id} has no confidence")]
    MissingConfidence { video_id: String, ordinal: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A triplet with its two tubes, cropped to the triplet span.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundedTriplet {
    pub video_id: String,
    pub subject: MaskTube,
    pub object: MaskTube,
    pub relation: String,
}

impl GroundedTriplet {
    pub fn subject_category(&self) -> &str {
        self.subject.category()
    }

    pub fn object_category(&self) -> &str {
        self.object.category()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictedTriplet {
    pub triplet: GroundedTriplet,
    pub confidence: f64,
}

/// Every triplet of `video` with its tubes cropped to the span.
pub fn grounded_triplets(video: &Video) -> Result<Vec<GroundedTriplet>, ModelError> {
    video
        .triplets
        .iter()
        .map(|t| {
            let (s, o) = video.triplet_tubes(t)?;
            Ok(GroundedTriplet {
                video_id: video.video_id.clone(),
                subject: s.crop(t.begin, t.end),
                object: o.crop(t.begin, t.end),
                relation: t.relation.clone(),
            })
        })
        .collect()
}

/// Predictions of `video`; every triplet must carry a confidence.
pub fn predicted_triplets(video: &Video) -> Result<Vec<PredictedTriplet>, MetricsError> {
    grounded_triplets(video)?
        .into_iter()
        .zip(&video.triplets)
        .enumerate()
        .map(|(ordinal, (triplet, t))| {
            let confidence = t.confidence.ok_or_else(|| MetricsError::MissingConfidence {
                video_id: video.video_id.clone(),
                ordinal,
            })?;
            Ok(PredictedTriplet { triplet, confidence })
        })
        .collect()
}

/// Same video, same three labels, and both tube pairs at or above the vIoU
/// threshold.
pub fn match_triplet(pred: &PredictedTriplet, gt: &GroundedTriplet, viou_threshold: f64) -> Result<bool, ModelError> {
    let p = &pred.triplet;
    if p.video_id != gt.video_id
        || p.relation != gt.relation
        || p.subject_category() != gt.subject_category()
        || p.object_category() != gt.object_category()
    {
        return Ok(false);
    }
    Ok(viou(&p.subject, &gt.subject)? >= viou_threshold && viou(&p.object, &gt.object)? >= viou_threshold)
}

/// Largest one-to-one matching between predictions and ground truth.
/// Predictions are taken in the given order and each may displace an earlier
/// match along an augmenting path, so the result is a maximum matching in
/// which higher-ranked predictions are matched whenever possible.
///
/// Returns, for each ground-truth triplet, the index of its prediction.
pub fn match_greedy(compatible: &[Vec<bool>]) -> Vec<Option<usize>> {
    let gts = compatible.first().map_or(0, Vec::len);
    let mut owner: Vec<Option<usize>> = vec![None; gts];
    for p in 0..compatible.len() {
        let mut seen = vec![false; gts];
        augment(p, compatible, &mut owner, &mut seen);
    }
    owner
}

fn augment(p: usize, compatible: &[Vec<bool>], owner: &mut [Option<usize>], seen: &mut [bool]) -> bool {
    for g in 0..owner.len() {
        if compatible[p][g] && !seen[g] {
            seen[g] = true;
            if owner[g].is_none_or(|q| augment(q, compatible, owner, seen)) {
                owner[g] = Some(p);
                return true;
            }
        }
    }
    false
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassRecall {
    pub matched: usize,
    pub total: usize,
    pub recall: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecallReport {
    pub k: usize,
    pub viou_threshold: f64,
    pub recall: f64,
    pub mean_recall: f64,
    pub matched: usize,
    pub total: usize,
    pub per_class: BTreeMap<String, ClassRecall>,
}

impl RecallReport {
    /// Builds a report from per-class `(matched, total)` counts.
    pub fn from_counts(k: usize, viou_threshold: f64, counts: BTreeMap<String, (usize, usize)>) -> Self {
        let matched: usize = counts.values().map(|c| c.0).sum();
        let total: usize = counts.values().map(|c| c.1).sum();
        let per_class: BTreeMap<String, ClassRecall> = counts
            .into_iter()
            .map(|(rel, (m, t))| {
                (
                    rel,
                    ClassRecall {
                        matched: m,
                        total: t,
                        recall: m as f64 / t as f64,
                    },
                )
            })
            .collect();
        let ratio = |a: f64, b: usize| if b == 0 { 0.0 } else { a / b as f64 };
        Self {
            k,
            viou_threshold,
            recall: ratio(matched as f64, total),
            mean_recall: ratio(per_class.values().map(|c| c.recall).sum(), per_class.len()),
            matched,
            total,
            per_class,
        }
    }
}

/// Matched ground truth per relation class among the top `k` predictions.
fn class_counts(
    preds: &[PredictedTriplet],
    gts: &[GroundedTriplet],
    k: usize,
    viou_threshold: f64,
) -> Result<BTreeMap<String, (usize, usize)>, MetricsError> {
    if k == 0 {
        return Err(MetricsError::InvalidK);
    }
    let mut order: Vec<usize> = (0..preds.len()).collect();
    order.sort_by(|&a, &b| preds[b].confidence.total_cmp(&preds[a].confidence));
    order.truncate(k);
    let compatible = order
        .iter()
        .map(|&p| gts.iter().map(|g| match_triplet(&preds[p], g, viou_threshold)).collect())
        .collect::<Result<Vec<Vec<bool>>, _>>()?;
    let owner = match_greedy(&compatible);
    let mut counts: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for (g, o) in gts.iter().zip(&owner) {
        let c = counts.entry(g.relation.clone()).or_default();
        c.1 += 1;
        c.0 += usize::from(o.is_some());
    }
    Ok(counts)
}

/// R@K and mR@K of one prediction list against one ground-truth list. Ties
/// in confidence keep the input order.
pub fn recall_at_k(
    preds: &[PredictedTriplet],
    gts: &[GroundedTriplet],
    k: usize,
    viou_threshold: f64,
) -> Result<RecallReport, MetricsError> {
    Ok(RecallReport::from_counts(k, viou_threshold, class_counts(preds, gts, k, viou_threshold)?))
}

/// Evaluates video by video (top `k` per video) and pools the counts in
/// video-id order. Predicted videos missing from `gt` are ignored; ground
/// truth videos without predictions count as unmatched.
pub fn evaluate_banks(pred: &TubeBank, gt: &TubeBank, k: usize, viou_threshold: f64) -> Result<RecallReport, MetricsError> {
    let mut videos: Vec<&Video> = gt.videos.iter().collect();
    videos.sort_by(|a, b| a.video_id.cmp(&b.video_id));
    let mut counts: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for v in videos {
        let gts = grounded_triplets(v)?;
        let preds = match pred.video(&v.video_id) {
            Some(p) => predicted_triplets(p)?,
            None => Vec::new(),
        };
        for (rel, (m, t)) in class_counts(&preds, &gts, k, viou_threshold)? {
            let c = counts.entry(rel).or_default();
            c.0 += m;
            c.1 += t;
        }
    }
    Ok(RecallReport::from_counts(k, viou_threshold, counts))
}

/// Plain-text grid with one row per threshold and `R@K / mR@K` column pairs.
pub fn format_table(reports: &[RecallReport]) -> String {
    let mut ks: Vec<usize> = reports.iter().map(|r| r.k).collect();
    ks.sort_unstable();
    ks.dedup();
    let mut thresholds: Vec<f64> = reports.iter().map(|r| r.viou_threshold).collect();
    thresholds.sort_by(|a, b| b.total_cmp(a));
    thresholds.dedup();
    let mut out = format!("{:<8}", "vIoU");
    for k in &ks {
        out += &format!(" {:>8} {:>8}", format!("R@{k}"), format!("mR@{k}"));
    }
    out.push('\n');
    for th in thresholds {
        out += &format!("{th:<8}");
        for k in &ks {
            match reports.iter().find(|r| r.k == *k && r.viou_threshold == th) {
                Some(r) => out += &format!(" {:>8.2} {:>8.2}", 100.0 * r.recall, 100.0 * r.mean_recall),
                None => out += &format!(" {:>8} {:>8}", "-", "-"),
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn augmenting_beats_first_fit() {
        // Prediction 0 fits both GTs, prediction 1 only GT 0. First-fit would
        // give 0 -> 0 and leave prediction 1 unmatched.
        let owner = match_greedy(&[vec![true, true], vec![true, false]]);
        assert_eq!(owner, vec![Some(1), Some(0)]);
    }

    #[test]
    fn empty_inputs() {
        assert!(match_greedy(&[]).is_empty());
        let r = recall_at_k(&[], &[], 5, 0.5).unwrap();
        assert_eq!((r.recall, r.mean_recall), (0.0, 0.0));
        assert!(matches!(recall_at_k(&[], &[], 0, 0.5), Err(MetricsError::InvalidK)));
    }
}
