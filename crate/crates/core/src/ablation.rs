//! Compares tube similarity methods on a bank.
//!
//! Each method labels every subject/object pair of a video with the relation
//! of its most similar triplets in the other videos: the confidence of
//! relation `r` is the best similarity to any class-`r` triplet elsewhere.
//! These predictions are scored with R@K / mR@K. The contrastive batches are
//! scored with the same method, giving mean positive and negative
//! similarities and the mean loss.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::contrastive::{contrastive_loss, encode_anchor, AnchorPair, ContrastiveBatch, ContrastiveError, LossMode, NegativeKind};
use crate::metrics::{grounded_triplets, recall_at_k, GroundedTriplet, MetricsError, PredictedTriplet, RecallReport};
use crate::model::TubeBank;
use crate::transport::{OtConfig, SimilarityMethod};

#[derive(Debug, thiserror::Error)]
pub enum AblationError {
    #[error(transparent)]
    Contrastive(#[from] ContrastiveError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

#[derive(Debug, Clone, Serialize)]
pub struct MethodReport {
    pub method: SimilarityMethod,
    pub label: &'static str,
    pub retrieval: Vec<RecallReport>,
    pub mean_positive_sim: f64,
    pub mean_shuffle_sim: Option<f64>,
    pub mean_triplet_sim: Option<f64>,
    pub mean_loss: f64,
}

#[derive(Debug, Clone)]
pub struct AblationSettings {
    pub alpha: f64,
    pub ot: OtConfig,
    pub window: usize,
    pub loss_mode: LossMode,
    pub ks: Vec<usize>,
    pub viou_threshold: f64,
}

pub fn run_ablation(
    bank: &TubeBank,
    batches: &[ContrastiveBatch],
    methods: &[SimilarityMethod],
    settings: &AblationSettings,
) -> Result<Vec<MethodReport>, AblationError> {
    let mut anchors: Vec<(usize, AnchorPair)> = Vec::new();
    for (vi, video) in bank.videos.iter().enumerate() {
        for t in &video.triplets {
            anchors.push((vi, encode_anchor(video, t, settings.window)?));
        }
    }
    let relations: BTreeSet<&str> = anchors.iter().map(|(_, a)| a.triplet.relation.as_str()).collect();
    let grounded: Vec<Vec<GroundedTriplet>> = bank
        .videos
        .iter()
        .map(grounded_triplets)
        .collect::<Result<_, _>>()
        .map_err(MetricsError::from)?;

    methods
        .iter()
        .map(|&method| {
            let sim = |a: &AnchorPair, b: &AnchorPair| method.evaluate(&a.joint, &b.joint, settings.alpha, &settings.ot);
            let mut counts: Vec<RecallReport> = Vec::new();
            let mut preds_by_video: Vec<Vec<PredictedTriplet>> = vec![Vec::new(); bank.videos.len()];
            let scored: Vec<Vec<(String, f64)>> = anchors
                .par_iter()
                .map(|(vi, query)| {
                    relations
                        .iter()
                        .map(|&r| {
                            let mut best = f64::NEG_INFINITY;
                            for (vj, other) in &anchors {
                                if vj != vi && other.triplet.relation == r {
                                    best = best.max(sim(query, other)?);
                                }
                            }
                            Ok((r.to_owned(), best))
                        })
                        .collect::<Result<Vec<_>, crate::transport::TransportError>>()
                })
                .collect::<Result<_, _>>()
                .map_err(ContrastiveError::from)?;
            let mut cursor = 0;
            for (vi, gts) in grounded.iter().enumerate() {
                for g in gts {
                    for (r, conf) in &scored[cursor] {
                        if conf.is_finite() {
                            preds_by_video[vi].push(PredictedTriplet {
                                triplet: GroundedTriplet {
                                    relation: r.clone(),
                                    ..g.clone()
                                },
                                confidence: *conf,
                            });
                        }
                    }
                    cursor += 1;
                }
            }
            for &k in &settings.ks {
                counts.push(pooled_recall(&preds_by_video, &grounded, k, settings.viou_threshold)?);
            }

            let mut pos = Vec::new();
            let mut shuffle = Vec::new();
            let mut triplet = Vec::new();
            let mut losses = Vec::new();
            for b in batches {
                let r = contrastive_loss(b, settings.alpha, &settings.ot, settings.loss_mode, method)?;
                pos.push(r.positive_sim);
                for (kind, s) in r.negative_sims {
                    match kind {
                        NegativeKind::Shuffle => shuffle.push(s),
                        NegativeKind::Triplet => triplet.push(s),
                    }
                }
                losses.push(r.loss);
            }
            Ok(MethodReport {
                method,
                label: method.label(),
                retrieval: counts,
                mean_positive_sim: mean(&pos).unwrap_or(0.0),
                mean_shuffle_sim: mean(&shuffle),
                mean_triplet_sim: mean(&triplet),
                mean_loss: mean(&losses).unwrap_or(0.0),
            })
        })
        .collect()
}

/// R@K over all videos, top `k` per video.
fn pooled_recall(
    preds: &[Vec<PredictedTriplet>],
    gts: &[Vec<GroundedTriplet>],
    k: usize,
    viou_threshold: f64,
) -> Result<RecallReport, MetricsError> {
    let mut counts = std::collections::BTreeMap::<String, (usize, usize)>::new();
    for (p, g) in preds.iter().zip(gts) {
        for (rel, c) in recall_at_k(p, g, k, viou_threshold)?.per_class {
            let e = counts.entry(rel).or_default();
            e.0 += c.matched;
            e.1 += c.total;
        }
    }
    Ok(RecallReport::from_counts(k, viou_threshold, counts))
}

fn mean(x: &[f64]) -> Option<f64> {
    (!x.is_empty()).then(|| x.iter().sum::<f64>() / x.len() as f64)
}

/// One row per method with `R / mR` pairs per K, in percent.
pub fn format_ablation(reports: &[MethodReport]) -> String {
    let ks: Vec<usize> = reports.first().map_or(Vec::new(), |r| r.retrieval.iter().map(|x| x.k).collect());
    let width = reports.iter().map(|r| r.label.len()).max().unwrap_or(0).max(6);
    let mut out = format!("{:<width$}", "Method");
    for k in &ks {
        out += &format!(" | {:>15}", format!("R/mR@{k}"));
    }
    out += &format!(" | {:>10} | {:>10}\n", "margin", "loss");
    for r in reports {
        out += &format!("{:<width$}", r.label);
        for x in &r.retrieval {
            out += &format!(" | {:>15}", format!("{:.2} / {:.2}", 100.0 * x.recall, 100.0 * x.mean_recall));
        }
        let hardest = [r.mean_shuffle_sim, r.mean_triplet_sim].into_iter().flatten().fold(f64::NEG_INFINITY, f64::max);
        out += &format!(" | {:>10.4} | {:>10.4}\n", r.mean_positive_sim - hardest, r.mean_loss);
    }
    out
}
