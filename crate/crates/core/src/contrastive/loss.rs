use serde::Serialize;

use super::batch::{ContrastiveBatch, NegativeKind};
use super::ContrastiveError;
use crate::transport::{OtConfig, SimilarityMethod};

/// `−log(e^p / (e^p + Σ e^n))`, evaluated after subtracting the largest
/// exponent.
pub fn infonce(positive: f64, negatives: &[f64]) -> f64 {
    let max = negatives.iter().copied().fold(positive, f64::max);
    let sum: f64 = std::iter::once(positive).chain(negatives.iter().copied()).map(|s| (s - max).exp()).sum();
    (max + sum.ln() - positive).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossMode {
    /// Every negative in one softmax.
    #[default]
    Combined,
    /// One softmax per negative kind, summed.
    Separate,
}

impl std::str::FromStr for LossMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "combined" => Ok(Self::Combined),
            "separate" => Ok(Self::Separate),
            other => Err(format!("unknown loss mode {other:?} (expected combined or separate)")),
        }
    }
}

/// The objective for one anchor from its similarities.
pub fn combine_loss(positive_sim: f64, negative_sims: &[(NegativeKind, f64)], mode: LossMode) -> f64 {
    match mode {
        LossMode::Combined => {
            let sims: Vec<f64> = negative_sims.iter().map(|(_, s)| *s).collect();
            infonce(positive_sim, &sims)
        }
        LossMode::Separate => [NegativeKind::Shuffle, NegativeKind::Triplet]
            .iter()
            .map(|kind| {
                let sims: Vec<f64> = negative_sims.iter().filter(|(k, _)| k == kind).map(|(_, s)| *s).collect();
                if sims.is_empty() {
                    0.0
                } else {
                    infonce(positive_sim, &sims)
                }
            })
            .sum(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LossReport {
    pub loss: f64,
    pub positive_sim: f64,
    pub negative_sims: Vec<(NegativeKind, f64)>,
}

pub fn contrastive_loss(
    batch: &ContrastiveBatch,
    alpha: f64,
    cfg: &OtConfig,
    mode: LossMode,
    method: SimilarityMethod,
) -> Result<LossReport, ContrastiveError> {
    let anchor = &batch.anchor.joint;
    let positive_sim = method.evaluate(anchor, &batch.positive.joint, alpha, cfg)?;
    let negative_sims = batch
        .negatives
        .iter()
        .map(|n| Ok((n.kind, method.evaluate(anchor, &n.embedding, alpha, cfg)?)))
        .collect::<Result<Vec<_>, ContrastiveError>>()?;
    let loss = combine_loss(positive_sim, &negative_sims, mode);
    Ok(LossReport {
        loss,
        positive_sim,
        negative_sims,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        assert!((infonce(10.0, &[8.0]) - (1.0 + (-2.0f64).exp()).ln()).abs() < 1e-15);
        assert!((infonce(3.0, &[3.0]) - std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(infonce(1.0, &[]), 0.0);
    }

    #[test]
    fn huge_similarities_stay_finite() {
        let l = infonce(1e6, &[1e6 + 1.0, 1e6 - 3.0]);
        assert!(l.is_finite() && l > 1.0);
    }
}
