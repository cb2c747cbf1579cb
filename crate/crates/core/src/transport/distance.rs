use serde::{Deserialize, Serialize};

use super::cost::cost_matrix;
use super::sinkhorn::{sinkhorn_partial, ScalingScheme, TransportProblem, TransportResult};
use super::{Matrix, TransportError};
use crate::model::TubeEmbedding;

/// Which quantity is minimized over the transported-mass grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CostMode {
    /// Transported cost divided by the transported mass.
    #[default]
    PerMass,
    /// Transported cost as is.
    Raw,
}

impl std::str::FromStr for CostMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "per-mass" => Ok(Self::PerMass),
            "raw" => Ok(Self::Raw),
            other => Err(format!("unknown cost mode {other:?} (expected per-mass or raw)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OtConfig {
    pub tau: f64,
    pub max_iters: usize,
    pub mode: CostMode,
    /// Number of grid points `K`; `None` uses `min(T_i, T_j)`.
    pub grid_size: Option<usize>,
    pub scheme: ScalingScheme,
}

impl Default for OtConfig {
    fn default() -> Self {
        Self {
            tau: 0.1,
            max_iters: 1000,
            mode: CostMode::PerMass,
            grid_size: None,
            scheme: ScalingScheme::Dykstra,
        }
    }
}

impl OtConfig {
    pub fn with_tau(self, tau: f64) -> Self {
        Self { tau, ..self }
    }

    pub fn with_mode(self, mode: CostMode) -> Self {
        Self { mode, ..self }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OtDistance {
    /// Minimum over the mass grid, in the configured mode.
    pub distance: f64,
    /// The grid mass attaining the minimum.
    pub mass: f64,
    pub result: TransportResult,
}

/// `s_k = k / K` for `k = 1..=K`.
pub fn mass_grid(rows: usize, cols: usize, grid_size: Option<usize>) -> Vec<f64> {
    let k = grid_size.unwrap_or(rows.min(cols)).max(1);
    (1..=k).map(|i| i as f64 / k as f64).collect()
}

pub fn ot_distance(hi: &TubeEmbedding, hj: &TubeEmbedding, cfg: &OtConfig) -> Result<OtDistance, TransportError> {
    ot_distance_from_cost(&cost_matrix(hi, hj)?, cfg)
}

/// Runs the partial solver at every grid mass and keeps the smallest
/// objective; ties go to the smaller mass.
pub fn ot_distance_from_cost(cost: &Matrix, cfg: &OtConfig) -> Result<OtDistance, TransportError> {
    let mut best: Option<OtDistance> = None;
    for s in mass_grid(cost.rows(), cost.cols(), cfg.grid_size) {
        let problem = TransportProblem::uniform(cost.clone(), s, cfg.tau, cfg.max_iters)?
            .with_scheme(cfg.scheme);
        let result = sinkhorn_partial(&problem)?;
        let distance = match cfg.mode {
            CostMode::PerMass => result.cost_per_mass,
            CostMode::Raw => result.cost_raw,
        };
        if best.as_ref().is_none_or(|b| distance < b.distance) {
            best = Some(OtDistance {
                distance,
                mass: s,
                result,
            });
        }
    }
    Ok(best.expect("mass grid is never empty"))
}
