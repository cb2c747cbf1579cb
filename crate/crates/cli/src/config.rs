use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tubegraph::contrastive::{BatchConfig, LossMode, ShuffleMode};
use tubegraph::motion::{DEFAULT_EDGE_EPS, DEFAULT_GAMMA};
use tubegraph::transport::{CostMode, OtConfig, DEFAULT_ALPHA};

/// Environment variable naming a config file used when `--config` is absent.
pub const CONFIG_ENV: &str = "TUBEGRAPH_CONFIG";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub tau: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub n_iter: usize,
    /// Mass grid size; `None` uses the shorter tube length.
    pub grid_size: Option<usize>,
    pub mode: CostMode,
    pub shuffle_mode: ShuffleMode,
    pub n_shuffle: usize,
    pub n_triplet: usize,
    pub loss_mode: LossMode,
    pub window: usize,
    pub edge_eps: f64,
    pub seed: u64,
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            tau: 0.1,
            alpha: DEFAULT_ALPHA,
            gamma: DEFAULT_GAMMA,
            n_iter: 1000,
            grid_size: None,
            mode: CostMode::PerMass,
            shuffle_mode: ShuffleMode::Reencode,
            n_shuffle: 2,
            n_triplet: 4,
            loss_mode: LossMode::Combined,
            window: 3,
            edge_eps: DEFAULT_EDGE_EPS,
            seed: 42,
            threads: 1,
        }
    }
}

impl RunConfig {
    /// `explicit`, else the file named by [`CONFIG_ENV`], else defaults.
    pub fn load(explicit: Option<&Path>) -> Result<Self, String> {
        let path: Option<PathBuf> = explicit
            .map(Path::to_path_buf)
            .or_else(|| std::env::var_os(CONFIG_ENV).filter(|v| !v.is_empty()).map(PathBuf::from));
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn ot(&self) -> OtConfig {
        OtConfig {
            tau: self.tau,
            max_iters: self.n_iter,
            mode: self.mode,
            grid_size: self.grid_size,
            ..OtConfig::default()
        }
    }

    pub fn batch(&self) -> BatchConfig {
        BatchConfig {
            window: self.window,
            n_shuffle: self.n_shuffle,
            n_triplet: self.n_triplet,
            shuffle_mode: self.shuffle_mode,
            gamma: self.gamma,
            edge_eps: self.edge_eps,
            seed: self.seed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_files_keep_defaults() {
        let c: RunConfig = serde_json::from_str(r#"{"tau": 0.5, "mode": "raw"}"#).unwrap();
        assert_eq!(c.tau, 0.5);
        assert_eq!(c.mode, CostMode::Raw);
        assert_eq!(c.alpha, 10.0);
        assert!(serde_json::from_str::<RunConfig>(r#"{"taux": 1}"#).is_err());
    }
}
