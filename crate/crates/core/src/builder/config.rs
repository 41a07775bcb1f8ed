use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hyperparameters of the constructive learners.
///
/// For the point-incremental learner `j_max` and `j_step` count nodes; for the block learner
/// they count blocks. `j_step = 0` disables early stopping.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub lambda_grid: Vec<f64>,
    pub r_initial: f64,
    pub g_max: usize,
    pub epsilon: f64,
    pub j_max: usize,
    pub j_step: usize,
    pub n_sub: usize,
    pub alpha: f64,
    pub sparsity_band: [f64; 2],
    pub washout: usize,
    pub base_seed: u64,
    pub max_r_anneals: usize,
    pub readout_includes_input: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lambda_grid: vec![0.5, 1.0, 5.0, 10.0, 30.0, 50.0, 100.0],
            r_initial: 0.9,
            g_max: 100,
            epsilon: 1e-6,
            j_max: 11,
            j_step: 2,
            n_sub: 10,
            alpha: 0.8,
            sparsity_band: [0.01, 0.03],
            washout: 20,
            base_seed: 0,
            max_r_anneals: 20,
            readout_includes_input: false,
        }
    }
}

impl TrainConfig {
    /// Defaults for the point-incremental learner: up to 110 nodes, patience of 5 nodes.
    pub fn rscn_default() -> Self {
        TrainConfig {
            j_max: 110,
            j_step: 5,
            n_sub: 1,
            ..TrainConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::invalid(m));
        if self.lambda_grid.is_empty() {
            return fail("lambda_grid is empty".into());
        }
        if self
            .lambda_grid
            .iter()
            .any(|l| !(*l > 0.0) || !l.is_finite())
        {
            return fail("lambda_grid entries must be positive".into());
        }
        if self.lambda_grid.windows(2).any(|w| w[0] >= w[1]) {
            return fail("lambda_grid must be strictly ascending".into());
        }
        if !(self.r_initial > 0.0 && self.r_initial < 1.0) {
            return fail(format!(
                "r_initial must lie in (0, 1), got {}",
                self.r_initial
            ));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return fail(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if !(self.epsilon > 0.0) {
            return fail("epsilon must be positive".into());
        }
        if self.g_max == 0 || self.n_sub == 0 || self.j_max == 0 {
            return fail("g_max, n_sub and j_max must be at least 1".into());
        }
        if self.j_step >= self.j_max {
            return fail(format!(
                "j_step ({}) must be below j_max ({})",
                self.j_step, self.j_max
            ));
        }
        let [low, high] = self.sparsity_band;
        if !(low > 0.0 && low <= high && high <= 1.0) {
            return fail(format!(
                "sparsity_band must satisfy 0 < low <= high <= 1, got [{low}, {high}]"
            ));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: TrainConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        TrainConfig::from_json(&text).map_err(|e| match e {
            Error::Json(err) => Error::Format {
                path: path.to_path_buf(),
                message: err.to_string(),
            },
            other => other,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self)?;
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}
