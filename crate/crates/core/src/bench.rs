//! Repeated seeded trials, grid search over reservoir or block size, and report files.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::builder::{train_brscn, train_esn, train_rscn, ConvergenceLog, TrainConfig};
use crate::data::{
    build_mg_task, gen_mackey_glass, gen_plant, Dataset, MgConfig, MgVariant, TaskSplits,
};
use crate::error::{Error, Result};
use crate::reservoir::BlockModel;

/// ESN reservoir size used when none is given.
pub const DEFAULT_ESN_NODES: usize = 96;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "ESN")]
    Esn,
    #[serde(rename = "RSCN")]
    Rscn,
    #[serde(rename = "BRSCN")]
    Brscn,
}

impl ModelKind {
    /// The configuration a learner of this kind starts from when no file is given.
    pub fn default_config(self) -> TrainConfig {
        match self {
            ModelKind::Rscn => TrainConfig::rscn_default(),
            ModelKind::Esn | ModelKind::Brscn => TrainConfig::default(),
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Esn => "ESN",
            ModelKind::Rscn => "RSCN",
            ModelKind::Brscn => "BRSCN",
        })
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "esn" => Ok(ModelKind::Esn),
            "rscn" => Ok(ModelKind::Rscn),
            "brscn" => Ok(ModelKind::Brscn),
            other => Err(Error::invalid(format!("unknown model '{other}'"))),
        }
    }
}

/// Where a trial's data comes from.
#[derive(Clone, Debug)]
pub enum Task {
    /// Mackey–Glass prediction; each trial integrates a fresh series seeded by the trial seed.
    MackeyGlass(MgVariant),
    /// Nonlinear plant identification with a fresh random input per trial seed.
    Plant,
    /// Fixed splits shared by every trial; only the model seed varies.
    Fixed(Box<TaskSplits>),
}

impl Task {
    pub fn splits(&self, seed: u64) -> Result<TaskSplits> {
        match self {
            Task::MackeyGlass(variant) => {
                let series = gen_mackey_glass(&MgConfig {
                    seed,
                    ..MgConfig::default()
                })?;
                build_mg_task(&series, *variant)
            }
            Task::Plant => gen_plant(seed),
            Task::Fixed(splits) => Ok((**splits).clone()),
        }
    }
}

/// A learner and its hyperparameters.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub cfg: TrainConfig,
    /// Reservoir size of the ESN baseline; ignored by the constructive learners.
    pub esn_nodes: usize,
}

impl ModelSpec {
    pub fn new(kind: ModelKind, cfg: TrainConfig) -> Self {
        ModelSpec {
            kind,
            cfg,
            esn_nodes: DEFAULT_ESN_NODES,
        }
    }

    /// Trains with every random stream rooted at `seed`. The ESN ignores `val`.
    pub fn train(
        &self,
        train: &Dataset,
        val: &Dataset,
        seed: u64,
    ) -> Result<(BlockModel, Option<ConvergenceLog>)> {
        let cfg = TrainConfig {
            base_seed: seed,
            ..self.cfg.clone()
        };
        match self.kind {
            ModelKind::Esn => train_esn(train, &cfg, self.esn_nodes).map(|m| (m, None)),
            ModelKind::Rscn => train_rscn(train, val, &cfg).map(|(m, l)| (m, Some(l))),
            ModelKind::Brscn => train_brscn(train, val, &cfg).map(|(m, l)| (m, Some(l))),
        }
    }

    /// Largest block size of models this spec builds.
    pub fn block_size(&self) -> usize {
        match self.kind {
            ModelKind::Esn => self.esn_nodes,
            ModelKind::Rscn => 1,
            ModelKind::Brscn => self.cfg.n_sub,
        }
    }
}

/// Everything one seeded build and evaluation produced.
#[derive(Clone, Debug)]
pub struct TrialOutcome {
    pub seed: u64,
    pub model: BlockModel,
    pub log: Option<ConvergenceLog>,
    pub train_nrmse: f64,
    pub val_nrmse: f64,
    pub test_nrmse: f64,
    pub train_time: f64,
}

pub fn run_trial(task: &Task, spec: &ModelSpec, seed: u64) -> Result<TrialOutcome> {
    let splits = task.splits(seed)?;
    let start = Instant::now();
    let (model, log) = spec.train(&splits.train, &splits.val, seed)?;
    let train_time = start.elapsed().as_secs_f64();
    let eval = |d: &Dataset| model.evaluate(&d.u, &d.t, d.washout);
    Ok(TrialOutcome {
        seed,
        train_nrmse: eval(&splits.train)?,
        val_nrmse: eval(&splits.val)?,
        test_nrmse: eval(&splits.test)?,
        train_time,
        log,
        model,
    })
}

/// Aggregated results of repeated trials. Standard deviations use the `n − 1` denominator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialReport {
    pub model_kind: ModelKind,
    pub n_sub: usize,
    /// Mean reservoir size over trials, rounded to the nearest node.
    pub reservoir_size: usize,
    pub trials: usize,
    pub train_nrmse_mean: f64,
    pub train_nrmse_std: f64,
    pub test_nrmse_mean: f64,
    pub test_nrmse_std: f64,
    pub train_time_mean: f64,
    pub train_time_std: f64,
}

/// Mean and sample standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

impl TrialReport {
    pub fn from_outcomes(spec: &ModelSpec, outcomes: &[TrialOutcome]) -> Result<Self> {
        if outcomes.is_empty() {
            return Err(Error::invalid("a report needs at least one trial"));
        }
        let pick = |f: fn(&TrialOutcome) -> f64| outcomes.iter().map(f).collect::<Vec<_>>();
        let (train_nrmse_mean, train_nrmse_std) = mean_std(&pick(|o| o.train_nrmse));
        let (test_nrmse_mean, test_nrmse_std) = mean_std(&pick(|o| o.test_nrmse));
        let (train_time_mean, train_time_std) = mean_std(&pick(|o| o.train_time));
        let (size_mean, _) = mean_std(&pick(|o| o.model.reservoir_size() as f64));
        Ok(TrialReport {
            model_kind: spec.kind,
            n_sub: spec.block_size(),
            reservoir_size: size_mean.round() as usize,
            trials: outcomes.len(),
            train_nrmse_mean,
            train_nrmse_std,
            test_nrmse_mean,
            test_nrmse_std,
            train_time_mean,
            train_time_std,
        })
    }
}

/// Runs `trials` builds with seeds `base_seed`, `base_seed + 1`, … and keeps every outcome.
pub fn run_trial_outcomes(
    task: &Task,
    spec: &ModelSpec,
    trials: usize,
    base_seed: u64,
) -> Result<Vec<TrialOutcome>> {
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    (0..trials as u64)
        .map(|i| run_trial(task, spec, base_seed + i))
        .collect()
}

pub fn run_trials(
    task: &Task,
    spec: &ModelSpec,
    trials: usize,
    base_seed: u64,
) -> Result<TrialReport> {
    TrialReport::from_outcomes(spec, &run_trial_outcomes(task, spec, trials, base_seed)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GridParam {
    /// Block size of the block learner.
    NSub,
    /// ESN reservoir size, or the node budget of the constructive learners.
    Nodes,
}

impl GridParam {
    pub fn name(self) -> &'static str {
        match self {
            GridParam::NSub => "nsub",
            GridParam::Nodes => "nodes",
        }
    }

    /// `spec` with the swept parameter set to `value`.
    ///
    /// A node budget for the block learner becomes `ceil(value / n_sub)` blocks.
    pub fn apply(self, spec: &ModelSpec, value: usize) -> Result<ModelSpec> {
        if value == 0 {
            return Err(Error::invalid(format!(
                "{} must be at least 1",
                self.name()
            )));
        }
        let mut out = spec.clone();
        match (self, spec.kind) {
            (GridParam::NSub, ModelKind::Brscn) => out.cfg.n_sub = value,
            (GridParam::NSub, kind) => {
                return Err(Error::invalid(format!(
                    "nsub can only be swept for BRSCN, not {kind}"
                )))
            }
            (GridParam::Nodes, ModelKind::Esn) => out.esn_nodes = value,
            (GridParam::Nodes, ModelKind::Rscn) => out.cfg.j_max = value,
            (GridParam::Nodes, ModelKind::Brscn) => out.cfg.j_max = value.div_ceil(spec.cfg.n_sub),
        }
        if out.cfg.j_step >= out.cfg.j_max {
            out.cfg.j_step = 0;
        }
        Ok(out)
    }
}

impl FromStr for GridParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "nsub" | "n_sub" => Ok(GridParam::NSub),
            "nodes" => Ok(GridParam::Nodes),
            other => Err(Error::invalid(format!("unknown grid parameter '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridResult {
    pub param: String,
    pub points: Vec<(usize, f64)>,
    pub chosen: usize,
}

pub const GRID_CSV_HEADER: &str = "param_value,val_nrmse_mean";

impl GridResult {
    /// Picks the smallest mean validation error, preferring the smaller value on ties.
    pub fn from_points(param: &str, points: Vec<(usize, f64)>) -> Result<Self> {
        let chosen = points
            .iter()
            .copied()
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
            .ok_or_else(|| Error::invalid("grid search needs at least one value"))?
            .0;
        Ok(GridResult {
            param: param.to_string(),
            points,
            chosen,
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("{GRID_CSV_HEADER}\n");
        for (v, e) in &self.points {
            out.push_str(&format!("{v},{e}\n"));
        }
        out
    }
}

pub fn grid_search(
    task: &Task,
    spec: &ModelSpec,
    param: GridParam,
    values: &[usize],
    trials_per_point: usize,
    base_seed: u64,
) -> Result<GridResult> {
    if values.is_empty() {
        return Err(Error::invalid("grid search needs at least one value"));
    }
    let mut points = Vec::with_capacity(values.len());
    for &v in values {
        let point_spec = param.apply(spec, v)?;
        let outcomes = run_trial_outcomes(task, &point_spec, trials_per_point, base_seed)?;
        let (mean, _) = mean_std(&outcomes.iter().map(|o| o.val_nrmse).collect::<Vec<_>>());
        points.push((v, mean));
    }
    GridResult::from_points(param.name(), points)
}

pub fn emit_report(report: &TrialReport, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, serde_json::to_string_pretty(report)?).map_err(|e| Error::io(path, e))
}

pub fn load_report(path: impl AsRef<Path>) -> Result<TrialReport> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn emit_grid(result: &GridResult, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, result.to_csv()).map_err(|e| Error::io(path, e))
}
