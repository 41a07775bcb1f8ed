//! Command-line surface. The `brscn` binary parses arguments and hands them to [`run`].

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::{
    emit_grid, emit_report, grid_search, run_trials, GridParam, ModelKind, ModelSpec, Task,
};
use crate::builder::TrainConfig;
use crate::data::{
    build_mg_task, gen_mackey_glass, gen_plant, load_csv_auto, write_csv, MgConfig, MgVariant,
    TaskSplits,
};
use crate::error::{Error, Result};
use crate::online::{run_online, OnlineOptions};
use crate::reservoir::BlockModel;

#[derive(Debug, Parser)]
#[command(
    name = "brscn",
    version,
    about = "Block recurrent stochastic configuration networks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a benchmark task as train/val/test CSV files.
    Gen {
        #[command(subcommand)]
        task: GenTask,
    },
    /// Train one model from CSV splits.
    Train(TrainArgs),
    /// Print the NRMSE of a saved model on a CSV file.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
    },
    /// Repeated seeded trials summarised as a JSON report.
    Bench(BenchArgs),
    /// Sweep block size or node budget and record mean validation NRMSE.
    Gridsearch(GridArgs),
    /// Adapt a model's readout over a stream with the projection algorithm.
    Online(OnlineArgs),
}

#[derive(Debug, Subcommand)]
pub enum GenTask {
    Mg {
        #[arg(long, value_enum, default_value_t = VariantArg::Mg)]
        variant: VariantArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    Plant {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum VariantArg {
    Mg,
    Mg1,
    Mg2,
}

impl From<VariantArg> for MgVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Mg => MgVariant::Mg,
            VariantArg::Mg1 => MgVariant::Mg1,
            VariantArg::Mg2 => MgVariant::Mg2,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModelArg {
    Esn,
    Rscn,
    Brscn,
}

impl From<ModelArg> for ModelKind {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Esn => ModelKind::Esn,
            ModelArg::Rscn => ModelKind::Rscn,
            ModelArg::Brscn => ModelKind::Brscn,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum TaskArg {
    Mg,
    Mg1,
    Mg2,
    Plant,
    Csv,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ParamArg {
    Nsub,
    Nodes,
}

/// Model choice shared by the training commands.
#[derive(Debug, Args)]
pub struct ModelOpts {
    #[arg(long, value_enum, default_value_t = ModelArg::Brscn)]
    pub model: ModelArg,
    /// TrainConfig JSON; the model kind's defaults when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// ESN reservoir size.
    #[arg(long, default_value_t = crate::bench::DEFAULT_ESN_NODES)]
    pub nodes: usize,
}

impl ModelOpts {
    fn spec(&self) -> Result<ModelSpec> {
        let kind = ModelKind::from(self.model);
        let cfg = match &self.config {
            Some(path) => TrainConfig::load(path)?,
            None => kind.default_config(),
        };
        Ok(ModelSpec {
            kind,
            cfg,
            esn_nodes: self.nodes,
        })
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub model: ModelOpts,
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub val: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Per-block convergence CSV (constructive learners only).
    #[arg(long)]
    pub log: Option<PathBuf>,
}

/// Task choice shared by `bench` and `gridsearch`.
#[derive(Debug, Args)]
pub struct TaskOpts {
    #[arg(long, value_enum)]
    pub task: TaskArg,
    /// Directory holding train.csv, val.csv and test.csv for `--task csv`.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub task: TaskOpts,
    #[command(flatten)]
    pub model: ModelOpts,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long, value_enum)]
    pub param: ParamArg,
    #[arg(long, value_delimiter = ',', required = true)]
    pub values: Vec<usize>,
    #[command(flatten)]
    pub task: TaskOpts,
    #[command(flatten)]
    pub model: ModelOpts,
    /// Trials per grid point.
    #[arg(long, default_value_t = 5)]
    pub trials: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct OnlineArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub stream: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub c: f64,
    #[arg(long, default_value_t = 50)]
    pub nw: usize,
    #[arg(long, default_value_t = f64::INFINITY)]
    pub eta1: f64,
    #[arg(long, default_value_t = 0.0)]
    pub eta2: f64,
    /// Model whose readout is the reference `W₀` for the error and Lyapunov columns.
    #[arg(long)]
    pub wref: Option<PathBuf>,
    #[arg(long)]
    pub log: PathBuf,
    /// Window report CSV; defaults to the log path with a `.pe.csv` suffix.
    #[arg(long)]
    pub pe_log: Option<PathBuf>,
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_splits(dir: &Path, splits: &TaskSplits) -> Result<()> {
    ensure_dir(dir)?;
    write_csv(dir.join("train.csv"), &splits.train)?;
    write_csv(dir.join("val.csv"), &splits.val)?;
    write_csv(dir.join("test.csv"), &splits.test)
}

/// Splits stored as `train.csv`, `val.csv` and `test.csv` under `dir`.
pub fn load_splits(dir: &Path, washout: usize) -> Result<TaskSplits> {
    Ok(TaskSplits {
        train: load_csv_auto(dir.join("train.csv"), washout)?,
        val: load_csv_auto(dir.join("val.csv"), washout)?,
        test: load_csv_auto(dir.join("test.csv"), washout)?,
    })
}

fn task_of(opts: &TaskOpts, cfg: &TrainConfig) -> Result<Task> {
    let mg = |v| Ok(Task::MackeyGlass(v));
    match opts.task {
        TaskArg::Mg => mg(MgVariant::Mg),
        TaskArg::Mg1 => mg(MgVariant::Mg1),
        TaskArg::Mg2 => mg(MgVariant::Mg2),
        TaskArg::Plant => Ok(Task::Plant),
        TaskArg::Csv => {
            let dir = opts
                .data
                .as_deref()
                .ok_or_else(|| Error::invalid("--task csv needs --data DIR"))?;
            Ok(Task::Fixed(Box::new(load_splits(dir, cfg.washout)?)))
        }
    }
}

/// Runs one parsed command, writing human-readable output to `out`.
pub fn run(cli: Cli, out: &mut impl std::io::Write) -> Result<()> {
    let say = |out: &mut dyn std::io::Write, line: String| {
        writeln!(out, "{line}").map_err(|e| Error::io("<stdout>", e))
    };
    match cli.command {
        Command::Gen { task } => match task {
            GenTask::Mg {
                variant,
                seed,
                out: dir,
            } => {
                let series = gen_mackey_glass(&MgConfig {
                    seed,
                    ..MgConfig::default()
                })?;
                write_splits(&dir, &build_mg_task(&series, variant.into())?)?;
                say(out, format!("wrote {}", dir.display()))
            }
            GenTask::Plant { seed, out: dir } => {
                write_splits(&dir, &gen_plant(seed)?)?;
                say(out, format!("wrote {}", dir.display()))
            }
        },
        Command::Train(args) => {
            let spec = args.model.spec()?;
            let washout = spec.cfg.washout;
            let train = load_csv_auto(&args.train, washout)?;
            let val = load_csv_auto(&args.val, washout)?;
            let (model, log) = spec.train(&train, &val, spec.cfg.base_seed)?;
            model.save(&args.out)?;
            if let (Some(path), Some(log)) = (&args.log, &log) {
                log.write_csv(path)?;
            }
            let train_nrmse = model.evaluate(&train.u, &train.t, washout)?;
            say(
                out,
                format!(
                    "{} with {} nodes, train NRMSE {train_nrmse}",
                    spec.kind,
                    model.reservoir_size()
                ),
            )
        }
        Command::Eval { model, data } => {
            let model = BlockModel::load(&model)?;
            let data = load_csv_auto(&data, model.washout)?;
            say(
                out,
                model.evaluate(&data.u, &data.t, data.washout)?.to_string(),
            )
        }
        Command::Bench(args) => {
            let spec = args.model.spec()?;
            let task = task_of(&args.task, &spec.cfg)?;
            let report = run_trials(&task, &spec, args.trials, args.task.seed)?;
            emit_report(&report, &args.out)?;
            say(
                out,
                format!(
                    "{} x{}: train {:.5} ± {:.5}, test {:.5} ± {:.5}",
                    report.model_kind,
                    report.trials,
                    report.train_nrmse_mean,
                    report.train_nrmse_std,
                    report.test_nrmse_mean,
                    report.test_nrmse_std
                ),
            )
        }
        Command::Gridsearch(args) => {
            let spec = args.model.spec()?;
            let task = task_of(&args.task, &spec.cfg)?;
            let param = match args.param {
                ParamArg::Nsub => GridParam::NSub,
                ParamArg::Nodes => GridParam::Nodes,
            };
            let result = grid_search(
                &task,
                &spec,
                param,
                &args.values,
                args.trials,
                args.task.seed,
            )?;
            emit_grid(&result, &args.out)?;
            say(out, format!("{} = {}", result.param, result.chosen))
        }
        Command::Online(args) => {
            let model = BlockModel::load(&args.model)?;
            let stream = load_csv_auto(&args.stream, model.washout)?;
            let w_reference = args
                .wref
                .as_ref()
                .map(BlockModel::load)
                .transpose()?
                .map(|m| m.w_out);
            let opts = OnlineOptions {
                gamma: args.gamma,
                c: args.c,
                n_w: args.nw,
                eta1: args.eta1,
                eta2: args.eta2,
                w_reference,
            };
            let log = run_online(&model, &stream, &opts)?;
            log.write_steps_csv(&args.log)?;
            let pe_path = args
                .pe_log
                .unwrap_or_else(|| args.log.with_extension("pe.csv"));
            log.write_windows_csv(&pe_path)?;
            let passed = log
                .windows
                .iter()
                .filter(|w| w.report.pe_satisfied && w.report.gain_ok)
                .count();
            say(
                out,
                format!(
                    "{} steps, {passed}/{} windows passed both monitors",
                    log.steps.len(),
                    log.windows.len()
                ),
            )
        }
    }
}
