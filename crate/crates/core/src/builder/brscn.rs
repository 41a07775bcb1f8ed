use crate::builder::log::{ConvergenceEntry, ConvergenceLog, Termination};
use crate::builder::score::{xi_scores, CandidateScore};
use crate::builder::TrainConfig;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::numeric::{least_squares_readout, nrmse, Matrix, RngStream};
use crate::reservoir::{
    harvest_block, sample_subreservoir, scale_for_esp, Activation, BlockModel, SubReservoir,
};

pub(crate) const TAG_FIRST_BLOCK: u64 = 1;
pub(crate) const TAG_CANDIDATE: u64 = 2;
pub(crate) const TAG_ANNEAL: u64 = 3;

/// Readout weights and the training residual `e = w_out·X − T` they leave.
#[derive(Clone, Debug)]
pub struct Readout {
    pub w_out: Matrix,
    pub residual: Matrix,
}

/// Global least-squares refit over the stacked block states, followed by the input rows when
/// `inputs` is given. Every matrix must already have the washout columns removed.
pub fn refit_readout(states: &[&Matrix], inputs: Option<&Matrix>, t: &Matrix) -> Result<Readout> {
    let mut parts: Vec<&Matrix> = states.to_vec();
    if let Some(u) = inputs {
        parts.push(u);
    }
    if parts.iter().any(|p| p.cols() != t.cols()) {
        return Err(Error::invalid("state and target column counts differ"));
    }
    let x = if parts.is_empty() {
        Matrix::zeros(0, t.cols())
    } else {
        Matrix::vstack(&parts)?
    };
    let w_out = least_squares_readout(&x, t, 0.0)?;
    let residual = w_out.matmul(&x)?.sub(t)?;
    Ok(Readout { w_out, residual })
}

/// True when the last `j_step + 1` validation errors never decrease. `j_step = 0` disables
/// the check.
pub fn early_stop(val_errors: &[f64], j_step: usize) -> bool {
    if j_step == 0 || val_errors.len() < j_step + 1 {
        return false;
    }
    val_errors[val_errors.len() - j_step - 1..]
        .windows(2)
        .all(|w| w[0] <= w[1])
}

/// Outcome of a supervised candidate search.
#[derive(Clone, Debug)]
pub struct Configured<T> {
    pub candidate: T,
    pub score: CandidateScore,
    pub r_used: f64,
    pub mu: f64,
    pub anneals: usize,
    /// Every passing candidate at the accepted `λ`.
    pub pool: Vec<CandidateScore>,
}

/// Scans `lambda_grid` in order. At each `λ`, `g_max` candidates are drawn from streams keyed by
/// `(tag, j, anneal, λ index, k)`; if none passes, `r` is raised by `τ ~ U(0, 1 − r)` and a
/// fresh batch is drawn at the same `λ`, up to `max_r_anneals` times, before moving on to the
/// next `λ` with `r` reset to `r_initial`. The first passing batch wins and its highest-scoring
/// candidate (lowest index on ties) is returned.
pub(crate) fn supervised_search<T>(
    cfg: &TrainConfig,
    tag: u64,
    j: usize,
    mu_of: impl Fn(f64) -> f64,
    mut evaluate: impl FnMut(&mut RngStream, f64, f64, f64) -> Result<Option<(T, CandidateScore)>>,
) -> Result<Option<Configured<T>>> {
    for (li, &lambda) in cfg.lambda_grid.iter().enumerate() {
        let mut r = cfg.r_initial;
        for anneal in 0..=cfg.max_r_anneals {
            let mu = mu_of(r);
            let mut best: Option<(T, CandidateScore)> = None;
            let mut pool = Vec::new();
            for k in 0..cfg.g_max {
                let mut rng = RngStream::derive(
                    cfg.base_seed,
                    &[tag, j as u64, anneal as u64, li as u64, k as u64],
                );
                let Some((cand, mut score)) = evaluate(&mut rng, lambda, r, mu)? else {
                    continue;
                };
                score.lambda = lambda;
                score.candidate_index = k;
                if !score.passes() {
                    continue;
                }
                pool.push(score.clone());
                if best
                    .as_ref()
                    .is_none_or(|(_, b)| score.xi_total > b.xi_total)
                {
                    best = Some((cand, score));
                }
            }
            if let Some((candidate, score)) = best {
                return Ok(Some(Configured {
                    candidate,
                    score,
                    r_used: r,
                    mu,
                    anneals: anneal,
                    pool,
                }));
            }
            let mut rng = RngStream::derive(
                cfg.base_seed,
                &[TAG_ANNEAL, tag, j as u64, li as u64, anneal as u64],
            );
            let tau = rng.uniform(0.0, 1.0 - r);
            r = (r + tau).min(1.0 - 1e-6);
        }
    }
    Ok(None)
}

/// A scaled block drawn with a density from the sparsity band.
pub(crate) fn draw_block(
    rng: &mut RngStream,
    cfg: &TrainConfig,
    n: usize,
    k: usize,
    lambda: f64,
) -> Result<SubReservoir> {
    let [low, high] = cfg.sparsity_band;
    let density = if high > low {
        rng.uniform(low, high)
    } else {
        low
    };
    scale_for_esp(sample_subreservoir(rng, n, k, lambda, density)?, cfg.alpha)
}

/// A newly configured block with its post-washout training states.
pub type ConfiguredBlock = Configured<(SubReservoir, Matrix)>;

/// Finds block `j + 1` given the current training residual `e` (post-washout columns) and the
/// full training input `u_seq`.
pub fn configure_block(
    e: &Matrix,
    u_seq: &Matrix,
    washout: usize,
    j: usize,
    cfg: &TrainConfig,
    activation: Activation,
) -> Result<ConfiguredBlock> {
    if u_seq.cols() != e.cols() + washout {
        return Err(Error::invalid(format!(
            "residual has {} columns but input has {} after washout",
            e.cols(),
            u_seq.cols().saturating_sub(washout)
        )));
    }
    let n_sub = cfg.n_sub;
    let mu_of = |r: f64| (1.0 - r) / ((j + 1) as f64 * n_sub as f64);
    let found = supervised_search(cfg, TAG_CANDIDATE, j, mu_of, |rng, lambda, r, mu| {
        let block = draw_block(rng, cfg, n_sub, u_seq.rows(), lambda)?;
        let states = harvest_block(&block, activation, u_seq)?.columns(washout, u_seq.cols());
        Ok(xi_scores(e, &states, r, mu)?.map(|s| ((block, states), s)))
    })?;
    found.ok_or(Error::ConstructionStalled {
        block: j + 1,
        anneals: cfg.max_r_anneals,
    })
}

pub(crate) fn check_datasets(train: &Dataset, val: &Dataset) -> Result<()> {
    if train.is_empty() || val.is_empty() {
        return Err(Error::invalid(
            "training and validation splits must be non-empty",
        ));
    }
    if train.input_dim() != val.input_dim() || train.output_dim() != val.output_dim() {
        return Err(Error::invalid(format!(
            "train is {}→{}, validation is {}→{}",
            train.input_dim(),
            train.output_dim(),
            val.input_dim(),
            val.output_dim()
        )));
    }
    if train.input_dim() == 0 || train.output_dim() == 0 {
        return Err(Error::invalid(
            "datasets need at least one input and one output",
        ));
    }
    Ok(())
}

/// Book-keeping shared by the block learner's main loop.
struct Growth<'a> {
    train: &'a Dataset,
    val: &'a Dataset,
    activation: Activation,
    include_input: bool,
    t_train: Matrix,
    t_val: Matrix,
    u_train: Matrix,
    u_val: Matrix,
    blocks: Vec<SubReservoir>,
    train_states: Vec<Matrix>,
    val_states: Vec<Matrix>,
}

struct Fit {
    readout: Readout,
    train_nrmse: f64,
    val_nrmse: f64,
    val_error: f64,
}

impl<'a> Growth<'a> {
    fn push(&mut self, block: SubReservoir, train_states: Matrix) -> Result<()> {
        let v = harvest_block(&block, self.activation, &self.val.u)?
            .columns(self.val.washout, self.val.len());
        self.blocks.push(block);
        self.train_states.push(train_states);
        self.val_states.push(v);
        Ok(())
    }

    fn truncate(&mut self, keep: usize) {
        self.blocks.truncate(keep);
        self.train_states.truncate(keep);
        self.val_states.truncate(keep);
    }

    fn fit(&self) -> Result<Fit> {
        let inputs = self.include_input.then_some(&self.u_train);
        let train_refs: Vec<&Matrix> = self.train_states.iter().collect();
        let readout = refit_readout(&train_refs, inputs, &self.t_train)?;
        let train_nrmse = nrmse(&readout.residual.add(&self.t_train)?, &self.t_train)?;

        let mut val_parts: Vec<&Matrix> = self.val_states.iter().collect();
        if self.include_input {
            val_parts.push(&self.u_val);
        }
        let y_val = readout.w_out.matmul(&Matrix::vstack(&val_parts)?)?;
        let val_error = y_val.sub(&self.t_val)?.frobenius_norm();
        let val_nrmse = nrmse(&y_val, &self.t_val)?;
        Ok(Fit {
            readout,
            train_nrmse,
            val_nrmse,
            val_error,
        })
    }

    fn into_model(self, w_out: Matrix) -> BlockModel {
        let mut model = BlockModel::new(
            self.blocks,
            self.activation,
            self.include_input,
            self.train.washout,
            self.train.input_dim(),
            self.train.output_dim(),
        );
        model.w_out = w_out;
        model
    }
}

/// Block-incremental construction with tanh units.
pub fn train_brscn(
    train: &Dataset,
    val: &Dataset,
    cfg: &TrainConfig,
) -> Result<(BlockModel, ConvergenceLog)> {
    train_brscn_with(train, val, cfg, Activation::Tanh)
}

/// Block-incremental construction.
///
/// Block 1 is drawn at the first grid scale and accepted without scoring. Each further block
/// comes from [`configure_block`] and is followed by a global refit. The run ends when the
/// training residual reaches `epsilon`, `j_max` blocks exist, no candidate can be configured,
/// or validation error has not decreased over `j_step` additions, in which case the last
/// `j_step` blocks are dropped and the readout refit.
pub fn train_brscn_with(
    train: &Dataset,
    val: &Dataset,
    cfg: &TrainConfig,
    activation: Activation,
) -> Result<(BlockModel, ConvergenceLog)> {
    cfg.validate()?;
    check_datasets(train, val)?;
    let mut g = Growth {
        train,
        val,
        activation,
        include_input: cfg.readout_includes_input,
        t_train: train.effective_targets(),
        t_val: val.effective_targets(),
        u_train: train.effective_inputs(),
        u_val: val.effective_inputs(),
        blocks: Vec::new(),
        train_states: Vec::new(),
        val_states: Vec::new(),
    };

    let mut rng = RngStream::derive(cfg.base_seed, &[TAG_FIRST_BLOCK]);
    let lambda0 = cfg.lambda_grid[0];
    let first = draw_block(&mut rng, cfg, cfg.n_sub, train.input_dim(), lambda0)?;
    let states = harvest_block(&first, activation, &train.u)?.columns(train.washout, train.len());
    g.push(first.clone(), states)?;
    let mut fit = g.fit()?;

    let mut log = ConvergenceLog {
        entries: vec![ConvergenceEntry {
            block_index: 1,
            total_nodes: cfg.n_sub,
            train_nrmse: fit.train_nrmse,
            val_nrmse: fit.val_nrmse,
            xi_total: f64::NAN,
            lambda_used: lambda0,
            r_used: cfg.r_initial,
            mu: f64::NAN,
            xi_per_output: Vec::new(),
            residual_sq_before: g.t_train.frobenius_norm_sq(),
            residual_sq_after: fit.readout.residual.frobenius_norm_sq(),
            val_error: fit.val_error,
        }],
        termination: Termination::JMax,
        retained: 1,
        accepted_blocks: vec![first],
    };
    let mut val_errors = vec![fit.val_error];

    loop {
        let j = g.blocks.len();
        if fit.readout.residual.frobenius_norm() <= cfg.epsilon {
            log.termination = Termination::Epsilon;
            break;
        }
        if j >= cfg.j_max {
            log.termination = Termination::JMax;
            break;
        }
        if early_stop(&val_errors, cfg.j_step) {
            g.truncate(j - cfg.j_step);
            fit = g.fit()?;
            log.termination = Termination::EarlyStop;
            break;
        }
        let configured = match configure_block(
            &fit.readout.residual,
            &train.u,
            train.washout,
            j,
            cfg,
            activation,
        ) {
            Ok(c) => c,
            Err(Error::ConstructionStalled { .. }) => {
                log.termination = Termination::Stalled;
                break;
            }
            Err(e) => return Err(e),
        };
        let before = fit.readout.residual.frobenius_norm_sq();
        let (block, states) = configured.candidate;
        log.accepted_blocks.push(block.clone());
        g.push(block, states)?;
        fit = g.fit()?;
        val_errors.push(fit.val_error);
        log.entries.push(ConvergenceEntry {
            block_index: j + 1,
            total_nodes: g.blocks.iter().map(SubReservoir::size).sum(),
            train_nrmse: fit.train_nrmse,
            val_nrmse: fit.val_nrmse,
            xi_total: configured.score.xi_total,
            lambda_used: configured.score.lambda,
            r_used: configured.r_used,
            mu: configured.mu,
            xi_per_output: configured.score.xi_per_output,
            residual_sq_before: before,
            residual_sq_after: fit.readout.residual.frobenius_norm_sq(),
            val_error: fit.val_error,
        });
    }
    log.retained = g.blocks.len();
    Ok((g.into_model(fit.readout.w_out), log))
}
