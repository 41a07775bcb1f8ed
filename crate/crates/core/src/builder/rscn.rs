use crate::builder::brscn::{
    check_datasets, early_stop, refit_readout, supervised_search, Readout,
};
use crate::builder::log::{ConvergenceEntry, ConvergenceLog, Termination};
use crate::builder::score::xi_single_node;
use crate::builder::TrainConfig;
use crate::data::Dataset;
use crate::error::Result;
use crate::numeric::{nrmse, seeded_uniform, Matrix, RngStream};
use crate::reservoir::{harvest_block, scale_for_esp, Activation, BlockModel, SubReservoir};

const TAG_RSCN_INIT: u64 = 4;
const TAG_RSCN_NODE: u64 = 5;

/// Nodes in the randomly initialized reservoir before supervised growth starts.
pub const RSCN_INITIAL_NODES: usize = 5;

/// A growing lower-triangular reservoir kept in unscaled form; the scaled version is derived
/// from it whenever the size changes.
struct Grown {
    raw_w_r: Matrix,
    w_in: Matrix,
    bias: Matrix,
    lambdas: Vec<f64>,
}

impl Grown {
    fn size(&self) -> usize {
        self.raw_w_r.rows()
    }

    fn scaled(&self, alpha: f64) -> Result<SubReservoir> {
        let sub = SubReservoir {
            w_in: self.w_in.clone(),
            w_r: self.raw_w_r.clone(),
            bias: self.bias.clone(),
            lambda_used: self.lambdas.iter().cloned().fold(0.0, f64::max),
            alpha_effective: f64::NAN,
            scaled: false,
        };
        scale_for_esp(sub, alpha)
    }

    fn truncate(&mut self, n: usize) {
        self.raw_w_r = self.raw_w_r.row_range(0, n).columns(0, n);
        self.w_in = self.w_in.row_range(0, n);
        self.bias = self.bias.row_range(0, n);
        self.lambdas.truncate(n);
    }

    fn append(&mut self, node: Node) -> Result<()> {
        let n = self.size();
        let mut w = Matrix::zeros(n + 1, n + 1);
        for i in 0..n {
            w.row_mut(i)[..n].copy_from_slice(self.raw_w_r.row(i));
        }
        w.row_mut(n).copy_from_slice(&node.recurrent);
        self.raw_w_r = w;
        self.w_in = Matrix::vstack(&[&self.w_in, &Matrix::row_vector(&node.w_in)])?;
        self.bias = Matrix::vstack(&[&self.bias, &Matrix::row_vector(&[node.bias])])?;
        self.lambdas.push(node.lambda);
        Ok(())
    }
}

/// Unscaled weights of one candidate node: input row, recurrent row over existing nodes plus
/// its self-connection, and bias.
#[derive(Clone, Debug)]
struct Node {
    w_in: Vec<f64>,
    recurrent: Vec<f64>,
    bias: f64,
    lambda: f64,
}

fn draw_node(rng: &mut RngStream, k: usize, n: usize, lambda: f64) -> Node {
    let w_in = (0..k).map(|_| rng.uniform(-lambda, lambda)).collect();
    let recurrent = (0..=n).map(|_| rng.uniform(-lambda, lambda)).collect();
    let bias = rng.uniform(-lambda, lambda);
    Node {
        w_in,
        recurrent,
        bias,
        lambda,
    }
}

/// Trajectory of a candidate node driven by the existing node states `x` (N × n, full length)
/// with its recurrent row multiplied by `factor`.
fn node_trajectory(
    node: &Node,
    factor: f64,
    x: &Matrix,
    u: &Matrix,
    activation: Activation,
) -> Vec<f64> {
    let n_prev = x.rows();
    let steps = u.cols();
    let mut drive: Vec<f64> = (0..steps).map(|_| node.bias).collect();
    for (k, w) in node.w_in.iter().enumerate() {
        for (d, v) in drive.iter_mut().zip(u.row(k)) {
            *d += w * v;
        }
    }
    for i in 0..n_prev {
        let w = factor * node.recurrent[i];
        for (d, v) in drive[1..].iter_mut().zip(x.row(i)) {
            *d += w * v;
        }
    }
    let self_w = factor * node.recurrent[n_prev];
    let mut out = vec![0.0; steps];
    let mut prev = 0.0;
    for t in 0..steps {
        prev = activation.apply(drive[t] + self_w * prev);
        out[t] = prev;
    }
    out
}

/// Point-incremental construction with tanh units.
pub fn train_rscn(
    train: &Dataset,
    val: &Dataset,
    cfg: &TrainConfig,
) -> Result<(BlockModel, ConvergenceLog)> {
    train_rscn_with(train, val, cfg, Activation::Tanh)
}

/// Point-incremental construction on a lower-triangular reservoir.
///
/// Starts from five random nodes, then adds one node at a time. Each new node connects to every
/// existing node and to itself, so earlier rows are untouched. Candidates are scored with the
/// single-node supervisory inequality using the current scale factor; after acceptance the whole
/// reservoir is rescaled with the echo-state rule and the readout refit. Here `j_max` and
/// `j_step` count nodes. `n_sub` is ignored.
pub fn train_rscn_with(
    train: &Dataset,
    val: &Dataset,
    cfg: &TrainConfig,
    activation: Activation,
) -> Result<(BlockModel, ConvergenceLog)> {
    cfg.validate()?;
    check_datasets(train, val)?;
    let k = train.input_dim();
    let include_input = cfg.readout_includes_input;
    let (t_train, t_val) = (train.effective_targets(), val.effective_targets());
    let (u_train, u_val) = (train.effective_inputs(), val.effective_inputs());

    let mut rng = RngStream::derive(cfg.base_seed, &[TAG_RSCN_INIT]);
    let lambda0 = cfg.lambda_grid[0];
    let n0 = RSCN_INITIAL_NODES;
    let mut raw = seeded_uniform(&mut rng, n0, n0, lambda0)?;
    for i in 0..n0 {
        raw.row_mut(i)[i + 1..].iter_mut().for_each(|v| *v = 0.0);
    }
    let mut grown = Grown {
        raw_w_r: raw,
        w_in: seeded_uniform(&mut rng, n0, k, lambda0)?,
        bias: seeded_uniform(&mut rng, n0, 1, lambda0)?,
        lambdas: vec![lambda0; n0],
    };

    struct Snapshot {
        sub: SubReservoir,
        full_train: Matrix,
        readout: Readout,
        train_nrmse: f64,
        val_nrmse: f64,
        val_error: f64,
    }

    let evaluate = |grown: &Grown| -> Result<Snapshot> {
        let sub = grown.scaled(cfg.alpha)?;
        let full_train = harvest_block(&sub, activation, &train.u)?;
        let x_train = full_train.columns(train.washout, train.len());
        let x_val = harvest_block(&sub, activation, &val.u)?.columns(val.washout, val.len());
        let readout = refit_readout(&[&x_train], include_input.then_some(&u_train), &t_train)?;
        let train_nrmse = nrmse(&readout.residual.add(&t_train)?, &t_train)?;
        let design_val = if include_input {
            Matrix::vstack(&[&x_val, &u_val])?
        } else {
            x_val
        };
        let y_val = readout.w_out.matmul(&design_val)?;
        Ok(Snapshot {
            val_error: y_val.sub(&t_val)?.frobenius_norm(),
            val_nrmse: nrmse(&y_val, &t_val)?,
            sub,
            full_train,
            readout,
            train_nrmse,
        })
    };

    let mut snap = evaluate(&grown)?;
    let mut log = ConvergenceLog {
        entries: vec![ConvergenceEntry {
            block_index: 1,
            total_nodes: n0,
            train_nrmse: snap.train_nrmse,
            val_nrmse: snap.val_nrmse,
            xi_total: f64::NAN,
            lambda_used: lambda0,
            r_used: cfg.r_initial,
            mu: f64::NAN,
            xi_per_output: Vec::new(),
            residual_sq_before: t_train.frobenius_norm_sq(),
            residual_sq_after: snap.readout.residual.frobenius_norm_sq(),
            val_error: snap.val_error,
        }],
        termination: Termination::JMax,
        retained: 1,
        accepted_blocks: Vec::new(),
    };
    let mut val_errors = vec![snap.val_error];

    loop {
        let n = grown.size();
        if snap.readout.residual.frobenius_norm() <= cfg.epsilon {
            log.termination = Termination::Epsilon;
            break;
        }
        if n >= cfg.j_max {
            log.termination = Termination::JMax;
            break;
        }
        if early_stop(&val_errors, cfg.j_step) {
            log.accepted_blocks = vec![snap.sub.clone()];
            grown.truncate(n - cfg.j_step);
            val_errors.truncate(val_errors.len() - cfg.j_step);
            snap = evaluate(&grown)?;
            log.termination = Termination::EarlyStop;
            break;
        }

        let raw_norm = grown.raw_w_r.frobenius_norm();
        let factor = if raw_norm > 0.0 {
            snap.sub.w_r.frobenius_norm() / raw_norm
        } else {
            1.0
        };
        let e = &snap.readout.residual;
        let x_full = &snap.full_train;
        let mu_of = |r: f64| (1.0 - r) / (n + 1) as f64;
        let found = supervised_search(cfg, TAG_RSCN_NODE, n, mu_of, |rng, lambda, r, mu| {
            let node = draw_node(rng, k, n, lambda);
            let g = node_trajectory(&node, factor, x_full, &train.u, activation);
            Ok(xi_single_node(e, &g[train.washout..], r, mu)?.map(|s| (node, s)))
        })?;
        let Some(found) = found else {
            log.termination = Termination::Stalled;
            break;
        };

        let before = snap.readout.residual.frobenius_norm_sq();
        grown.append(found.candidate)?;
        snap = evaluate(&grown)?;
        val_errors.push(snap.val_error);
        log.entries.push(ConvergenceEntry {
            block_index: log.entries.len() + 1,
            total_nodes: grown.size(),
            train_nrmse: snap.train_nrmse,
            val_nrmse: snap.val_nrmse,
            xi_total: found.score.xi_total,
            lambda_used: found.score.lambda,
            r_used: found.r_used,
            mu: found.mu,
            xi_per_output: found.score.xi_per_output,
            residual_sq_before: before,
            residual_sq_after: snap.readout.residual.frobenius_norm_sq(),
            val_error: snap.val_error,
        });
    }
    log.retained = val_errors.len();
    if log.accepted_blocks.is_empty() {
        log.accepted_blocks = vec![snap.sub.clone()];
    }

    let mut model = BlockModel::new(
        vec![snap.sub],
        activation,
        include_input,
        train.washout,
        k,
        train.output_dim(),
    );
    model.w_out = snap.readout.w_out;
    Ok((model, log))
}
