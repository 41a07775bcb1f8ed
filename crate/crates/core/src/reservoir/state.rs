use crate::error::{Error, Result};
use crate::numeric::Matrix;
use crate::reservoir::{Activation, BlockModel, SubReservoir};

/// Reservoir states collected over a sequence, one column per retained time step.
#[derive(Clone, Debug, PartialEq)]
pub struct StateMatrix {
    pub values: Matrix,
    pub washout_dropped: usize,
}

impl StateMatrix {
    pub fn dim(&self) -> usize {
        self.values.rows()
    }

    pub fn len(&self) -> usize {
        self.values.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.values.cols() == 0
    }
}

/// One update of every block: `x⁽ʲ⁾(n) = g(W_in⁽ʲ⁾·u + W_r⁽ʲ⁾·x⁽ʲ⁾(n−1) + b⁽ʲ⁾)`.
///
/// `x_prev` is the concatenation of the block states in model order.
pub fn step_block(model: &BlockModel, x_prev: &[f64], u: &[f64]) -> Result<Vec<f64>> {
    let total = model.reservoir_size();
    if x_prev.len() != total || u.len() != model.input_dim {
        return Err(Error::invalid(format!(
            "step expects state of {total} and input of {}, got {} and {}",
            model.input_dim,
            x_prev.len(),
            u.len()
        )));
    }
    let mut next = vec![0.0; total];
    let mut offset = 0;
    for block in &model.blocks {
        let n = block.size();
        step_one(
            block,
            model.activation,
            &x_prev[offset..offset + n],
            u,
            &mut next[offset..offset + n],
        );
        offset += n;
    }
    Ok(next)
}

fn step_one(block: &SubReservoir, act: Activation, prev: &[f64], u: &[f64], out: &mut [f64]) {
    for (i, o) in out.iter_mut().enumerate() {
        let mut z = block.bias[(i, 0)];
        for (w, x) in block.w_in.row(i).iter().zip(u) {
            z += w * x;
        }
        for (w, x) in block.w_r.row(i).iter().zip(prev) {
            z += w * x;
        }
        *o = act.apply(z);
    }
}

/// Runs one block from the zero state over every column of `u_seq` (K × n) and returns its
/// full `N × n` trajectory.
pub fn harvest_block(
    block: &SubReservoir,
    activation: Activation,
    u_seq: &Matrix,
) -> Result<Matrix> {
    if u_seq.rows() != block.input_dim() {
        return Err(Error::invalid(format!(
            "input has {} rows, block expects {}",
            u_seq.rows(),
            block.input_dim()
        )));
    }
    let (n_nodes, steps) = (block.size(), u_seq.cols());

    // input drive W_in·U + b for all steps at once
    let mut drive = block.w_in.matmul(u_seq)?;
    for i in 0..n_nodes {
        let b = block.bias[(i, 0)];
        drive.row_mut(i).iter_mut().for_each(|v| *v += b);
    }

    let recurrent: Vec<Vec<(usize, f64)>> = (0..n_nodes)
        .map(|i| {
            block
                .w_r
                .row(i)
                .iter()
                .enumerate()
                .filter(|(_, w)| **w != 0.0)
                .map(|(j, w)| (j, *w))
                .collect()
        })
        .collect();

    let mut states = Matrix::zeros(n_nodes, steps);
    let mut prev = vec![0.0; n_nodes];
    let mut next = vec![0.0; n_nodes];
    for t in 0..steps {
        for (i, slot) in next.iter_mut().enumerate() {
            let mut z = drive[(i, t)];
            for &(j, w) in &recurrent[i] {
                z += w * prev[j];
            }
            *slot = activation.apply(z);
        }
        for (i, &v) in next.iter().enumerate() {
            states[(i, t)] = v;
        }
        std::mem::swap(&mut prev, &mut next);
    }
    Ok(states)
}

/// Iterates the blocks from the zero state over `u_seq`, drops the first `washout` columns and
/// stacks the block states (then, if `include_input`, the input rows) into one matrix.
pub fn harvest_states(
    blocks: &[SubReservoir],
    activation: Activation,
    u_seq: &Matrix,
    washout: usize,
    include_input: bool,
) -> Result<StateMatrix> {
    let n = u_seq.cols();
    if washout >= n {
        return Err(Error::invalid(format!(
            "washout {washout} must be shorter than the sequence ({n})"
        )));
    }
    let mut parts = Vec::with_capacity(blocks.len() + 1);
    for block in blocks {
        parts.push(harvest_block(block, activation, u_seq)?.columns(washout, n));
    }
    if include_input {
        parts.push(u_seq.columns(washout, n));
    }
    let values = if parts.is_empty() {
        Matrix::zeros(0, n - washout)
    } else {
        Matrix::vstack(&parts.iter().collect::<Vec<_>>())?
    };
    Ok(StateMatrix {
        values,
        washout_dropped: washout,
    })
}
