use std::fmt;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::reservoir::SubReservoir;

/// Why a constructive run stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    /// Training residual fell to `epsilon`.
    Epsilon,
    /// The block (or node) budget was reached.
    JMax,
    /// Validation error stopped improving; the model was rolled back.
    EarlyStop,
    /// No candidate passed the acceptance test after every `r` anneal.
    Stalled,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Termination::Epsilon => "epsilon",
            Termination::JMax => "j_max",
            Termination::EarlyStop => "early_stop",
            Termination::Stalled => "construction_stalled",
        })
    }
}

/// One accepted block (or node, for the point-incremental learner).
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceEntry {
    pub block_index: usize,
    pub total_nodes: usize,
    pub train_nrmse: f64,
    pub val_nrmse: f64,
    /// `NaN` for the unconditionally accepted first block.
    pub xi_total: f64,
    pub lambda_used: f64,
    pub r_used: f64,
    pub mu: f64,
    pub xi_per_output: Vec<f64>,
    /// `‖e‖²_F` before and after the addition and global refit.
    pub residual_sq_before: f64,
    pub residual_sq_after: f64,
    pub val_error: f64,
}

/// Per-addition history of a constructive run.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceLog {
    pub entries: Vec<ConvergenceEntry>,
    pub termination: Termination,
    /// Blocks (or nodes) kept in the returned model after any rollback.
    pub retained: usize,
    /// Every accepted block in order, including ones later removed by rollback. The
    /// point-incremental learner records a single reservoir holding every accepted node, scaled
    /// as it was just before any rollback.
    pub accepted_blocks: Vec<SubReservoir>,
}

pub const CONVERGENCE_HEADER: &str =
    "block_index,total_nodes,train_nrmse,val_nrmse,xi_total,lambda_used,r_used";

impl ConvergenceLog {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CONVERGENCE_HEADER);
        out.push('\n');
        for e in &self.entries {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                e.block_index,
                e.total_nodes,
                e.train_nrmse,
                e.val_nrmse,
                e.xi_total,
                e.lambda_used,
                e.r_used
            ));
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    /// Training NRMSE of the retained model.
    pub fn final_train_nrmse(&self) -> Option<f64> {
        self.retained
            .checked_sub(1)
            .and_then(|i| self.entries.get(i))
            .map(|e| e.train_nrmse)
    }

    /// Nodes in the first logged model whose training NRMSE is at most `target`.
    pub fn nodes_to_reach(&self, target: f64) -> Option<usize> {
        self.entries
            .iter()
            .find(|e| e.train_nrmse <= target)
            .map(|e| e.total_nodes)
    }
}
