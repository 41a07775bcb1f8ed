//! Constructive learners: block-incremental, point-incremental and the fixed-size baseline.

mod brscn;
mod config;
mod esn;
mod log;
mod rscn;
mod score;

pub use brscn::{
    configure_block, early_stop, refit_readout, train_brscn, train_brscn_with, Configured,
    ConfiguredBlock, Readout,
};
pub use config::TrainConfig;
pub use esn::{train_esn, train_esn_with};
pub use log::{ConvergenceEntry, ConvergenceLog, Termination, CONVERGENCE_HEADER};
pub use rscn::{train_rscn, train_rscn_with};
pub use score::{block_weights, xi_scores, xi_single_node, CandidateScore};
