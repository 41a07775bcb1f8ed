//! Subreservoir sampling, echo-state scaling, block-diagonal dynamics and state harvesting.

mod model;
mod state;
mod sub;

pub use model::{Activation, BlockModel};
pub use state::{harvest_block, harvest_states, step_block, StateMatrix};
pub use sub::{sample_subreservoir, scale_for_esp, SubReservoir};

/// Tolerance handed to the eigenvalue kernels during scaling.
pub(crate) const EIGEN_TOL: f64 = 1e-12;
