//! Dense matrices, seeded random streams and the linear-algebra kernels used by every
//! other module.

mod linalg;
mod matrix;
#[cfg(test)]
pub(crate) mod oracle;
mod rng;

pub use linalg::{
    cholesky, cholesky_solve, cholesky_substitute, least_squares_readout, least_squares_with_rank,
    max_singular_value, nrmse, spectral_radius, RANK_DEFICIENT_RIDGE,
};
pub use matrix::{dot, Matrix};
pub use rng::{seeded_uniform, RngStream};
