//! Block-incremental reservoir computing with supervised construction.

// `!(x > 0.0)` is used deliberately so that NaN is rejected along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod builder;
pub mod cli;
pub mod data;
pub mod error;
pub mod numeric;
pub mod online;
pub mod reservoir;

pub use error::{Error, Result};
