//! Benchmark generators, CSV ingestion, feature construction and split handling.

mod csv_io;
mod debutanizer;
mod mackey_glass;
mod noise;
mod plant;

pub use csv_io::{load_csv, load_csv_auto, write_csv};
pub use debutanizer::{debutanizer_features, debutanizer_task, DebutanizerMode};
pub use mackey_glass::{
    build_mg_task, gen_mackey_glass, integrate_mackey_glass, MgConfig, MgVariant,
};
pub use noise::add_noise_validation;
pub use plant::{gen_plant, plant_response, plant_test_input};

use crate::error::{Error, Result};
use crate::numeric::Matrix;

/// An input/target sequence pair. Column `n` of `u` drives the model at step `n`, column `n`
/// of `t` is the desired output at that step.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    /// `K × n`
    pub u: Matrix,
    /// `L × n`
    pub t: Matrix,
    pub washout: usize,
    pub name: String,
}

impl Dataset {
    pub fn new(u: Matrix, t: Matrix, washout: usize, name: impl Into<String>) -> Result<Self> {
        if u.cols() != t.cols() {
            return Err(Error::invalid(format!(
                "inputs have {} steps, targets {}",
                u.cols(),
                t.cols()
            )));
        }
        if washout >= u.cols() {
            return Err(Error::invalid(format!(
                "washout {washout} must be shorter than the sequence ({})",
                u.cols()
            )));
        }
        Ok(Dataset {
            u,
            t,
            washout,
            name: name.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.u.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.u.cols() == 0
    }

    pub fn input_dim(&self) -> usize {
        self.u.rows()
    }

    pub fn output_dim(&self) -> usize {
        self.t.rows()
    }

    /// Targets with the washout columns removed.
    pub fn effective_targets(&self) -> Matrix {
        self.t.columns(self.washout, self.t.cols())
    }

    /// Inputs with the washout columns removed.
    pub fn effective_inputs(&self) -> Matrix {
        self.u.columns(self.washout, self.u.cols())
    }

    /// Steps `start..end` as a new dataset with the given washout.
    pub fn slice(&self, start: usize, end: usize, washout: usize, name: &str) -> Result<Dataset> {
        Dataset::new(
            self.u.columns(start, end),
            self.t.columns(start, end),
            washout,
            name,
        )
    }
}

/// Train/validation/test datasets of one task.
#[derive(Clone, Debug)]
pub struct TaskSplits {
    pub train: Dataset,
    pub val: Dataset,
    pub test: Dataset,
}
