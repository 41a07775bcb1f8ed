use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{max_singular_value, nrmse, Matrix};
use crate::reservoir::{harvest_states, StateMatrix, SubReservoir, EIGEN_TOL};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    #[default]
    Tanh,
    Logistic,
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Logistic => 1.0 / (1.0 + (-z).exp()),
        }
    }
}

/// A trained reservoir model: decoupled blocks plus a linear readout.
///
/// The readout acts on the block states stacked in order, followed by the input rows when
/// `readout_includes_input` is set, so `w_out` is `L × (Σ N_j + [K])`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockModel {
    pub blocks: Vec<SubReservoir>,
    pub w_out: Matrix,
    pub readout_includes_input: bool,
    pub activation: Activation,
    pub washout: usize,
    #[serde(rename = "K")]
    pub input_dim: usize,
    #[serde(rename = "L")]
    pub output_dim: usize,
}

impl BlockModel {
    /// A model with a zero readout of the right shape.
    pub fn new(
        blocks: Vec<SubReservoir>,
        activation: Activation,
        readout_includes_input: bool,
        washout: usize,
        input_dim: usize,
        output_dim: usize,
    ) -> Self {
        let mut model = BlockModel {
            blocks,
            w_out: Matrix::zeros(output_dim, 0),
            readout_includes_input,
            activation,
            washout,
            input_dim,
            output_dim,
        };
        model.w_out = Matrix::zeros(output_dim, model.readout_dim());
        model
    }

    pub fn reservoir_size(&self) -> usize {
        self.blocks.iter().map(SubReservoir::size).sum()
    }

    /// `D`, the number of readout regressors.
    pub fn readout_dim(&self) -> usize {
        self.reservoir_size()
            + if self.readout_includes_input {
                self.input_dim
            } else {
                0
            }
    }

    /// The block-diagonal recurrent matrix of the whole reservoir.
    pub fn assembled_recurrent(&self) -> Matrix {
        Matrix::block_diagonal(&self.blocks.iter().map(|b| &b.w_r).collect::<Vec<_>>())
    }

    /// Largest per-block singular value, which equals that of the assembled matrix.
    pub fn max_block_singular_value(&self) -> Result<f64> {
        self.blocks
            .iter()
            .map(|b| max_singular_value(&b.w_r, EIGEN_TOL))
            .try_fold(0.0_f64, |acc, s| Ok(acc.max(s?)))
    }

    pub fn validate(&self) -> Result<()> {
        for (j, b) in self.blocks.iter().enumerate() {
            b.validate()?;
            if b.input_dim() != self.input_dim {
                return Err(Error::invalid(format!(
                    "block {j} expects {} inputs, model has K = {}",
                    b.input_dim(),
                    self.input_dim
                )));
            }
        }
        if self.w_out.shape() != (self.output_dim, self.readout_dim()) {
            return Err(Error::invalid(format!(
                "w_out is {:?}, expected {:?}",
                self.w_out.shape(),
                (self.output_dim, self.readout_dim())
            )));
        }
        Ok(())
    }

    /// Readout regressors for an input sequence (K × n) after dropping `washout` columns.
    pub fn states(&self, u_seq: &Matrix, washout: usize) -> Result<StateMatrix> {
        harvest_states(
            &self.blocks,
            self.activation,
            u_seq,
            washout,
            self.readout_includes_input,
        )
    }

    /// Model outputs (L × (n − washout)).
    pub fn predict(&self, u_seq: &Matrix, washout: usize) -> Result<Matrix> {
        let states = self.states(u_seq, washout)?;
        self.w_out.matmul(&states.values)
    }

    /// NRMSE on `u_seq`/`t_seq`, both evaluated after `washout`.
    pub fn evaluate(&self, u_seq: &Matrix, t_seq: &Matrix, washout: usize) -> Result<f64> {
        if t_seq.cols() != u_seq.cols() || t_seq.rows() != self.output_dim {
            return Err(Error::invalid("target shape does not match input/model"));
        }
        let y = self.predict(u_seq, washout)?;
        nrmse(&y, &t_seq.columns(washout, t_seq.cols()))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: BlockModel = serde_json::from_str(text)?;
        model.validate()?;
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        BlockModel::from_json(&text).map_err(|e| match e {
            Error::Json(err) => Error::Format {
                path: path.to_path_buf(),
                message: err.to_string(),
            },
            other => other,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{seeded_uniform, RngStream};
    use crate::reservoir::{sample_subreservoir, scale_for_esp};

    fn model(seed: u64) -> BlockModel {
        let mut rng = RngStream::new(seed);
        let blocks = (0..3)
            .map(|_| {
                scale_for_esp(sample_subreservoir(&mut rng, 4, 2, 0.5, 0.2).unwrap(), 0.8).unwrap()
            })
            .collect();
        let mut m = BlockModel::new(blocks, Activation::Tanh, true, 5, 2, 1);
        m.w_out = seeded_uniform(&mut rng, 1, 14, 1.0).unwrap();
        m
    }

    #[test]
    fn json_round_trip_is_value_exact() {
        let m = model(3);
        let text = m.to_json().unwrap();
        for key in [
            "\"blocks\"",
            "\"w_in\"",
            "\"w_r\"",
            "\"bias\"",
            "\"lambda_used\"",
            "\"alpha_effective\"",
            "\"w_out\"",
            "\"readout_includes_input\"",
            "\"activation\": \"tanh\"",
            "\"washout\"",
            "\"K\"",
            "\"L\"",
        ] {
            assert!(text.contains(key), "missing {key}");
        }
        let back = BlockModel::from_json(&text).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn readout_layout_dimensions() {
        let m = model(4);
        assert_eq!(m.reservoir_size(), 12);
        assert_eq!(m.readout_dim(), 14);
        let mut no_input = m.clone();
        no_input.readout_includes_input = false;
        assert_eq!(no_input.readout_dim(), 12);
        assert!(no_input.validate().is_err());
    }

    #[test]
    fn assembled_sigma_equals_block_max() {
        let m = model(5);
        let whole = max_singular_value(&m.assembled_recurrent(), 1e-12).unwrap();
        assert!((whole - m.max_block_singular_value().unwrap()).abs() < 1e-12);
        assert!(whole < 1.0);
    }

    #[test]
    fn load_rejects_inconsistent_shapes() {
        let mut m = model(6);
        m.w_out = Matrix::zeros(1, 3);
        let text = serde_json::to_string(&m).unwrap();
        assert!(BlockModel::from_json(&text).is_err());
    }
}
