use std::f64::consts::PI;

use crate::data::{Dataset, TaskSplits};
use crate::error::Result;
use crate::numeric::{Matrix, RngStream};

pub const PLANT_WASHOUT: usize = 100;
pub const PLANT_TRAIN: usize = 2000;
pub const PLANT_VAL: usize = 1000;
pub const PLANT_TEST: usize = 1000;

/// Output of the plant `y(n+1) = 0.72·y(n) + 0.025·y(n−1)·u(n−1) + 0.01·u(n−2)² + 0.2·u(n−3)`
/// for inputs `u(1..=N)`, starting from `y(1) = y(2) = y(3) = 0`, `y(4) = 0.1`.
///
/// Element `i` of the result is `y(i + 1)`; the result has `N + 1` entries.
pub fn plant_response(u: &[f64]) -> Vec<f64> {
    let n = u.len();
    let mut y = vec![0.0; (n + 1).max(4)];
    y[3] = 0.1;
    for i in 3..n {
        y[i + 1] =
            0.72 * y[i] + 0.025 * y[i - 1] * u[i - 1] + 0.01 * u[i - 2] * u[i - 2] + 0.2 * u[i - 3];
    }
    y.truncate(n + 1);
    y
}

/// The piecewise test excitation at (1-based) step `n`.
pub fn plant_test_input(n: usize) -> f64 {
    let x = n as f64;
    match n {
        0..250 => (PI * x / 25.0).sin(),
        250..500 => 1.0,
        500..750 => -1.0,
        _ => {
            0.6 * (PI * x / 10.0).cos() + 0.1 * (PI * x / 32.0).cos() + 0.3 * (PI * x / 25.0).sin()
        }
    }
}

/// Inputs `[y(n), u(n)]` and target `y(n+1)` for every step of `u`.
fn plant_dataset(u: &[f64], name: &str) -> Result<Dataset> {
    let y = plant_response(u);
    let steps = u.len();
    let mut inputs = Matrix::zeros(2, steps);
    let mut target = Matrix::zeros(1, steps);
    for i in 0..steps {
        inputs[(0, i)] = y[i];
        inputs[(1, i)] = u[i];
        target[(0, i)] = y[i + 1];
    }
    Dataset::new(inputs, target, PLANT_WASHOUT, name)
}

/// Uniform-input training and validation runs (independent draws) and the piecewise test run.
pub fn gen_plant(seed: u64) -> Result<TaskSplits> {
    let draw = |tag: u64, len: usize| {
        let mut rng = RngStream::derive(seed, &[0x504c, tag]);
        (0..len).map(|_| rng.uniform(-1.0, 1.0)).collect::<Vec<_>>()
    };
    let u_train = draw(0, PLANT_TRAIN);
    let u_val = draw(1, PLANT_VAL);
    let u_test: Vec<f64> = (1..=PLANT_TEST).map(plant_test_input).collect();
    Ok(TaskSplits {
        train: plant_dataset(&u_train, "plant-train")?,
        val: plant_dataset(&u_val, "plant-val")?,
        test: plant_dataset(&u_test, "plant-test")?,
    })
}
