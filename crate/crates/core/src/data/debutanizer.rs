use std::str::FromStr;

use crate::data::{add_noise_validation, Dataset, TaskSplits};
use crate::error::{Error, Result};
use crate::numeric::Matrix;

pub const DEBUTANIZER_TRAIN: usize = 1500;
pub const DEBUTANIZER_WASHOUT: usize = 100;

/// Regressor set for the butane-concentration soft sensor.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DebutanizerMode {
    /// `u1(n)…u5(n), y(n−1)` (6 inputs).
    Reduced,
    /// `u1(n)…u5(n), u5(n−1..=n−3), (u1(n)+u2(n))/2, y(n−1..=n−4)` (13 inputs).
    Full,
}

impl DebutanizerMode {
    /// Deepest lag used, which is also the raw index of the first feature column.
    pub fn max_lag(self) -> usize {
        match self {
            DebutanizerMode::Reduced => 1,
            DebutanizerMode::Full => 4,
        }
    }
}

impl FromStr for DebutanizerMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reduced" => Ok(DebutanizerMode::Reduced),
            "full" => Ok(DebutanizerMode::Full),
            other => Err(Error::invalid(format!(
                "unknown debutanizer mode '{other}'"
            ))),
        }
    }
}

/// Builds lagged features from raw process data with inputs `u1…u7` and target `y`.
///
/// Column `c` of the result corresponds to raw sample `c + mode.max_lag()`. The result has
/// washout 0.
pub fn debutanizer_features(raw: &Dataset, mode: DebutanizerMode) -> Result<Dataset> {
    if raw.input_dim() != 7 || raw.output_dim() != 1 {
        return Err(Error::invalid(format!(
            "debutanizer data needs 7 inputs and 1 target, got {} and {}",
            raw.input_dim(),
            raw.output_dim()
        )));
    }
    let d = mode.max_lag();
    if raw.len() <= d {
        return Err(Error::invalid("too few samples for the requested lags"));
    }
    let (u, y) = (&raw.u, raw.t.row(0));
    let mut rows: Vec<Vec<f64>> = (0..5).map(|i| u.row(i)[d..].to_vec()).collect();
    match mode {
        DebutanizerMode::Reduced => rows.push(y[d - 1..raw.len() - 1].to_vec()),
        DebutanizerMode::Full => {
            for lag in 1..=3 {
                rows.push(u.row(4)[d - lag..raw.len() - lag].to_vec());
            }
            rows.push(
                u.row(0)[d..]
                    .iter()
                    .zip(&u.row(1)[d..])
                    .map(|(a, b)| 0.5 * (a + b))
                    .collect(),
            );
            for lag in 1..=4 {
                rows.push(y[d - lag..raw.len() - lag].to_vec());
            }
        }
    }
    let inputs = Matrix::from_rows(&rows)?;
    let target = Matrix::row_vector(&y[d..]);
    Dataset::new(inputs, target, 0, format!("{}-features", raw.name))
}

/// Train on raw samples before index 1500, test on the rest, and validate on a noisy copy of
/// the test split. Every split washes out 100 steps.
pub fn debutanizer_task(
    raw: &Dataset,
    mode: DebutanizerMode,
    sigma_rel: f64,
    seed: u64,
) -> Result<TaskSplits> {
    let features = debutanizer_features(raw, mode)?;
    let cut = DEBUTANIZER_TRAIN
        .checked_sub(mode.max_lag())
        .filter(|&c| c < features.len())
        .ok_or_else(|| Error::invalid("debutanizer data shorter than the training split"))?;
    let train = features.slice(0, cut, DEBUTANIZER_WASHOUT, "debutanizer-train")?;
    let test = features.slice(cut, features.len(), DEBUTANIZER_WASHOUT, "debutanizer-test")?;
    let val = add_noise_validation(&test, sigma_rel, seed)?;
    Ok(TaskSplits { train, val, test })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{seeded_uniform, RngStream};

    fn raw(n: usize) -> Dataset {
        let mut rng = RngStream::new(3);
        Dataset::new(
            seeded_uniform(&mut rng, 7, n, 1.0).unwrap(),
            seeded_uniform(&mut rng, 1, n, 1.0).unwrap(),
            0,
            "raw",
        )
        .unwrap()
    }

    #[test]
    fn reduced_features() {
        let r = raw(2394);
        let f = debutanizer_features(&r, DebutanizerMode::Reduced).unwrap();
        assert_eq!(f.input_dim(), 6);
        for c in 0..f.len() {
            assert_eq!(f.u[(5, c)], r.t[(0, c)]);
            assert_eq!(f.t[(0, c)], r.t[(0, c + 1)]);
            assert_eq!(f.u[(2, c)], r.u[(2, c + 1)]);
        }
        let task = debutanizer_task(&r, DebutanizerMode::Reduced, 0.05, 1).unwrap();
        assert_eq!(task.test.len(), 894);
        assert_eq!(task.train.washout, 100);
        assert_eq!(task.val.len(), 894);
    }

    #[test]
    fn full_features_and_lags() {
        let r = raw(2394);
        let f = debutanizer_features(&r, DebutanizerMode::Full).unwrap();
        assert_eq!(f.input_dim(), 13);
        let y = r.t.row(0);
        for c in 0..f.len() {
            let n = c + 4;
            for lag in 1..=4 {
                assert_eq!(f.u[(8 + lag, c)], y[n - lag]);
            }
            for lag in 1..=3 {
                assert_eq!(f.u[(4 + lag, c)], r.u[(4, n - lag)]);
            }
            assert_eq!(f.u[(8, c)], 0.5 * (r.u[(0, n)] + r.u[(1, n)]));
        }
        assert_eq!(
            debutanizer_task(&r, DebutanizerMode::Full, 0.05, 1)
                .unwrap()
                .test
                .len(),
            894
        );
    }

    #[test]
    fn wrong_columns_rejected() {
        let mut rng = RngStream::new(1);
        let bad = Dataset::new(
            seeded_uniform(&mut rng, 5, 30, 1.0).unwrap(),
            seeded_uniform(&mut rng, 1, 30, 1.0).unwrap(),
            0,
            "bad",
        )
        .unwrap();
        assert!(debutanizer_features(&bad, DebutanizerMode::Reduced).is_err());
    }
}
