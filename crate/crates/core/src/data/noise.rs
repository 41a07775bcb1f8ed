use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::numeric::{Matrix, RngStream};

fn population_std(row: &[f64]) -> f64 {
    let n = row.len() as f64;
    let mean = row.iter().sum::<f64>() / n;
    (row.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt()
}

fn perturb(m: &Matrix, sigma_rel: f64, rng: &mut RngStream) -> Matrix {
    let mut out = m.clone();
    for i in 0..m.rows() {
        let scale = sigma_rel * population_std(m.row(i));
        for v in out.row_mut(i) {
            *v += scale * rng.normal();
        }
    }
    out
}

/// Copy of `base` with zero-mean Gaussian noise on every input and target channel, each with
/// standard deviation `sigma_rel` times that channel's population standard deviation.
pub fn add_noise_validation(base: &Dataset, sigma_rel: f64, seed: u64) -> Result<Dataset> {
    if !(sigma_rel >= 0.0) || !sigma_rel.is_finite() {
        return Err(Error::invalid(format!(
            "sigma_rel must be non-negative, got {sigma_rel}"
        )));
    }
    let mut rng = RngStream::derive(seed, &[0x4e5a]);
    let u = perturb(&base.u, sigma_rel, &mut rng);
    let t = perturb(&base.t, sigma_rel, &mut rng);
    Dataset::new(u, t, base.washout, format!("{}-noisy", base.name))
}
