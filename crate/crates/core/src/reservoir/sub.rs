use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{max_singular_value, seeded_uniform, spectral_radius, Matrix, RngStream};
use crate::reservoir::EIGEN_TOL;

/// One randomly generated block of reservoir nodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubReservoir {
    /// `N_sub × K`
    pub w_in: Matrix,
    /// `N_sub × N_sub`
    pub w_r: Matrix,
    /// `N_sub × 1`
    pub bias: Matrix,
    pub lambda_used: f64,
    pub alpha_effective: f64,
    #[serde(skip, default = "scaled_on_load")]
    pub scaled: bool,
}

fn scaled_on_load() -> bool {
    true
}

impl SubReservoir {
    pub fn size(&self) -> usize {
        self.w_r.rows()
    }

    pub fn input_dim(&self) -> usize {
        self.w_in.cols()
    }

    pub(crate) fn validate(&self) -> Result<()> {
        let n = self.w_r.rows();
        if !self.w_r.is_square() || self.w_in.rows() != n || self.bias.shape() != (n, 1) {
            return Err(Error::invalid(format!(
                "inconsistent subreservoir shapes: w_in {:?}, w_r {:?}, bias {:?}",
                self.w_in.shape(),
                self.w_r.shape(),
                self.bias.shape()
            )));
        }
        Ok(())
    }
}

/// Draws an unscaled block: dense `w_in` and `bias`, and a `w_r` whose nonzero mask holds
/// `max(1, round(density·n_sub²))` uniformly placed entries. All values lie in `[-λ, λ]`.
pub fn sample_subreservoir(
    rng: &mut RngStream,
    n_sub: usize,
    k: usize,
    lambda: f64,
    density: f64,
) -> Result<SubReservoir> {
    if n_sub == 0 || k == 0 {
        return Err(Error::invalid("subreservoir needs n_sub >= 1 and k >= 1"));
    }
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::invalid(format!(
            "density must lie in (0, 1], got {density}"
        )));
    }
    let w_in = seeded_uniform(rng, n_sub, k, lambda)?;

    let cells = n_sub * n_sub;
    let nonzero = ((density * cells as f64).round() as usize).clamp(1, cells);
    let mut w_r = Matrix::zeros(n_sub, n_sub);
    for idx in rng.sample_indices(cells, nonzero) {
        w_r.as_mut_slice()[idx] = rng.uniform(-lambda, lambda);
    }

    let bias = seeded_uniform(rng, n_sub, 1, lambda)?;
    Ok(SubReservoir {
        w_in,
        w_r,
        bias,
        lambda_used: lambda,
        alpha_effective: f64::NAN,
        scaled: false,
    })
}

/// Rescales `w_r` so its largest singular value drops below one.
///
/// With `ρ` the spectral radius and `σ` the largest singular value: if `ρ > 1e-12`,
/// `w_r ← (α_eff/ρ)·w_r` with `α_eff = min(alpha, 0.99·ρ/σ)`; otherwise (nilpotent `w_r`)
/// `w_r ← (0.99·alpha/σ)·w_r` and `α_eff = 0.99·alpha`. A zero `w_r` is left untouched.
pub fn scale_for_esp(sub: SubReservoir, alpha: f64) -> Result<SubReservoir> {
    if sub.scaled {
        return Err(Error::invalid("subreservoir is already scaled"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    let mut sub = sub;
    let sigma = max_singular_value(&sub.w_r, EIGEN_TOL)?;
    if sigma == 0.0 {
        sub.alpha_effective = alpha;
        sub.scaled = true;
        return Ok(sub);
    }
    let rho = spectral_radius(&sub.w_r, EIGEN_TOL)?;
    let (factor, alpha_eff) = if rho > 1e-12 {
        let alpha_eff = alpha.min(0.99 * rho / sigma);
        (alpha_eff / rho, alpha_eff)
    } else {
        (0.99 * alpha / sigma, 0.99 * alpha)
    };
    sub.w_r = sub.w_r.scale(factor);
    sub.alpha_effective = alpha_eff;
    sub.scaled = true;
    Ok(sub)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unscaled(w_r: Matrix) -> SubReservoir {
        let n = w_r.rows();
        SubReservoir {
            w_in: Matrix::zeros(n, 1),
            w_r,
            bias: Matrix::zeros(n, 1),
            lambda_used: 1.0,
            alpha_effective: f64::NAN,
            scaled: false,
        }
    }

    #[test]
    fn mask_count_follows_density() {
        let mut rng = RngStream::new(8);
        let sub = sample_subreservoir(&mut rng, 10, 3, 1.0, 0.02).unwrap();
        assert_eq!(sub.w_r.count_nonzero(), 2);
        // the floor of one nonzero entry
        let tiny = sample_subreservoir(&mut rng, 3, 1, 1.0, 0.001).unwrap();
        assert_eq!(tiny.w_r.count_nonzero(), 1);
        assert!(!sub.scaled);
    }

    #[test]
    fn entries_within_lambda() {
        let mut rng = RngStream::new(9);
        let sub = sample_subreservoir(&mut rng, 12, 4, 0.5, 0.3).unwrap();
        for m in [&sub.w_in, &sub.w_r, &sub.bias] {
            assert!(m.as_slice().iter().all(|v| v.abs() <= 0.5));
        }
        assert_eq!(sub.w_in.count_nonzero(), 48);
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = sample_subreservoir(&mut RngStream::derive(1, &[2, 3]), 10, 2, 5.0, 0.03).unwrap();
        let b = sample_subreservoir(&mut RngStream::derive(1, &[2, 3]), 10, 2, 5.0, 0.03).unwrap();
        assert_eq!((&a.w_in, &a.w_r, &a.bias), (&b.w_in, &b.w_r, &b.bias));
        assert!(a.alpha_effective.is_nan() && !a.scaled);
    }

    #[test]
    fn rejects_bad_density_and_sizes() {
        let mut rng = RngStream::new(0);
        assert!(sample_subreservoir(&mut rng, 10, 1, 1.0, 0.0).is_err());
        assert!(sample_subreservoir(&mut rng, 10, 1, 1.0, 1.5).is_err());
        assert!(sample_subreservoir(&mut rng, 0, 1, 1.0, 0.5).is_err());
        assert!(sample_subreservoir(&mut rng, 2, 0, 1.0, 0.5).is_err());
    }

    #[test]
    fn scale_diagonal_example() {
        let s = scale_for_esp(unscaled(Matrix::from_diagonal(&[0.5, 2.0])), 0.8).unwrap();
        assert!((s.w_r[(0, 0)] - 0.2).abs() < 1e-15);
        assert!((s.w_r[(1, 1)] - 0.8).abs() < 1e-15);
        assert!((max_singular_value(&s.w_r, 1e-12).unwrap() - 0.8).abs() < 1e-14);
        assert_eq!(s.alpha_effective, 0.8);
        assert!(s.scaled);
    }

    #[test]
    fn scale_identity_example() {
        let s = scale_for_esp(unscaled(Matrix::identity(3)), 0.5).unwrap();
        assert_eq!(s.w_r, Matrix::identity(3).scale(0.5));
    }

    #[test]
    fn scale_nilpotent_uses_sigma_fallback() {
        let w = Matrix::from_rows(&[vec![0.0, 2.0], vec![0.0, 0.0]]).unwrap();
        let s = scale_for_esp(unscaled(w), 0.8).unwrap();
        assert!((s.w_r[(0, 1)] - 0.99 * 0.8).abs() < 1e-15);
        assert_eq!(s.w_r.count_nonzero(), 1);
        assert!((s.alpha_effective - 0.792).abs() < 1e-15);
    }

    #[test]
    fn scale_clamps_alpha_when_sigma_exceeds_rho() {
        // ρ = 1, σ ≈ 10.05: α = 0.8 would violate α < ρ/σ
        let w = Matrix::from_rows(&[vec![1.0, 10.0], vec![0.0, 0.0]]).unwrap();
        let s = scale_for_esp(unscaled(w), 0.8).unwrap();
        assert!(s.alpha_effective < 0.8);
        assert!(max_singular_value(&s.w_r, 1e-12).unwrap() < 1.0);
    }

    #[test]
    fn zero_matrix_is_marked_scaled_only() {
        let s = scale_for_esp(unscaled(Matrix::zeros(3, 3)), 0.8).unwrap();
        assert!(s.scaled);
        assert_eq!(s.w_r, Matrix::zeros(3, 3));
        assert!(scale_for_esp(s, 0.8).is_err());
    }
}
