use nalgebra::linalg::SymmetricEigen;
use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::numeric::matrix::dot;
use crate::numeric::Matrix;

/// Matrices above this order try power iteration before the dense route.
const DENSE_EIGEN_LIMIT: usize = 64;
const GELFAND_SQUARINGS: usize = 64;
const QR_MAX_ITER: usize = 10_000;
const JACOBI_MAX_SWEEPS: usize = 80;

/// Largest eigenvalue magnitude of a square matrix.
///
/// A short power-iteration probe detects exactly nilpotent inputs, which any dense route only
/// resolves to about `eps^(1/k)` for a Jordan chain of length `k`. Matrices larger than 64 try
/// power iteration with an eigen-residual test first. Otherwise each strongly connected
/// component of the sparsity graph is solved densely by repeated squaring.
pub fn spectral_radius(m: &Matrix, tol: f64) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::invalid(format!(
            "spectral radius of non-square {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    if n == 0 || m.max_abs() == 0.0 {
        return Ok(0.0);
    }
    if is_nilpotent(m) {
        return Ok(0.0);
    }

    if n > DENSE_EIGEN_LIMIT {
        if let Some(rho) = power_iteration(m, tol, 2000) {
            return Ok(rho);
        }
    }

    // The spectrum is the union of the spectra of the diagonal blocks belonging to strongly
    // connected components of the sparsity graph, so each component is solved on its own.
    let mut rho = 0.0_f64;
    for comp in strongly_connected_components(m) {
        if comp.len() == 1 {
            rho = rho.max(m[(comp[0], comp[0])].abs());
            continue;
        }
        let sub = DMatrix::from_fn(comp.len(), comp.len(), |i, j| m[(comp[i], comp[j])]);
        rho = rho.max(dense_spectral_radius(sub));
    }
    Ok(rho)
}

/// Gelfand's formula `ρ = lim ‖Aᵏ‖^(1/k)` evaluated at `k = 2⁶⁴` by repeated squaring.
///
/// Each square is renormalized and its log-norm accumulated with weight `2⁻ⁱ`, so neither
/// overflow nor the slow `k^(p/k)` bias of Jordan blocks is an issue, and complex or
/// equal-magnitude dominant eigenvalues need no special handling.
fn dense_spectral_radius(a: DMatrix<f64>) -> f64 {
    let norm = a.norm();
    if norm == 0.0 {
        return 0.0;
    }
    let mut b = a / norm;
    let mut log_rho = norm.ln();
    let mut weight = 0.5;
    for _ in 0..GELFAND_SQUARINGS {
        let sq = &b * &b;
        let s = sq.norm();
        if s == 0.0 {
            return 0.0;
        }
        log_rho += weight * s.ln();
        weight *= 0.5;
        b = sq / s;
    }
    log_rho.exp()
}

/// Tarjan's algorithm on the graph with an edge `i → j` whenever `m[i][j] ≠ 0`.
fn strongly_connected_components(m: &Matrix) -> Vec<Vec<usize>> {
    struct Tarjan<'a> {
        m: &'a Matrix,
        index: Vec<Option<usize>>,
        low: Vec<usize>,
        on_stack: Vec<bool>,
        stack: Vec<usize>,
        next: usize,
        out: Vec<Vec<usize>>,
    }
    impl Tarjan<'_> {
        fn visit(&mut self, v: usize) {
            self.index[v] = Some(self.next);
            self.low[v] = self.next;
            self.next += 1;
            self.stack.push(v);
            self.on_stack[v] = true;
            for w in 0..self.m.cols() {
                if self.m[(v, w)] == 0.0 {
                    continue;
                }
                match self.index[w] {
                    None => {
                        self.visit(w);
                        self.low[v] = self.low[v].min(self.low[w]);
                    }
                    Some(iw) if self.on_stack[w] => self.low[v] = self.low[v].min(iw),
                    _ => {}
                }
            }
            if Some(self.low[v]) == self.index[v] {
                let mut comp = Vec::new();
                while let Some(w) = self.stack.pop() {
                    self.on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comp.sort_unstable();
                self.out.push(comp);
            }
        }
    }
    let n = m.rows();
    let mut t = Tarjan {
        m,
        index: vec![None; n],
        low: vec![0; n],
        on_stack: vec![false; n],
        stack: Vec::new(),
        next: 0,
        out: Vec::new(),
    };
    for v in 0..n {
        if t.index[v].is_none() {
            t.visit(v);
        }
    }
    t.out
}

/// Largest singular value, i.e. `sqrt(λ_max(m·mᵀ))`.
pub fn max_singular_value(m: &Matrix, _tol: f64) -> Result<f64> {
    if m.rows() == 0 || m.cols() == 0 || m.max_abs() == 0.0 {
        return Ok(0.0);
    }
    // eigenvalues of the smaller Gram matrix
    let gram = if m.rows() <= m.cols() {
        m.gram()
    } else {
        m.transpose().gram()
    };
    match SymmetricEigen::try_new(gram.to_nalgebra(), f64::EPSILON, QR_MAX_ITER) {
        Some(eig) => Ok(eig.eigenvalues.max().max(0.0).sqrt()),
        None => Err(Error::NumericFailure {
            message: "symmetric eigen iteration did not converge".into(),
            best_estimate: gram.as_slice().iter().map(|v| v.abs()).sum::<f64>().sqrt(),
        }),
    }
}

/// Ridge applied by [`least_squares_readout`] when a plain solve finds `x` rank deficient.
pub const RANK_DEFICIENT_RIDGE: f64 = 1e-8;

/// `W` (L×D) minimizing `‖t − W·x‖_F`, or `‖t − W·x‖²_F + ridge·‖W‖²_F` when `ridge > 0`.
///
/// With `ridge = 0` and a rank-deficient `x` the solve is repeated with
/// [`RANK_DEFICIENT_RIDGE`]. Use [`least_squares_with_rank`] for the unmodified
/// minimum-norm solution.
pub fn least_squares_readout(x: &Matrix, t: &Matrix, ridge: f64) -> Result<Matrix> {
    let (w, rank) = least_squares_with_rank(x, t, ridge)?;
    if ridge == 0.0 && rank < x.rows() {
        return Ok(least_squares_with_rank(x, t, RANK_DEFICIENT_RIDGE)?.0);
    }
    Ok(w)
}

/// Least squares with an explicit ridge, also returning the numerical rank of `x`.
///
/// Solved through a Householder QR of `xᵀ` followed by a one-sided Jacobi SVD of the triangular
/// factor; singular values below `max(n, D)·eps·σ_max` are treated as zero, which yields the
/// minimum-norm minimizer for rank-deficient `x` when `ridge = 0`.
pub fn least_squares_with_rank(x: &Matrix, t: &Matrix, ridge: f64) -> Result<(Matrix, usize)> {
    if x.cols() != t.cols() {
        return Err(Error::invalid(format!(
            "design has {} columns but target has {}",
            x.cols(),
            t.cols()
        )));
    }
    if x.cols() == 0 {
        return Err(Error::invalid("least squares needs at least one sample"));
    }
    if !(ridge >= 0.0) {
        return Err(Error::invalid(format!(
            "ridge must be non-negative, got {ridge}"
        )));
    }
    let (d, n, l) = (x.rows(), x.cols(), t.rows());
    if d == 0 {
        return Ok((Matrix::zeros(l, 0), 0));
    }
    let a: DMatrix<f64> = x.transpose().to_nalgebra(); // n × D
    let b: DMatrix<f64> = t.transpose().to_nalgebra(); // n × L

    // Reduce to a D × D triangle first when there are more samples than regressors.
    let (core, rhs) = if n > d {
        let qr = a.qr();
        (qr.r(), qr.q().transpose() * &b)
    } else {
        (a, b)
    };
    let (u, s, v) = jacobi_svd(core)?;
    let s_max = s.iter().cloned().fold(0.0_f64, f64::max);
    let cutoff = n.max(d) as f64 * f64::EPSILON * s_max;

    let mut scaled = u.transpose() * rhs; // D × L
    let mut rank = 0;
    for (i, &si) in s.iter().enumerate() {
        let factor = if si > cutoff {
            rank += 1;
            if ridge > 0.0 {
                si / (si * si + ridge)
            } else {
                1.0 / si
            }
        } else {
            0.0
        };
        for c in 0..l {
            scaled[(i, c)] *= factor;
        }
    }
    let w_t = v * scaled; // D × L
    Ok((Matrix::from_nalgebra(&w_t.transpose()), rank))
}

/// One-sided (Hestenes) Jacobi SVD of an `m × k` matrix: returns `U` (m × k, columns of unit
/// norm or zero), the singular values and `V` (k × k orthogonal) with `a = U·diag(s)·Vᵀ`.
fn jacobi_svd(mut a: DMatrix<f64>) -> Result<(DMatrix<f64>, Vec<f64>, DMatrix<f64>)> {
    let k = a.ncols();
    let mut v = DMatrix::<f64>::identity(k, k);
    let tol = (a.nrows().max(1) as f64).sqrt() * f64::EPSILON;
    // columns this small are rounding noise and carry no rank
    let negligible = (f64::EPSILON * a.norm()).powi(2);
    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..k {
            for q in p + 1..k {
                let (alpha, beta, gamma) = {
                    let (cp, cq) = (a.column(p), a.column(q));
                    (cp.norm_squared(), cq.norm_squared(), cp.dot(&cq))
                };
                if alpha <= negligible
                    || beta <= negligible
                    || gamma.abs() <= tol * (alpha * beta).sqrt()
                {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_columns(&mut a, p, q, c, s);
                rotate_columns(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NumericFailure {
            message: "Jacobi SVD did not converge".into(),
            best_estimate: f64::NAN,
        });
    }
    let mut sing = Vec::with_capacity(k);
    for j in 0..k {
        let norm = a.column(j).norm();
        sing.push(norm);
        if norm > 0.0 {
            a.column_mut(j).unscale_mut(norm);
        }
    }
    Ok((a, sing, v))
}

fn rotate_columns(m: &mut DMatrix<f64>, p: usize, q: usize, c: f64, s: f64) {
    for i in 0..m.nrows() {
        let (x, y) = (m[(i, p)], m[(i, q)]);
        m[(i, p)] = c * x - s * y;
        m[(i, q)] = s * x + c * y;
    }
}

/// Normalized root-mean-square error with the population variance of `t` pooled over all
/// of its entries.
pub fn nrmse(y: &Matrix, t: &Matrix) -> Result<f64> {
    if y.shape() != t.shape() {
        return Err(Error::invalid(format!(
            "prediction {:?} and target {:?} differ in shape",
            y.shape(),
            t.shape()
        )));
    }
    let count = t.as_slice().len();
    if count == 0 {
        return Err(Error::DegenerateTarget);
    }
    let mean = t.as_slice().iter().sum::<f64>() / count as f64;
    let var = t.as_slice().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / count as f64;
    let floor = (1e-13 * t.max_abs()).powi(2);
    if var <= floor || var == 0.0 {
        return Err(Error::DegenerateTarget);
    }
    let sse: f64 = y
        .as_slice()
        .iter()
        .zip(t.as_slice())
        .map(|(a, b)| (a - b).powi(2))
        .sum();
    Ok((sse / (t.cols() as f64 * var)).sqrt())
}

/// Solves `g·z = b` for symmetric positive definite `g` by Cholesky; `None` if `g` is not
/// numerically positive definite.
pub fn cholesky_solve(g: &Matrix, b: &[f64]) -> Option<Vec<f64>> {
    let l = cholesky(g)?;
    Some(cholesky_substitute(&l, b))
}

/// Lower Cholesky factor of `g`, or `None` when a pivot is not positive.
pub fn cholesky(g: &Matrix) -> Option<Matrix> {
    let n = g.rows();
    let mut l = Matrix::zeros(n, n);
    let scale = (0..n).map(|i| g[(i, i)].abs()).fold(0.0, f64::max);
    for j in 0..n {
        let mut d = g[(j, j)] - dot(&l.row(j)[..j], &l.row(j)[..j]);
        if !(d > 1e-14 * scale) {
            return None;
        }
        d = d.sqrt();
        l[(j, j)] = d;
        for i in j + 1..n {
            let s = g[(i, j)] - dot(&l.row(i)[..j], &l.row(j)[..j]);
            l[(i, j)] = s / d;
        }
    }
    Some(l)
}

/// Solves `L·Lᵀ·z = b` given the lower Cholesky factor `L`.
pub fn cholesky_substitute(l: &Matrix, b: &[f64]) -> Vec<f64> {
    let n = l.rows();
    let mut y = vec![0.0; n];
    for i in 0..n {
        y[i] = (b[i] - dot(&l.row(i)[..i], &y[..i])) / l[(i, i)];
    }
    let mut z = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l[(k, i)] * z[k];
        }
        z[i] = s / l[(i, i)];
    }
    z
}

fn start_vector(n: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.5 * ((i as f64 + 1.0) * 0.618_033_988_749_895).fract())
        .collect();
    let norm = dot(&v, &v).sqrt();
    v.into_iter().map(|x| x / norm).collect()
}

// Real dominant eigenvalue via power iteration; accepted only once the eigen-residual
// ‖A·v − θ·v‖ is below tol·|θ|.
fn power_iteration(m: &Matrix, tol: f64, max_iter: usize) -> Option<f64> {
    let mut v = start_vector(m.rows());
    for _ in 0..max_iter {
        let w = m.mul_vec(&v);
        let norm = dot(&w, &w).sqrt();
        if norm == 0.0 {
            return None;
        }
        let theta = dot(&v, &w);
        let residual = w
            .iter()
            .zip(&v)
            .map(|(wi, vi)| (wi - theta * vi).powi(2))
            .sum::<f64>()
            .sqrt();
        if theta != 0.0 && residual <= tol * theta.abs() {
            return Some(theta.abs());
        }
        v = w.into_iter().map(|x| x / norm).collect();
    }
    None
}

// A^n == 0 exactly, probed with successive products of the identity columns' images.
fn is_nilpotent(m: &Matrix) -> bool {
    let n = m.rows();
    // Cheap necessary condition: trace of a nilpotent matrix is zero.
    let trace: f64 = (0..n).map(|i| m[(i, i)]).sum();
    if trace != 0.0 {
        return false;
    }
    let mut v = start_vector(n);
    for _ in 0..n {
        v = m.mul_vec(&v);
        if v.iter().all(|x| *x == 0.0) {
            break;
        }
    }
    if v.iter().any(|x| *x != 0.0) {
        return false;
    }
    // The probe vector may lie in a proper invariant subspace; confirm on the full power.
    let mut p = m.clone();
    for _ in 1..n {
        if p.max_abs() == 0.0 {
            return true;
        }
        p = p.matmul(m).expect("square");
    }
    p.max_abs() == 0.0
}
