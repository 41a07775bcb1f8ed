//! Slow, independent reference implementations used only by tests.

use crate::numeric::Matrix;

#[derive(Clone, Copy, Debug)]
struct C(f64, f64);

impl C {
    fn add(self, o: C) -> C {
        C(self.0 + o.0, self.1 + o.1)
    }
    fn sub(self, o: C) -> C {
        C(self.0 - o.0, self.1 - o.1)
    }
    fn mul(self, o: C) -> C {
        C(self.0 * o.0 - self.1 * o.1, self.0 * o.1 + self.1 * o.0)
    }
    fn div(self, o: C) -> C {
        let d = o.0 * o.0 + o.1 * o.1;
        C(
            (self.0 * o.0 + self.1 * o.1) / d,
            (self.1 * o.0 - self.0 * o.1) / d,
        )
    }
    fn abs(self) -> f64 {
        self.0.hypot(self.1)
    }
}

/// Monic characteristic polynomial coefficients `[1, c1, …, cn]` by Faddeev–LeVerrier.
fn char_poly(a: &Matrix) -> Vec<f64> {
    let n = a.rows();
    let mut coeffs = vec![1.0];
    let mut m = Matrix::zeros(n, n);
    for k in 1..=n {
        // M_k = A·M_{k−1} + c_{k−1}·I
        let mut next = a.matmul(&m).unwrap();
        for i in 0..n {
            next[(i, i)] += coeffs[k - 1];
        }
        m = next;
        let am = a.matmul(&m).unwrap();
        let trace: f64 = (0..n).map(|i| am[(i, i)]).sum();
        coeffs.push(-trace / k as f64);
    }
    coeffs
}

/// All eigenvalue magnitudes via Durand–Kerner root finding on the characteristic polynomial.
/// Adequate for well-scaled matrices up to about 10 × 10.
pub fn eigen_magnitudes(a: &Matrix) -> Vec<f64> {
    let p = char_poly(a);
    let n = p.len() - 1;
    if n == 0 {
        return vec![];
    }
    let eval = |z: C| {
        p.iter()
            .fold(C(0.0, 0.0), |acc, &c| acc.mul(z).add(C(c, 0.0)))
    };
    let radius = 1.0 + p[1..].iter().map(|c| c.abs()).fold(0.0, f64::max);
    let mut roots: Vec<C> = (0..n)
        .map(|k| {
            let th = 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4;
            C(radius * th.cos(), radius * th.sin())
        })
        .collect();
    for _ in 0..5000 {
        let mut delta = 0.0_f64;
        for i in 0..n {
            let mut denom = C(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    denom = denom.mul(roots[i].sub(roots[j]));
                }
            }
            let step = eval(roots[i]).div(denom);
            roots[i] = roots[i].sub(step);
            delta = delta.max(step.abs());
        }
        if delta < 1e-15 * radius {
            break;
        }
    }
    roots.iter().map(|z| z.abs()).collect()
}

pub fn spectral_radius(a: &Matrix) -> f64 {
    eigen_magnitudes(a).into_iter().fold(0.0, f64::max)
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
pub fn jacobi_eigenvalues(s: &Matrix) -> Vec<f64> {
    let n = s.rows();
    let mut a = s.clone();
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[(p, q)].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * a[(p, q)]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - sn * akq;
                    a[(k, q)] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - sn * aqk;
                    a[(q, k)] = sn * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[(i, i)]).collect()
}

pub fn max_singular_value(m: &Matrix) -> f64 {
    jacobi_eigenvalues(&m.gram())
        .into_iter()
        .fold(0.0_f64, f64::max)
        .max(0.0)
        .sqrt()
}

/// Solves `a·x = b` by Gaussian elimination with partial pivoting.
pub fn gauss_solve(a: &Matrix, b: &[f64]) -> Vec<f64> {
    let n = a.rows();
    let mut m: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row = a.row(i).to_vec();
            row.push(b[i]);
            row
        })
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        m.swap(col, piv);
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            let (top, rest) = m.split_at_mut(r);
            for (a, b) in rest[0][col..].iter_mut().zip(&top[col][col..]) {
                *a -= f * b;
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| m[i][j] * x[j]).sum();
        x[i] = (m[i][n] - s) / m[i][i];
    }
    x
}

/// Least-squares weights from the normal equations `W·(x·xᵀ) = t·xᵀ`.
pub fn normal_equation_readout(x: &Matrix, t: &Matrix) -> Matrix {
    let g = x.gram();
    let mut w = Matrix::zeros(t.rows(), x.rows());
    for q in 0..t.rows() {
        let rhs: Vec<f64> = (0..x.rows())
            .map(|i| super::dot(x.row(i), t.row(q)))
            .collect();
        w.row_mut(q).copy_from_slice(&gauss_solve(&g, &rhs));
    }
    w
}
