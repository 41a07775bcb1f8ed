use crate::error::{Error, Result};
use crate::numeric::{cholesky, cholesky_substitute, dot, Matrix};

/// Supervisory score of one candidate block.
#[derive(Clone, Debug, PartialEq)]
pub struct CandidateScore {
    pub xi_per_output: Vec<f64>,
    pub xi_total: f64,
    pub lambda: f64,
    pub candidate_index: usize,
}

impl CandidateScore {
    /// The candidate meets the acceptance inequality for every output.
    pub fn passes(&self) -> bool {
        self.xi_per_output.iter().all(|&x| x >= 0.0)
    }
}

/// Cholesky factor of `x·xᵀ`, with one diagonal-loading retry of `1e-8·trace/N`.
fn gram_factor(x: &Matrix) -> Option<Matrix> {
    let mut g = x.gram();
    if let Some(l) = cholesky(&g) {
        return Some(l);
    }
    let n = g.rows();
    let trace: f64 = (0..n).map(|i| g[(i, i)]).sum();
    let load = 1e-8 * trace / n as f64;
    if !(load > 0.0) {
        return None;
    }
    for i in 0..n {
        g[(i, i)] += load;
    }
    cholesky(&g)
}

fn check_columns(e: &Matrix, x: &Matrix) -> Result<()> {
    if e.cols() != x.cols() {
        return Err(Error::invalid(format!(
            "residual has {} columns, candidate states {}",
            e.cols(),
            x.cols()
        )));
    }
    if x.rows() == 0 {
        return Err(Error::invalid("candidate state matrix has no rows"));
    }
    Ok(())
}

/// `ξ_q = e_q·xᵀ(x·xᵀ)⁻¹·x·e_qᵀ − (1 − r − μ)·e_q·e_qᵀ` for every output row `q` of `e`.
///
/// Returns `Ok(None)` when `x·xᵀ` stays singular after diagonal loading, which rejects the
/// candidate. `lambda` and `candidate_index` are left at zero for the caller to fill in.
pub fn xi_scores(e: &Matrix, x_cand: &Matrix, r: f64, mu: f64) -> Result<Option<CandidateScore>> {
    check_columns(e, x_cand)?;
    let Some(l) = gram_factor(x_cand) else {
        return Ok(None);
    };
    let slack = 1.0 - r - mu;
    let xi_per_output: Vec<f64> = (0..e.rows())
        .map(|q| {
            let eq = e.row(q);
            let b: Vec<f64> = (0..x_cand.rows()).map(|i| dot(x_cand.row(i), eq)).collect();
            let z = cholesky_substitute(&l, &b);
            dot(&b, &z) - slack * dot(eq, eq)
        })
        .collect();
    let xi_total = xi_per_output.iter().sum();
    Ok(Some(CandidateScore {
        xi_per_output,
        xi_total,
        lambda: 0.0,
        candidate_index: 0,
    }))
}

/// The single-node score `(eᵀg)²/(gᵀg) − (1 − r − μ)·eᵀe` summed form, per output.
pub fn xi_single_node(e: &Matrix, g: &[f64], r: f64, mu: f64) -> Result<Option<CandidateScore>> {
    if e.cols() != g.len() {
        return Err(Error::invalid(
            "state row length differs from residual columns",
        ));
    }
    let gg = dot(g, g);
    if !(gg > 0.0) {
        return Ok(None);
    }
    let slack = 1.0 - r - mu;
    let xi_per_output: Vec<f64> = (0..e.rows())
        .map(|q| {
            let eq = e.row(q);
            let eg = dot(eq, g);
            eg * eg / gg - slack * dot(eq, eq)
        })
        .collect();
    let xi_total = xi_per_output.iter().sum();
    Ok(Some(CandidateScore {
        xi_per_output,
        xi_total,
        lambda: 0.0,
        candidate_index: 0,
    }))
}

/// Least-squares weights of the residual onto one block's states,
/// `β = e·xᵀ(x·xᵀ)⁻¹` (L × N), so that `e − β·x` is the part of `e` the block cannot explain.
///
/// The output weights of a newly accepted block are `−β` when the residual is defined as
/// prediction minus target.
pub fn block_weights(e: &Matrix, x: &Matrix) -> Result<Option<Matrix>> {
    check_columns(e, x)?;
    let Some(l) = gram_factor(x) else {
        return Ok(None);
    };
    let mut beta = Matrix::zeros(e.rows(), x.rows());
    for q in 0..e.rows() {
        let b: Vec<f64> = (0..x.rows()).map(|i| dot(x.row(i), e.row(q))).collect();
        beta.row_mut(q)
            .copy_from_slice(&cholesky_substitute(&l, &b));
    }
    Ok(Some(beta))
}
