//! Online readout adaptation with the projection algorithm, plus the persistent-excitation
//! and Lyapunov monitors that accompany it.
//!
//! Only `W_out` adapts. The reservoir is stepped exactly as in offline evaluation and the
//! regressor `g(n)` uses the model's readout layout (block states, then inputs if the model
//! feeds them to the readout).

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::numeric::{dot, Matrix};
use crate::reservoir::BlockModel;

/// Readout weights being adapted, with the step-size parameters of the update.
#[derive(Clone, Debug, PartialEq)]
pub struct OnlineState {
    pub w_current: Matrix,
    pub gamma: f64,
    pub c: f64,
    pub step: usize,
}

impl OnlineState {
    pub fn new(w_current: Matrix, gamma: f64, c: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::invalid(format!(
                "gamma must be positive, got {gamma}"
            )));
        }
        if !(c >= 0.0 && c.is_finite()) {
            return Err(Error::invalid(format!("c must be non-negative, got {c}")));
        }
        Ok(OnlineState {
            w_current,
            gamma,
            c,
            step: 0,
        })
    }
}

/// `W(n) = W(n−1) + γ (y − W(n−1) g) gᵀ / (c + gᵀg)`.
pub fn projection_step(state: &OnlineState, g: &[f64], y: &[f64]) -> Result<OnlineState> {
    let (l, d) = state.w_current.shape();
    if g.len() != d || y.len() != l {
        return Err(Error::invalid(format!(
            "projection step on a {l}x{d} readout got g of {} and y of {}",
            g.len(),
            y.len()
        )));
    }
    let gg = dot(g, g);
    let denom = state.c + gg;
    if denom == 0.0 {
        return Err(Error::DivisionGuard);
    }
    let mut w = state.w_current.clone();
    for (i, yi) in y.iter().enumerate() {
        let row = w.row_mut(i);
        let residual = yi - dot(row, g);
        let k = state.gamma * residual / denom;
        for (wv, gv) in row.iter_mut().zip(g) {
            *wv += k * gv;
        }
    }
    Ok(OnlineState {
        w_current: w,
        gamma: state.gamma,
        c: state.c,
        step: state.step + 1,
    })
}

/// Persistent-excitation summary of one window of regressors.
#[derive(Clone, Debug, PartialEq)]
pub struct PEWindowReport {
    pub window_length: usize,
    pub windowed_sum: f64,
    pub pointwise_min: f64,
    pub pointwise_max: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub pe_satisfied: bool,
    /// Whether the gain condition held at every step of the window. Always `true` from
    /// [`pe_window_check`], which sees regressors only; [`run_online`] fills it in.
    pub gain_ok: bool,
}

/// Evaluates the excitation bounds on a window of regressors.
///
/// Passing requires `η₁ ≥ Σ gᵀg ≥ η₂` over the window, `η₁ ≥ max gᵀg`, and
/// `min gᵀg ≥ η₂ / n_w` (the pointwise lower bound read as a per-step average).
pub fn pe_window_check<G: AsRef<[f64]>>(g_history: &[G], eta1: f64, eta2: f64) -> PEWindowReport {
    let energies: Vec<f64> = g_history
        .iter()
        .map(|g| {
            let g = g.as_ref();
            dot(g, g)
        })
        .collect();
    let n_w = energies.len();
    let windowed_sum: f64 = energies.iter().sum();
    let (pointwise_min, pointwise_max) = if n_w == 0 {
        (0.0, 0.0)
    } else {
        energies
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &e| {
                (lo.min(e), hi.max(e))
            })
    };
    let pointwise_floor = if n_w == 0 { eta2 } else { eta2 / n_w as f64 };
    let pe_satisfied = n_w > 0
        && eta1 >= windowed_sum
        && windowed_sum >= eta2
        && eta1 >= pointwise_max
        && pointwise_min >= pointwise_floor;
    PEWindowReport {
        window_length: n_w,
        windowed_sum,
        pointwise_min,
        pointwise_max,
        eta1,
        eta2,
        pe_satisfied,
        gain_ok: true,
    }
}

/// `ΔP⁻¹ ≤ 2γη₂ − γ²η₁²`, evaluated literally (the right side may be negative).
pub fn gain_condition_check(delta_p_inverse: f64, gamma: f64, eta1: f64, eta2: f64) -> bool {
    delta_p_inverse <= 2.0 * gamma * eta2 - gamma * gamma * eta1 * eta1
}

#[derive(Clone, Debug, PartialEq)]
pub struct OnlineOptions {
    pub gamma: f64,
    pub c: f64,
    pub n_w: usize,
    pub eta1: f64,
    pub eta2: f64,
    /// Reference weights `W₀` used for the error and Lyapunov columns.
    pub w_reference: Option<Matrix>,
}

impl Default for OnlineOptions {
    fn default() -> Self {
        OnlineOptions {
            gamma: 1.0,
            c: 1e-4,
            n_w: 50,
            eta1: f64::INFINITY,
            eta2: 0.0,
            w_reference: None,
        }
    }
}

/// One logged step. The error-based fields are `None` without a reference, and `delta_v` is
/// also `None` at the first logged step.
#[derive(Clone, Debug, PartialEq)]
pub struct OnlineStep {
    pub n: usize,
    pub prediction: Vec<f64>,
    pub target: Vec<f64>,
    pub weight_error_fro: Option<f64>,
    pub v_lyapunov: Option<f64>,
    pub delta_v: Option<f64>,
    pub p_inverse: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WindowEntry {
    /// Stream index of the last step in the window.
    pub window_end: usize,
    pub report: PEWindowReport,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OnlineLog {
    pub steps: Vec<OnlineStep>,
    pub windows: Vec<WindowEntry>,
    pub final_weights: Matrix,
}

pub const ONLINE_CSV_HEADER: &str =
    "n,prediction,target,weight_error_fro,v_lyapunov,delta_v,p_inverse";
pub const PE_CSV_HEADER: &str =
    "window_end,windowed_sum,pointwise_min,pointwise_max,pe_satisfied,gain_ok";

fn join_values(values: &[f64]) -> String {
    values
        .iter()
        .map(f64::to_string)
        .collect::<Vec<_>>()
        .join(";")
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NaN".to_string(), |x| x.to_string())
}

impl OnlineLog {
    /// Multi-output predictions and targets are written as `;`-separated values in one field.
    pub fn steps_csv(&self) -> String {
        let mut out = String::from(ONLINE_CSV_HEADER);
        out.push('\n');
        for s in &self.steps {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                s.n,
                join_values(&s.prediction),
                join_values(&s.target),
                opt(s.weight_error_fro),
                opt(s.v_lyapunov),
                opt(s.delta_v),
                s.p_inverse
            );
        }
        out
    }

    pub fn windows_csv(&self) -> String {
        let mut out = String::from(PE_CSV_HEADER);
        out.push('\n');
        for w in &self.windows {
            let r = &w.report;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                w.window_end,
                r.windowed_sum,
                r.pointwise_min,
                r.pointwise_max,
                r.pe_satisfied,
                r.gain_ok
            );
        }
        out
    }

    pub fn write_steps_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.steps_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn write_windows_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.windows_csv()).map_err(|e| Error::io(path, e))
    }

    /// Steps lying in windows where both monitors passed.
    pub fn monitored_steps(&self, n_w: usize) -> Vec<&OnlineStep> {
        let mut picked = Vec::new();
        for (k, w) in self.windows.iter().enumerate() {
            if w.report.pe_satisfied && w.report.gain_ok {
                picked.extend(&self.steps[k * n_w..(k + 1) * n_w]);
            }
        }
        picked
    }
}

/// Streams `stream` through the model, predicting each target before adapting `W_out` on it.
///
/// Steps inside the stream's washout drive the reservoir but are neither logged nor used for
/// updates. With a reference `W₀`, `V(n) = P⁻¹(n)·‖W₀ − W(n)‖²_F` (per-output terms summed).
pub fn run_online(model: &BlockModel, stream: &Dataset, opts: &OnlineOptions) -> Result<OnlineLog> {
    if stream.input_dim() != model.input_dim || stream.output_dim() != model.output_dim {
        return Err(Error::invalid(format!(
            "stream has K = {}, L = {}; model has K = {}, L = {}",
            stream.input_dim(),
            stream.output_dim(),
            model.input_dim,
            model.output_dim
        )));
    }
    if opts.n_w == 0 {
        return Err(Error::invalid("window length n_w must be at least 1"));
    }
    if let Some(w0) = &opts.w_reference {
        if w0.shape() != model.w_out.shape() {
            return Err(Error::invalid(format!(
                "reference weights are {:?}, model readout is {:?}",
                w0.shape(),
                model.w_out.shape()
            )));
        }
    }
    let mut state = OnlineState::new(model.w_out.clone(), opts.gamma, opts.c)?;
    let mut log = OnlineLog {
        steps: Vec::new(),
        windows: Vec::new(),
        final_weights: model.w_out.clone(),
    };
    if stream.is_empty() {
        return Ok(log);
    }

    let washout = stream.washout.min(stream.len());
    let g_all = model.states(&stream.u, washout)?.values;
    let mut window: Vec<Vec<f64>> = Vec::with_capacity(opts.n_w);
    let mut window_gain_ok = true;
    let mut prev_p_inv: Option<f64> = None;
    let mut prev_v: Option<f64> = None;

    for (k, n) in (washout..stream.len()).enumerate() {
        let g = g_all.column(k);
        let y = stream.t.column(n);
        let prediction = state.w_current.mul_vec(&g);
        state = projection_step(&state, &g, &y)?;

        let p_inverse = opts.c + dot(&g, &g);
        if let Some(prev) = prev_p_inv {
            window_gain_ok &=
                gain_condition_check(p_inverse - prev, opts.gamma, opts.eta1, opts.eta2);
        }
        prev_p_inv = Some(p_inverse);

        let err_sq = opts
            .w_reference
            .as_ref()
            .map(|w0| w0.sub(&state.w_current).map(|e| e.frobenius_norm_sq()))
            .transpose()?;
        let v = err_sq.map(|e| p_inverse * e);
        let delta_v = match (v, prev_v) {
            (Some(v), Some(p)) => Some(v - p),
            _ => None,
        };
        prev_v = v;

        log.steps.push(OnlineStep {
            n,
            prediction,
            target: y,
            weight_error_fro: err_sq.map(f64::sqrt),
            v_lyapunov: v,
            delta_v,
            p_inverse,
        });

        window.push(g);
        if window.len() == opts.n_w {
            let mut report = pe_window_check(&window, opts.eta1, opts.eta2);
            report.gain_ok = window_gain_ok;
            log.windows.push(WindowEntry {
                window_end: n,
                report,
            });
            window.clear();
            window_gain_ok = true;
        }
    }
    log.final_weights = state.w_current;
    Ok(log)
}
