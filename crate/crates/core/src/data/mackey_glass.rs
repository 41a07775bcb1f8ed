use serde::{Deserialize, Serialize};

use crate::data::{Dataset, TaskSplits};
use crate::error::{Error, Result};
use crate::numeric::{Matrix, RngStream};

/// Parameters of the delay differential equation
/// `du/ds = υ·u(s) + α·u(s − τ) / (1 + u(s − τ)¹⁰)`.
///
/// The series is sampled once per unit of time. `dt` is the integration step and must divide
/// one; `tau_delay` is the delay in time units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MgConfig {
    pub upsilon: f64,
    pub alpha_mg: f64,
    pub tau_delay: usize,
    pub dt: f64,
    pub length: usize,
    pub init_range: [f64; 2],
    pub seed: u64,
}

impl Default for MgConfig {
    fn default() -> Self {
        MgConfig {
            upsilon: -0.1,
            alpha_mg: 0.2,
            tau_delay: 17,
            dt: 1.0,
            length: 1177,
            init_range: [0.1, 1.3],
            seed: 0,
        }
    }
}

impl MgConfig {
    /// Integration sub-steps per unit of time.
    fn substeps(&self) -> Result<usize> {
        if !(self.dt > 0.0 && self.dt <= 1.0) {
            return Err(Error::invalid(format!(
                "dt must lie in (0, 1], got {}",
                self.dt
            )));
        }
        let m = (1.0 / self.dt).round();
        if ((1.0 / self.dt) - m).abs() > 1e-9 * m {
            return Err(Error::invalid(format!(
                "dt = {} does not divide one",
                self.dt
            )));
        }
        Ok(m as usize)
    }

    pub fn validate(&self) -> Result<()> {
        self.substeps()?;
        if self.tau_delay < 1 {
            return Err(Error::invalid("tau_delay must be at least 1"));
        }
        if self.length <= self.tau_delay {
            return Err(Error::invalid("length must exceed tau_delay"));
        }
        let [lo, hi] = self.init_range;
        if !(lo <= hi) {
            return Err(Error::invalid("init_range must be ordered"));
        }
        Ok(())
    }

    /// The `tau_delay + 1` history samples at times `−τ, …, 0`.
    pub fn draw_history(&self) -> Vec<f64> {
        let mut rng = RngStream::derive(self.seed, &[0x4d47]);
        let [lo, hi] = self.init_range;
        (0..=self.tau_delay).map(|_| rng.uniform(lo, hi)).collect()
    }
}

/// Generates `cfg.length` unit-spaced samples starting at time 0.
pub fn gen_mackey_glass(cfg: &MgConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    integrate_mackey_glass(cfg, &cfg.draw_history())
}

/// Midpoint-rule integration from a given unit-spaced history (`tau_delay + 1` values at
/// times `−τ..=0`). Delayed values between grid points are linearly interpolated.
pub fn integrate_mackey_glass(cfg: &MgConfig, history: &[f64]) -> Result<Vec<f64>> {
    cfg.validate()?;
    if history.len() != cfg.tau_delay + 1 {
        return Err(Error::invalid(format!(
            "history needs {} values, got {}",
            cfg.tau_delay + 1,
            history.len()
        )));
    }
    let m = cfg.substeps()?;
    let lag = cfg.tau_delay * m;
    let h = 1.0 / m as f64;

    // fine grid: index i ↔ time (i − lag)·h; the first `lag + 1` entries are the history
    let total = lag + (cfg.length - 1) * m + 1;
    let mut grid = Vec::with_capacity(total);
    for i in 0..=lag {
        let s = i as f64 / m as f64;
        let k = (s.floor() as usize).min(cfg.tau_delay);
        let frac = s - k as f64;
        let v = if k == cfg.tau_delay {
            history[k]
        } else {
            history[k] * (1.0 - frac) + history[k + 1] * frac
        };
        grid.push(v);
    }

    let f = |u: f64, d: f64| cfg.upsilon * u + cfg.alpha_mg * d / (1.0 + d.powi(10));
    for i in lag..total - 1 {
        let u = grid[i];
        let d0 = grid[i - lag];
        let d_half = 0.5 * (grid[i - lag] + grid[i - lag + 1]);
        let k1 = f(u, d0);
        let k2 = f(u + 0.5 * h * k1, d_half);
        grid.push(u + h * k2);
    }
    Ok((0..cfg.length).map(|n| grid[lag + n * m]).collect())
}

/// Which lagged values feed the model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MgVariant {
    /// `y(n), y(n−6), y(n−12), y(n−18)`
    Mg,
    /// `y(n−6), y(n−12), y(n−18)`
    Mg1,
    /// `y(n−12), y(n−18)`
    Mg2,
}

impl MgVariant {
    pub fn lags(self) -> &'static [usize] {
        match self {
            MgVariant::Mg => &[0, 6, 12, 18],
            MgVariant::Mg1 => &[6, 12, 18],
            MgVariant::Mg2 => &[12, 18],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MgVariant::Mg => "mg",
            MgVariant::Mg1 => "mg1",
            MgVariant::Mg2 => "mg2",
        }
    }
}

impl std::str::FromStr for MgVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mg" => Ok(MgVariant::Mg),
            "mg1" => Ok(MgVariant::Mg1),
            "mg2" => Ok(MgVariant::Mg2),
            other => Err(Error::invalid(format!("unknown MG variant '{other}'"))),
        }
    }
}

pub const MG_MAX_LAG: usize = 18;
pub const MG_HORIZON: usize = 6;
pub const MG_TRAIN: usize = 500;
pub const MG_VAL: usize = 300;
pub const MG_WASHOUT: usize = 20;

/// Six-step-ahead prediction task. Sample `s` (0-based) uses time `n = s + 18`; the first
/// 500 samples train, the next 300 validate and the rest test. Each split washes out 20 steps.
pub fn build_mg_task(series: &[f64], variant: MgVariant) -> Result<TaskSplits> {
    let usable = series.len().saturating_sub(MG_MAX_LAG + MG_HORIZON);
    if usable <= MG_TRAIN + MG_VAL + MG_WASHOUT {
        return Err(Error::invalid(format!(
            "series of {} points is too short for the MG task",
            series.len()
        )));
    }
    let lags = variant.lags();
    let mut u = Matrix::zeros(lags.len(), usable);
    let mut t = Matrix::zeros(1, usable);
    for s in 0..usable {
        let n = s + MG_MAX_LAG;
        for (row, &d) in lags.iter().enumerate() {
            u[(row, s)] = series[n - d];
        }
        t[(0, s)] = series[n + MG_HORIZON];
    }
    let all = Dataset::new(u, t, 0, variant.name())?;
    let name = variant.name();
    Ok(TaskSplits {
        train: all.slice(0, MG_TRAIN, MG_WASHOUT, &format!("{name}-train"))?,
        val: all.slice(
            MG_TRAIN,
            MG_TRAIN + MG_VAL,
            MG_WASHOUT,
            &format!("{name}-val"),
        )?,
        test: all.slice(
            MG_TRAIN + MG_VAL,
            usable,
            MG_WASHOUT,
            &format!("{name}-test"),
        )?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_length_and_range() {
        let s = gen_mackey_glass(&MgConfig::default()).unwrap();
        assert_eq!(s.len(), 1177);
        assert!(s.iter().all(|v| v.is_finite() && *v > 0.0 && *v < 2.0));
    }

    #[test]
    fn zero_dynamics_hold_initial_value() {
        let cfg = MgConfig {
            upsilon: 0.0,
            alpha_mg: 0.0,
            length: 50,
            ..MgConfig::default()
        };
        let s = gen_mackey_glass(&cfg).unwrap();
        let h = cfg.draw_history();
        assert!(s.iter().all(|&v| v == h[cfg.tau_delay]));
    }

    fn euler_oracle(cfg: &MgConfig, history: &[f64], steps_per_unit: usize) -> Vec<f64> {
        let h = 1.0 / steps_per_unit as f64;
        let lag = cfg.tau_delay * steps_per_unit;
        let mut grid: Vec<f64> = (0..=lag)
            .map(|i| {
                let s = i as f64 * h;
                let k = s.floor() as usize;
                if k >= cfg.tau_delay {
                    history[cfg.tau_delay]
                } else {
                    history[k] + (history[k + 1] - history[k]) * (s - k as f64)
                }
            })
            .collect();
        for i in lag..lag + (cfg.length - 1) * steps_per_unit {
            let d = grid[i - lag];
            let du = cfg.upsilon * grid[i] + cfg.alpha_mg * d / (1.0 + d.powi(10));
            grid.push(grid[i] + h * du);
        }
        (0..cfg.length)
            .map(|n| grid[lag + n * steps_per_unit])
            .collect()
    }

    #[test]
    fn midpoint_rule_agrees_with_fine_euler() {
        // a unit step is far from converged on this chaotic system, so the oracle comparison
        // runs at dt = 0.01 against an Euler solution with a hundred times finer step
        let cfg = MgConfig {
            dt: 0.01,
            length: 200,
            seed: 3,
            ..MgConfig::default()
        };
        let history = cfg.draw_history();
        let rk = integrate_mackey_glass(&cfg, &history).unwrap();
        let euler = euler_oracle(&cfg, &history, 10_000);
        let dev = rk
            .iter()
            .zip(&euler)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(dev < 1e-3, "max deviation {dev}");
    }

    #[test]
    fn task_shapes_and_lags() {
        let s = gen_mackey_glass(&MgConfig::default()).unwrap();
        let mg = build_mg_task(&s, MgVariant::Mg).unwrap();
        assert_eq!((mg.train.input_dim(), mg.train.output_dim()), (4, 1));
        assert_eq!(
            (mg.train.len(), mg.val.len(), mg.test.len()),
            (500, 300, 353)
        );
        assert_eq!(
            build_mg_task(&s, MgVariant::Mg2).unwrap().train.input_dim(),
            2
        );
        assert_eq!(
            build_mg_task(&s, MgVariant::Mg1).unwrap().train.input_dim(),
            3
        );
        for split in [&mg.train, &mg.val, &mg.test] {
            assert_eq!(split.washout, 20);
        }
        // the y(n) input equals the target six samples earlier
        for c in 12..500 {
            assert_eq!(mg.train.u[(0, c)], mg.train.t[(0, c - 6)]);
            assert_eq!(mg.train.u[(1, c)], mg.train.t[(0, c - 12)]);
        }
        // splits are consecutive in time
        assert_eq!(mg.val.u[(0, 0)], s[500 + 18]);
        assert_eq!(mg.test.u[(0, 0)], s[800 + 18]);
    }

    #[test]
    fn short_series_is_rejected() {
        assert!(build_mg_task(&vec![0.5; 600], MgVariant::Mg).is_err());
    }

    #[test]
    fn constant_series_has_degenerate_targets() {
        let splits = build_mg_task(&vec![0.7; 1177], MgVariant::Mg).unwrap();
        let t = splits.test.effective_targets();
        assert!(matches!(
            crate::numeric::nrmse(&t, &t),
            Err(Error::DegenerateTarget)
        ));
        assert!(splits.test.u.as_slice().iter().all(|&v| v == 0.7));
    }
}
