//! Physical constants of a run.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Resetting rate, start and resetting points, horizon and step size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Resetting rate `r ≥ 0`.
    pub r: f64,
    /// Start position.
    pub x0: f64,
    /// Resetting point; zero for every half-line process.
    pub x_r: f64,
    /// Simulated horizon `T > 0`.
    pub horizon: f64,
    /// Grid step `dt > 0`.
    pub dt: f64,
}

impl ModelParams {
    /// Half-line parameters (`x_r = 0`) with the default step for `r`.
    pub fn new(r: f64, x0: f64, horizon: f64) -> Self {
        Self {
            r,
            x0,
            x_r: 0.0,
            horizon,
            dt: default_dt(r),
        }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn with_x0(mut self, x0: f64) -> Self {
        self.x0 = x0;
        self
    }

    pub fn with_horizon(mut self, horizon: f64) -> Self {
        self.horizon = horizon;
        self
    }

    /// `√r`, the rate of the stationary law and of the reversed jumps.
    pub fn sqrt_r(&self) -> f64 {
        self.r.sqrt()
    }

    /// Checks every invariant for a half-line process and reports all
    /// violations at once.
    pub fn validate(&self) -> Result<()> {
        let mut errs = self.scalar_violations();
        if !(self.x0 >= 0.0) {
            errs.push(format!("x0 must be ≥ 0 on the half-line (got {})", self.x0));
        }
        if self.x_r != 0.0 {
            errs.push(format!("x_r must be 0 on the half-line (got {})", self.x_r));
        }
        into_result(errs)
    }

    /// Like [`validate`](Self::validate) but for processes on the whole line,
    /// where start and resetting points are unconstrained.
    pub fn validate_on_line(&self) -> Result<()> {
        let mut errs = self.scalar_violations();
        if !self.x0.is_finite() {
            errs.push(format!("x0 must be finite (got {})", self.x0));
        }
        if !self.x_r.is_finite() {
            errs.push(format!("x_r must be finite (got {})", self.x_r));
        }
        into_result(errs)
    }

    fn scalar_violations(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if !(self.r >= 0.0) || !self.r.is_finite() {
            errs.push(format!("r must be ≥ 0 (got {})", self.r));
        }
        if !(self.dt > 0.0) {
            errs.push(format!("dt must be > 0 (got {})", self.dt));
        }
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            errs.push(format!("horizon must be > 0 (got {})", self.horizon));
        }
        if self.dt > 0.0 && self.horizon > 0.0 && self.dt >= self.horizon {
            errs.push(format!(
                "dt must be < horizon (got dt={}, horizon={})",
                self.dt, self.horizon
            ));
        }
        errs
    }
}

fn into_result(errs: Vec<String>) -> Result<()> {
    if errs.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidParams(errs))
    }
}

/// Default grid step `1e-4·max(1, 1/r)`, capped at `1e-3` so that `r → 0`
/// stays usable.
pub fn default_dt(r: f64) -> f64 {
    if r > 0.0 {
        (1e-4 * (1.0 / r).max(1.0)).min(1e-3)
    } else {
        1e-3
    }
}

/// Default number of Monte Carlo paths.
pub const DEFAULT_PATHS: usize = 100_000;

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> ModelParams {
        ModelParams {
            r: 2.0,
            x0: 0.0,
            x_r: 0.0,
            horizon: 10.0,
            dt: 1e-3,
        }
    }

    fn messages(p: ModelParams) -> Vec<String> {
        match p.validate() {
            Err(Error::InvalidParams(m)) => m,
            other => panic!("expected InvalidParams, got {other:?}"),
        }
    }

    #[test]
    fn valid_parameters_pass() {
        assert!(base().validate().is_ok());
    }

    #[test]
    fn negative_rate_is_reported() {
        let m = messages(ModelParams { r: -1.0, ..base() });
        assert_eq!(m.len(), 1);
        assert!(m[0].starts_with("r must be ≥ 0"));
    }

    #[test]
    fn zero_step_is_reported() {
        let m = messages(ModelParams { dt: 0.0, ..base() });
        assert!(m[0].starts_with("dt must be > 0"));
    }

    #[test]
    fn all_violations_are_collected() {
        let p = ModelParams {
            r: -1.0,
            x0: -0.5,
            x_r: 1.0,
            horizon: 0.0,
            dt: -1.0,
        };
        assert_eq!(messages(p).len(), 5);
    }

    #[test]
    fn line_processes_accept_negative_start() {
        let p = ModelParams {
            x0: -3.0,
            x_r: 1.5,
            ..base()
        };
        assert!(p.validate().is_err());
        assert!(p.validate_on_line().is_ok());
    }

    #[test]
    fn step_must_be_below_horizon() {
        let m = messages(ModelParams { dt: 20.0, ..base() });
        assert!(m[0].starts_with("dt must be < horizon"));
    }

    #[test]
    fn default_step_follows_rate() {
        assert_eq!(default_dt(4.0), 1e-4);
        assert!((default_dt(0.5) - 2e-4).abs() < 1e-18);
        assert_eq!(default_dt(0.0), 1e-3);
        assert_eq!(default_dt(1e-6), 1e-3);
    }
}
