//! Path containers and their CSV / JSON forms.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::TOL_X;

/// Resets and boundary jumps recorded along a path.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EventLog {
    pub reset_times: Vec<f64>,
    /// `X_{T_i-}`, aligned with `reset_times`.
    pub pre_reset_positions: Vec<f64>,
    /// `(time, size)` of each jump away from zero.
    pub boundary_jumps: Vec<(f64, f64)>,
}

impl EventLog {
    pub fn is_empty(&self) -> bool {
        self.reset_times.is_empty() && self.boundary_jumps.is_empty()
    }

    pub fn check(&self) -> Result<()> {
        if self.reset_times.len() != self.pre_reset_positions.len() {
            return Err(Error::OutOfRange(format!(
                "{} reset times but {} pre-reset positions",
                self.reset_times.len(),
                self.pre_reset_positions.len()
            )));
        }
        if self.reset_times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::OutOfRange(
                "reset times not strictly increasing".into(),
            ));
        }
        if self.pre_reset_positions.iter().any(|&x| !(x >= 0.0)) {
            return Err(Error::OutOfRange("negative pre-reset position".into()));
        }
        if self.boundary_jumps.iter().any(|&(_, s)| !(s > 0.0)) {
            return Err(Error::OutOfRange("non-positive boundary jump".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// A trajectory on a grid that is uniform apart from inserted event times.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SamplePath {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub events: EventLog,
}

impl SamplePath {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn terminal(&self) -> Option<(f64, f64)> {
        Some((*self.times.last()?, *self.values.last()?))
    }

    /// Value at the last grid point not after `t`.
    pub fn value_at(&self, t: f64) -> Option<f64> {
        let i = self.times.partition_point(|&s| s <= t);
        (i > 0).then(|| self.values[i - 1])
    }

    /// Checks the grid invariants; `half_line` additionally requires
    /// nonnegative values.
    pub fn check(&self, horizon: f64, dt: f64, half_line: bool) -> Result<()> {
        if self.times.len() != self.values.len() {
            return Err(Error::OutOfRange(
                "times and values differ in length".into(),
            ));
        }
        if self.times.first() != Some(&0.0) {
            return Err(Error::OutOfRange("path must start at t = 0".into()));
        }
        if self.times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::OutOfRange("times not strictly increasing".into()));
        }
        if let Some(&last) = self.times.last() {
            if last > horizon + dt {
                return Err(Error::OutOfRange(format!(
                    "path runs to {last} past {horizon}"
                )));
            }
        }
        if half_line && self.values.iter().any(|&x| !(x >= 0.0)) {
            return Err(Error::OutOfRange(
                "negative value on a half-line path".into(),
            ));
        }
        self.events.check()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_columns(w, &self.times, &self.values, None)
    }
}

/// A path together with its local time at zero and the per-step Skorokhod
/// pushes that produced it.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AugmentedPath {
    pub path: SamplePath,
    /// Local time at zero, aligned with `path.times`.
    pub local_time: Vec<f64>,
    /// Push applied on the step ending at each grid point (0 at index 0).
    pub regulator_increments: Vec<f64>,
}

impl AugmentedPath {
    pub fn times(&self) -> &[f64] {
        &self.path.times
    }

    pub fn values(&self) -> &[f64] {
        &self.path.values
    }

    pub fn check(&self, horizon: f64, dt: f64, half_line: bool) -> Result<()> {
        self.path.check(horizon, dt, half_line)?;
        let n = self.path.len();
        if self.local_time.len() != n || self.regulator_increments.len() != n {
            return Err(Error::OutOfRange("local time not aligned with path".into()));
        }
        if self.local_time.first().is_some_and(|&g| g != 0.0) {
            return Err(Error::OutOfRange("local time must start at 0".into()));
        }
        if self.local_time.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::OutOfRange("local time decreases".into()));
        }
        // A push means the continuous path touched zero inside the step, so
        // one endpoint lies within a few diffusion scales of the origin.
        let reach = TOL_X + 8.0 * (2.0 * dt).sqrt();
        for (i, &push) in self.regulator_increments.iter().enumerate() {
            if push < 0.0 {
                return Err(Error::OutOfRange("negative regulator push".into()));
            }
            if push > 0.0 {
                let near = i == 0 || self.path.values[i - 1].min(self.path.values[i]) <= reach;
                if !near {
                    return Err(Error::OutOfRange(format!(
                        "push at step {i} away from zero"
                    )));
                }
            }
        }
        Ok(())
    }

    /// CSV with columns `t,x,gamma`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_columns(
            w,
            &self.path.times,
            &self.path.values,
            Some(&self.local_time),
        )
    }
}

fn write_columns<W: Write>(mut w: W, t: &[f64], x: &[f64], gamma: Option<&[f64]>) -> Result<()> {
    match gamma {
        Some(g) => {
            writeln!(w, "t,x,gamma")?;
            for ((t, x), g) in t.iter().zip(x).zip(g) {
                writeln!(w, "{t},{x},{g}")?;
            }
        }
        None => {
            writeln!(w, "t,x")?;
            for (t, x) in t.iter().zip(x) {
                writeln!(w, "{t},{x}")?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> AugmentedPath {
        AugmentedPath {
            path: SamplePath {
                times: vec![0.0, 0.5, 0.7, 1.0],
                values: vec![0.3, 0.0, 0.0, 0.2],
                events: EventLog {
                    reset_times: vec![0.7],
                    pre_reset_positions: vec![0.1],
                    boundary_jumps: vec![],
                },
            },
            local_time: vec![0.0, 0.1, 0.1, 0.1],
            regulator_increments: vec![0.0, 0.1, 0.0, 0.0],
        }
    }

    #[test]
    fn valid_path_checks() {
        small().check(1.0, 0.5, true).unwrap();
    }

    #[test]
    fn push_away_from_zero_is_rejected() {
        let mut p = small();
        p.path.values[2] = 9.0;
        p.path.values[3] = 9.0;
        p.regulator_increments[3] = 0.01;
        assert!(p.check(1.0, 0.5, true).is_err());
    }

    #[test]
    fn csv_has_gamma_column() {
        let mut buf = Vec::new();
        small().write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let mut lines = s.lines();
        assert_eq!(lines.next(), Some("t,x,gamma"));
        assert_eq!(lines.next(), Some("0,0.3,0"));
        assert_eq!(s.lines().count(), 5);
    }

    #[test]
    fn event_log_json_shape() {
        let log = EventLog {
            reset_times: vec![1.0],
            pre_reset_positions: vec![0.5],
            boundary_jumps: vec![(2.0, 0.25)],
        };
        let v: serde_json::Value = serde_json::from_str(&log.to_json().unwrap()).unwrap();
        assert_eq!(v["boundary_jumps"][0][1], 0.25);
        assert_eq!(v["reset_times"][0], 1.0);
        let back: EventLog = serde_json::from_str(&log.to_json().unwrap()).unwrap();
        assert_eq!(back, log);
    }

    #[test]
    fn value_at_is_left_continuous_lookup() {
        let p = small().path;
        assert_eq!(p.value_at(0.6), Some(0.0));
        assert_eq!(p.value_at(1.0), Some(0.2));
        assert_eq!(p.value_at(-1.0), None);
    }
}
