//! Monte Carlo paths of `B`, `B⁺`, the resetting processes `X`, `X⁺` and the
//! drifted reflected motion `B̃`.
//!
//! Brownian increments have variance `2·dt`. Reset times are exact
//! exponential interarrivals inserted into the grid, and the local time at
//! zero of a reflected path is its Skorokhod regulator.

mod engine;
mod mc;

use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

pub use engine::{Engine, LevelCrossing, Observer, Quiet, Scheme};
pub use mc::{
    between_reset_samples, hitting_time_samples, inverse_local_time_samples, par_paths,
    pre_reset_position_samples, reset_counts, stationary_pairs, terminal_samples,
    terminal_samples_with, BetweenResets, Censored, PairSample,
};
pub(crate) use mc::{completion_time, inverse_local_time_one, stationary_start};

use crate::error::{domain, Result};
use crate::params::ModelParams;
use crate::path::{AugmentedPath, EventLog, SamplePath};
use crate::rng::RngStreamSpec;
use crate::TOL_X;

/// The processes that can be simulated directly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProcessKind {
    FreeBM,
    ReflectedBM,
    FreeResetting,
    ReflectedResetting,
    /// Reflected at 0 with drift `-2√r`.
    DriftedReflected,
}

impl ProcessKind {
    pub const ALL: [ProcessKind; 5] = [
        ProcessKind::FreeBM,
        ProcessKind::ReflectedBM,
        ProcessKind::FreeResetting,
        ProcessKind::ReflectedResetting,
        ProcessKind::DriftedReflected,
    ];

    pub fn drift(self, r: f64) -> f64 {
        match self {
            ProcessKind::DriftedReflected => -2.0 * r.sqrt(),
            _ => 0.0,
        }
    }

    pub fn reflected(self) -> bool {
        !matches!(self, ProcessKind::FreeBM | ProcessKind::FreeResetting)
    }

    pub fn resets(self) -> bool {
        matches!(
            self,
            ProcessKind::FreeResetting | ProcessKind::ReflectedResetting
        )
    }

    pub fn validate(self, p: &ModelParams) -> Result<()> {
        if self.reflected() {
            p.validate()
        } else {
            p.validate_on_line()
        }
    }
}

struct Recorder {
    path: AugmentedPath,
}

impl Observer for Recorder {
    fn step(&mut self, t: f64, x: f64, ell: f64, push: f64) -> ControlFlow<()> {
        self.path.path.times.push(t);
        self.path.path.values.push(x);
        self.path.local_time.push(ell);
        self.path.regulator_increments.push(push);
        ControlFlow::Continue(())
    }

    fn reset(&mut self, t: f64, pre: f64, _ell: f64) {
        self.path.path.events.reset_times.push(t);
        self.path.path.events.pre_reset_positions.push(pre);
    }
}

/// Simulates one path of `kind` on `[0, p.horizon]`.
pub fn simulate(kind: ProcessKind, p: &ModelParams, spec: RngStreamSpec) -> Result<AugmentedPath> {
    simulate_with(kind, p, spec, Scheme::default())
}

pub fn simulate_with(
    kind: ProcessKind,
    p: &ModelParams,
    spec: RngStreamSpec,
    scheme: Scheme,
) -> Result<AugmentedPath> {
    kind.validate(p)?;
    let n = (p.horizon / p.dt).ceil() as usize + 1;
    let mut rec = Recorder {
        path: AugmentedPath {
            path: SamplePath {
                times: Vec::with_capacity(n),
                values: Vec::with_capacity(n),
                events: EventLog::default(),
            },
            local_time: Vec::with_capacity(n),
            regulator_increments: Vec::with_capacity(n),
        },
    };
    let _ = rec.step(0.0, p.x0, 0.0, 0.0);
    let mut engine = Engine::with_scheme(kind, p, spec, scheme);
    let _ = engine.run(p.horizon, &mut rec);
    Ok(rec.path)
}

/// Multiplier turning `(1/2ε)·occupation of [0, ε)` into the regulator local
/// time. With `Var B_t = 2t` the occupation density of a reflected path at
/// 0⁺ is twice its regulator, so the raw estimator reads half of it.
pub const OCCUPATION_CALIBRATION: f64 = 2.0;

/// Occupation-time estimate of the local time at zero at every grid time:
/// `OCCUPATION_CALIBRATION · (1/2ε) ∫₀^t 1{X_s < ε} ds`, with the integral
/// taken by the left-point rule on the grid.
pub fn local_time_occupation(path: &AugmentedPath, eps: f64) -> Result<Vec<f64>> {
    if !(eps > 0.0) {
        return Err(domain("eps must be > 0", eps));
    }
    let t = path.times();
    let x = path.values();
    let mut out = Vec::with_capacity(t.len());
    let mut occ = 0.0;
    out.push(0.0);
    for i in 1..t.len() {
        if x[i - 1] < eps {
            occ += t[i] - t[i - 1];
        }
        out.push(OCCUPATION_CALIBRATION * occ / (2.0 * eps));
    }
    Ok(out)
}

/// First grid time at which the path is within [`TOL_X`] of zero or the
/// reflection pushed it, i.e. the step touched the origin.
pub fn first_hitting_time(path: &AugmentedPath) -> Option<f64> {
    path.values()
        .iter()
        .zip(&path.regulator_increments)
        .position(|(&x, &push)| x <= TOL_X || push > 0.0)
        .map(|i| path.times()[i])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(r: f64, x0: f64) -> ModelParams {
        ModelParams::new(r, x0, 2.0).with_dt(1e-3)
    }

    #[test]
    fn drift_only_for_the_drifted_kind() {
        for kind in ProcessKind::ALL {
            let d = kind.drift(4.0);
            if kind == ProcessKind::DriftedReflected {
                assert_eq!(d, -4.0);
            } else {
                assert_eq!(d, 0.0);
            }
        }
    }

    #[test]
    fn reproducible_bit_for_bit() {
        for kind in ProcessKind::ALL {
            let a = simulate(kind, &p(1.5, 0.3), RngStreamSpec::new(11, 4)).unwrap();
            let b = simulate(kind, &p(1.5, 0.3), RngStreamSpec::new(11, 4)).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn reflected_paths_satisfy_invariants() {
        for kind in [
            ProcessKind::ReflectedBM,
            ProcessKind::ReflectedResetting,
            ProcessKind::DriftedReflected,
        ] {
            for s in 0..5 {
                let q = p(2.0, 0.1);
                let a = simulate(kind, &q, RngStreamSpec::new(2, s)).unwrap();
                a.check(q.horizon, q.dt, true).unwrap();
                assert_eq!(*a.times().last().unwrap(), q.horizon);
            }
        }
    }

    #[test]
    fn resets_land_on_the_origin() {
        let q = p(5.0, 1.0);
        let a = simulate(
            ProcessKind::ReflectedResetting,
            &q,
            RngStreamSpec::new(8, 0),
        )
        .unwrap();
        let ev = &a.path.events;
        assert!(!ev.reset_times.is_empty());
        for &tr in &ev.reset_times {
            let i = a
                .times()
                .iter()
                .position(|&t| t == tr)
                .expect("reset time on grid");
            assert_eq!(a.values()[i], 0.0);
        }
    }

    #[test]
    fn free_resetting_returns_to_reset_point() {
        let mut q = p(5.0, 1.0);
        q.x_r = -0.5;
        let a = simulate(ProcessKind::FreeResetting, &q, RngStreamSpec::new(8, 1)).unwrap();
        for &tr in &a.path.events.reset_times {
            let i = a.times().iter().position(|&t| t == tr).unwrap();
            assert_eq!(a.values()[i], -0.5);
        }
        assert!(a.local_time.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn zero_rate_collapses_pathwise() {
        let spec = RngStreamSpec::new(21, 3);
        let a = simulate(ProcessKind::ReflectedResetting, &p(0.0, 0.4), spec).unwrap();
        let b = simulate(ProcessKind::ReflectedBM, &p(0.0, 0.4), spec).unwrap();
        assert_eq!(a, b);
        let c = simulate(ProcessKind::DriftedReflected, &p(0.0, 0.4), spec).unwrap();
        assert_eq!(a, c);
        let d = simulate(ProcessKind::FreeResetting, &p(0.0, 0.4), spec).unwrap();
        let e = simulate(ProcessKind::FreeBM, &p(0.0, 0.4), spec).unwrap();
        assert_eq!(d, e);
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        let bad = ModelParams::new(-1.0, 0.0, 1.0);
        assert!(simulate(
            ProcessKind::ReflectedResetting,
            &bad,
            RngStreamSpec::new(1, 0)
        )
        .is_err());
        let neg = ModelParams::new(1.0, -0.5, 1.0);
        assert!(simulate(ProcessKind::ReflectedBM, &neg, RngStreamSpec::new(1, 0)).is_err());
        assert!(simulate(ProcessKind::FreeBM, &neg, RngStreamSpec::new(1, 0)).is_ok());
    }

    #[test]
    fn occupation_of_a_path_away_from_zero_is_zero() {
        let path = AugmentedPath {
            path: SamplePath {
                times: vec![0.0, 0.5, 1.0],
                values: vec![1.0, 2.0, 1.5],
                events: EventLog::default(),
            },
            local_time: vec![0.0; 3],
            regulator_increments: vec![0.0; 3],
        };
        assert_eq!(local_time_occupation(&path, 0.1).unwrap(), vec![0.0; 3]);
        assert!(local_time_occupation(&path, 0.0).is_err());
        assert_eq!(first_hitting_time(&path), None);
    }

    #[test]
    fn hitting_time_from_the_origin_is_zero() {
        let a = simulate(
            ProcessKind::DriftedReflected,
            &p(1.0, 0.0),
            RngStreamSpec::new(1, 0),
        )
        .unwrap();
        assert_eq!(first_hitting_time(&a), Some(0.0));
    }

    #[test]
    fn local_time_is_flat_away_from_zero() {
        let q = p(1.0, 0.0);
        let a = simulate(
            ProcessKind::ReflectedResetting,
            &q,
            RngStreamSpec::new(4, 4),
        )
        .unwrap();
        let reach = 8.0 * (2.0 * q.dt).sqrt();
        for i in 1..a.local_time.len() {
            if a.local_time[i] > a.local_time[i - 1] {
                assert!(a.values()[i - 1].min(a.values()[i]) <= reach);
            }
        }
    }
}
