//! Many-path drivers. Path `i` uses stream index `i` of the master seed and
//! results come back in stream order whatever the thread count.

use std::ops::ControlFlow;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::engine::{exponential, Engine, LevelCrossing, Observer, Quiet, Scheme};
use super::ProcessKind;
use crate::error::{domain, Result};
use crate::params::ModelParams;
use crate::rng::{Domain, RngStreamSpec};
use crate::TOL_X;

/// Runs `f` for stream indices `0..n` in parallel, in order.
pub fn par_paths<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    (0..n as u64).into_par_iter().map(f).collect()
}

/// First-passage samples with the number of paths that never got there.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Censored {
    pub samples: Vec<f64>,
    /// Paths dropped because the level was not reached after extension.
    pub censored: usize,
    /// Paths finished by the exact driftless completion (only when `r = 0`).
    pub completed: usize,
}

/// Terminal values `X_T` of `n` independent paths.
pub fn terminal_samples(
    kind: ProcessKind,
    p: &ModelParams,
    seed: u64,
    n: usize,
) -> Result<Vec<f64>> {
    terminal_samples_with(kind, p, seed, n, Scheme::default())
}

/// As [`terminal_samples`] with an explicit reflection scheme.
///
/// For resetting kinds the reset clock is drawn first and only the stretch
/// after the last reset before `T` is simulated; the reset times, and hence
/// the law of `X_T`, are those of the full simulation.
pub fn terminal_samples_with(
    kind: ProcessKind,
    p: &ModelParams,
    seed: u64,
    n: usize,
    scheme: Scheme,
) -> Result<Vec<f64>> {
    kind.validate(p)?;
    Ok(par_paths(n, |i| {
        terminal_one(kind, p, RngStreamSpec::new(seed, i), scheme)
    }))
}

fn terminal_one(kind: ProcessKind, p: &ModelParams, spec: RngStreamSpec, scheme: Scheme) -> f64 {
    let (base, start, span) = if kind.resets() && p.r > 0.0 {
        let mut clock = spec.derive_in(Domain::ResetClock);
        let mut last = None;
        let mut t = exponential(&mut clock, p.r);
        while t < p.horizon {
            last = Some(t);
            t += exponential(&mut clock, p.r);
        }
        let base = if kind.reflected() {
            ProcessKind::ReflectedBM
        } else {
            ProcessKind::FreeBM
        };
        match last {
            Some(tl) => (base, p.x_r, p.horizon - tl),
            None => (base, p.x0, p.horizon),
        }
    } else {
        (kind, p.x0, p.horizon)
    };
    let q = ModelParams {
        x0: start,
        horizon: span,
        ..*p
    };
    let mut e = Engine::with_scheme(base, &q, spec, scheme);
    let _ = e.run(span, &mut Quiet);
    e.x
}

fn driftless_without_resets(kind: ProcessKind, r: f64) -> bool {
    kind.drift(r) == 0.0 && !(kind.resets() && r > 0.0)
}

/// First grid time at which the local time at zero reaches `level`, per
/// path. Paths still short of `level` at the horizon run on to four times
/// the horizon; if they are still short they are counted as censored, except
/// for driftless processes without resets, whose remaining passage time is
/// sampled exactly as a Lévy hitting time.
pub fn inverse_local_time_samples(
    kind: ProcessKind,
    p: &ModelParams,
    seed: u64,
    level: f64,
    n: usize,
) -> Result<Censored> {
    kind.validate(p)?;
    if !kind.reflected() {
        return Err(domain("inverse local time needs a reflected process", 0.0));
    }
    if !(level >= 0.0) {
        return Err(domain("level must be ≥ 0", level));
    }
    let per_path = par_paths(n, |i| {
        inverse_local_time_one(kind, p, RngStreamSpec::new(seed, i), level)
    });
    Ok(Censored::collect(per_path))
}

/// One path of [`inverse_local_time_samples`]: the hitting time, if any, and
/// whether it was completed exactly.
pub(crate) fn inverse_local_time_one(
    kind: ProcessKind,
    p: &ModelParams,
    spec: RngStreamSpec,
    level: f64,
) -> (Option<f64>, bool) {
    if level == 0.0 {
        return (Some(0.0), false);
    }
    let mut e = Engine::new(kind, p, spec);
    let mut obs = LevelCrossing { level, hit: None };
    for t_end in [p.horizon, 4.0 * p.horizon] {
        if e.run(t_end, &mut obs).is_break() {
            return (obs.hit, false);
        }
    }
    if driftless_without_resets(kind, p.r) {
        (Some(e.t + completion_time(e.x + level - e.ell, spec)), true)
    } else {
        (None, false)
    }
}

impl Censored {
    pub(crate) fn collect(per_path: Vec<(Option<f64>, bool)>) -> Self {
        let mut out = Censored::default();
        for (hit, completed) in per_path {
            match hit {
                Some(t) => out.samples.push(t),
                None => out.censored += 1,
            }
            out.completed += completed as usize;
        }
        out
    }
}

/// Time for `B` (variance `2t`) to travel distance `d`: `d²/(2Z²)`.
pub(crate) fn completion_time(d: f64, spec: RngStreamSpec) -> f64 {
    let z: f64 = spec.derive_in(Domain::Resample).sample(StandardNormal);
    d * d / (2.0 * z * z)
}

struct Hitting(Option<f64>);

impl Observer for Hitting {
    fn step(&mut self, t: f64, x: f64, _: f64, push: f64) -> ControlFlow<()> {
        if x <= TOL_X || push > 0.0 {
            self.0 = Some(t);
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    }
}

/// First time each path touches zero, or `None` within the horizon.
pub fn hitting_time_samples(
    kind: ProcessKind,
    p: &ModelParams,
    seed: u64,
    n: usize,
) -> Result<Vec<Option<f64>>> {
    kind.validate(p)?;
    Ok(par_paths(n, |i| {
        if p.x0 <= TOL_X {
            return Some(0.0);
        }
        let mut e = Engine::new(kind, p, RngStreamSpec::new(seed, i));
        let mut obs = Hitting(None);
        let _ = e.run(p.horizon, &mut obs);
        obs.0
    }))
}

/// Per-segment quantities of `X⁺` between consecutive resets.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BetweenResets {
    /// `X_{T_i-}`.
    pub pre_reset: Vec<f64>,
    /// Local time gained on `[T_{i-1}, T_i)`.
    pub local_times: Vec<f64>,
    /// `T_i − T_{i-1}`.
    pub gaps: Vec<f64>,
}

struct SegmentLog {
    want: usize,
    last_t: f64,
    last_ell: f64,
    out: BetweenResets,
}

impl Observer for SegmentLog {
    fn step(&mut self, _: f64, _: f64, _: f64, _: f64) -> ControlFlow<()> {
        if self.out.gaps.len() >= self.want {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    }

    fn reset(&mut self, t: f64, pre: f64, ell: f64) {
        self.out.pre_reset.push(pre);
        self.out.local_times.push(ell - self.last_ell);
        self.out.gaps.push(t - self.last_t);
        self.last_t = t;
        self.last_ell = ell;
    }
}

const RESETS_PER_PATH: usize = 64;

/// Collects `n_resets` segments of `X⁺` started at the origin, so that all
/// segments are identically distributed.
pub fn between_reset_samples(p: &ModelParams, seed: u64, n_resets: usize) -> Result<BetweenResets> {
    p.validate()?;
    if !(p.r > 0.0) {
        return Err(domain("resets need r > 0", p.r));
    }
    let q = ModelParams { x0: 0.0, ..*p };
    let paths = n_resets.div_ceil(RESETS_PER_PATH);
    let parts = par_paths(paths, |i| {
        let want = RESETS_PER_PATH.min(n_resets - i as usize * RESETS_PER_PATH);
        let mut e = Engine::new(
            ProcessKind::ReflectedResetting,
            &q,
            RngStreamSpec::new(seed, i),
        );
        let mut log = SegmentLog {
            want,
            last_t: 0.0,
            last_ell: 0.0,
            out: BetweenResets::default(),
        };
        let _ = e.run(f64::INFINITY, &mut log);
        log.out
    });
    let mut out = BetweenResets::default();
    for part in parts {
        out.pre_reset.extend(part.pre_reset);
        out.local_times.extend(part.local_times);
        out.gaps.extend(part.gaps);
    }
    Ok(out)
}

/// Pre-reset positions `X_{T_i-}` of `X⁺`.
pub fn pre_reset_position_samples(p: &ModelParams, seed: u64, n_resets: usize) -> Result<Vec<f64>> {
    Ok(between_reset_samples(p, seed, n_resets)?.pre_reset)
}

/// A starting point drawn from `μ⁺ = Exp(√r)` on the Initial stream.
pub(crate) fn stationary_start(spec: RngStreamSpec, r: f64) -> f64 {
    exponential(&mut spec.derive_in(Domain::Initial), r.sqrt())
}

/// Paired start and time-`t` positions of many paths.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PairSample {
    pub start: Vec<f64>,
    pub end: Vec<f64>,
}

impl PairSample {
    pub fn len(&self) -> usize {
        self.start.len()
    }

    pub fn is_empty(&self) -> bool {
        self.start.is_empty()
    }

    /// Swaps the two coordinates.
    pub fn transposed(self) -> Self {
        Self {
            start: self.end,
            end: self.start,
        }
    }
}

/// `(X⁺_0, X⁺_t)` with `X⁺_0 ~ μ⁺`, for `n` paths.
pub fn stationary_pairs(p: &ModelParams, seed: u64, t: f64, n: usize) -> Result<PairSample> {
    if !(p.r > 0.0) {
        return Err(domain("a stationary start needs r > 0", p.r));
    }
    if !(t >= 0.0) {
        return Err(domain("t must be ≥ 0", t));
    }
    p.validate()?;
    let (start, end) = par_paths(n, |i| {
        let spec = RngStreamSpec::new(seed, i);
        let x0 = stationary_start(spec, p.r);
        if t == 0.0 {
            return (x0, x0);
        }
        let q = ModelParams {
            x0,
            horizon: t,
            ..*p
        };
        (
            x0,
            terminal_one(ProcessKind::ReflectedResetting, &q, spec, Scheme::default()),
        )
    })
    .into_iter()
    .unzip();
    Ok(PairSample { start, end })
}

/// Number of resets in `[0, T]` for `n` paths.
pub fn reset_counts(p: &ModelParams, seed: u64, n: usize) -> Result<Vec<usize>> {
    p.validate_on_line()?;
    Ok(par_paths(n, |i| {
        if p.r == 0.0 {
            return 0;
        }
        let mut clock = RngStreamSpec::new(seed, i).derive_in(Domain::ResetClock);
        let mut t = exponential(&mut clock, p.r);
        let mut k = 0;
        while t < p.horizon {
            k += 1;
            t += exponential(&mut clock, p.r);
        }
        k
    }))
}
