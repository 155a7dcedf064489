//! Resumable stepper shared by every Monte Carlo routine.
//!
//! Reflection uses the Skorokhod map applied to each step. Under the default
//! [`Scheme::Bridge`] the minimum of the Brownian bridge across the step is
//! sampled exactly, so position and regulator are exact in law at every grid
//! time for any step size. [`Scheme::Clamp`] only looks at the step endpoint
//! and underestimates the regulator by `O(√dt)`.

use std::ops::ControlFlow;

use rand::Rng;
use rand_distr::{Exp1, Open01, StandardNormal};

use super::ProcessKind;
use crate::params::ModelParams;
use crate::rng::{Domain, RngStreamSpec, StreamRng};

/// Per-step reflection rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    #[default]
    Bridge,
    Clamp,
}

/// Receives every grid point produced by an [`Engine`].
pub trait Observer {
    /// `push` is the regulator increment of the step that ended at `t`.
    fn step(&mut self, t: f64, x: f64, ell: f64, push: f64) -> ControlFlow<()>;

    /// Called at a reset time with the pre-reset position and the local time
    /// so far, just before the post-reset grid point is passed to
    /// [`step`](Self::step).
    fn reset(&mut self, _t: f64, _pre: f64, _ell: f64) {}
}

/// Bridge-minimum sampling is skipped when the crossing probability
/// `e^{-xy/h}` is below `e^{-CROSS_CUTOFF}`.
const CROSS_CUTOFF: f64 = 40.0;

pub struct Engine {
    reflected: bool,
    scheme: Scheme,
    drift: f64,
    dt: f64,
    scale: f64,
    rate: f64,
    x_r: f64,
    rng: StreamRng,
    clock: Option<StreamRng>,
    k: u64,
    on_grid: bool,
    pub t: f64,
    pub x: f64,
    pub ell: f64,
    pub next_reset: f64,
}

impl Engine {
    pub fn new(kind: ProcessKind, p: &ModelParams, spec: RngStreamSpec) -> Self {
        Self::with_scheme(kind, p, spec, Scheme::default())
    }

    pub fn with_scheme(
        kind: ProcessKind,
        p: &ModelParams,
        spec: RngStreamSpec,
        scheme: Scheme,
    ) -> Self {
        let resets = kind.resets() && p.r > 0.0;
        let mut clock = resets.then(|| spec.derive_in(Domain::ResetClock));
        let next_reset = match clock.as_mut() {
            Some(c) => exponential(c, p.r),
            None => f64::INFINITY,
        };
        Self {
            reflected: kind.reflected(),
            scheme,
            drift: kind.drift(p.r),
            dt: p.dt,
            scale: (2.0 * p.dt).sqrt(),
            rate: p.r,
            x_r: p.x_r,
            rng: spec.derive(),
            clock,
            k: 0,
            on_grid: true,
            t: 0.0,
            x: p.x0,
            ell: 0.0,
            next_reset,
        }
    }

    /// Moves the process forward by `h`, returning the regulator push.
    #[inline]
    fn advance(&mut self, h: f64, full: bool) -> f64 {
        let z: f64 = self.rng.sample(StandardNormal);
        let scale = if full { self.scale } else { (2.0 * h).sqrt() };
        let dy = self.drift * h + scale * z;
        let y = self.x + dy;
        if !self.reflected {
            self.x = y;
            return 0.0;
        }
        let push = match self.scheme {
            Scheme::Clamp => (-y).max(0.0),
            Scheme::Bridge => {
                if y <= 0.0 || self.x * y < CROSS_CUTOFF * h {
                    let u: f64 = self.rng.sample(Open01);
                    let gap = self.x - y;
                    // Minimum of a bridge from x to y over time h (variance 2h).
                    let m = 0.5 * (self.x + y - (gap * gap - 4.0 * h * u.ln()).sqrt());
                    (-m).max(0.0)
                } else {
                    0.0
                }
            }
        };
        self.x = y + push;
        self.ell += push;
        push
    }

    /// Runs until `t_end` or until the observer breaks. Returns `Break` in the
    /// latter case.
    pub fn run<O: Observer>(&mut self, t_end: f64, obs: &mut O) -> ControlFlow<()> {
        while self.t < t_end {
            let grid = (self.k + 1) as f64 * self.dt;
            let target = grid.min(t_end);
            if self.next_reset < target {
                let h = self.next_reset - self.t;
                let push = if h > 0.0 { self.advance(h, false) } else { 0.0 };
                self.t = self.next_reset;
                self.on_grid = false;
                let pre = self.x;
                self.x = self.x_r;
                if let Some(c) = self.clock.as_mut() {
                    self.next_reset = self.t + exponential(c, self.rate);
                }
                obs.reset(self.t, pre, self.ell);
                obs.step(self.t, self.x, self.ell, push)?;
            } else {
                let full = self.on_grid && target == grid;
                let push = self.advance(target - self.t, full);
                self.t = target;
                self.on_grid = target == grid;
                if self.on_grid {
                    self.k += 1;
                }
                obs.step(self.t, self.x, self.ell, push)?;
            }
        }
        ControlFlow::Continue(())
    }

    /// The Brownian stream of this engine.
    pub fn rng(&mut self) -> &mut StreamRng {
        &mut self.rng
    }
}

#[inline]
pub(crate) fn exponential(rng: &mut StreamRng, rate: f64) -> f64 {
    let e: f64 = rng.sample(Exp1);
    e / rate
}

/// Observer that ignores everything.
pub struct Quiet;

impl Observer for Quiet {
    fn step(&mut self, _: f64, _: f64, _: f64, _: f64) -> ControlFlow<()> {
        ControlFlow::Continue(())
    }
}

/// Stops at the first grid time where the local time reaches `level`.
pub struct LevelCrossing {
    pub level: f64,
    pub hit: Option<f64>,
}

impl Observer for LevelCrossing {
    fn step(&mut self, t: f64, _: f64, ell: f64, _: f64) -> ControlFlow<()> {
        if ell >= self.level {
            self.hit = Some(t);
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    }
}
