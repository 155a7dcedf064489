//! The reversed process `X̃ = B̃ + R^Ψ∘γ̃`.
//!
//! `B̃` is the reflected motion with drift `-2√r` and `γ̃` its regulator.
//! Jumps of `H^Ψ` are drawn lazily as `γ̃` grows, so the operational horizon
//! always covers `γ̃(T)`. A jump occupying `[a, b)` in the range of `H^Ψ` is
//! entered at the first grid time with `γ̃ ≥ a`; from then on `X̃` carries the
//! residual `b − γ̃` until `γ̃` passes `b`.

mod subordinator;

use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

pub use subordinator::{
    inverse_subordinator, remaining_lifetime, sample_subordinator_psi, PsiSampler, SubordinatorPath,
};

use crate::analytic::{inverse_local_time_laplace, ExponentKind, LaplaceExponent};
use crate::error::{domain, Result};
use crate::params::ModelParams;
use crate::path::{EventLog, SamplePath};
use crate::quad::integrate_to_infinity;
use crate::rng::{sub_seed, Domain, RngStreamSpec};
use crate::simulate::{
    completion_time, inverse_local_time_samples, par_paths, stationary_start, Censored, Engine,
    LevelCrossing, Observer, PairSample, ProcessKind, Quiet,
};
use crate::stats::{mean_se, VerificationReport, TARGET_SLACK};
use crate::TOL_X;

/// A jump of `H^Ψ` as met by `γ̃`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpEntry {
    /// Operational time of the jump, equal to the composed local time there.
    pub op_time: f64,
    pub size: f64,
    /// `b − γ̃` when the jump is entered; the visible jump of `X̃`.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy)]
struct Pending {
    u: f64,
    a: f64,
    b: f64,
    l: f64,
    entered: bool,
}

/// Evaluates `R^Ψ(γ)` and `L^Ψ(γ)` for nondecreasing `γ`.
pub(crate) struct Composer {
    sampler: PsiSampler,
    pending: Option<Pending>,
    passed: f64,
    drawn: f64,
    exhausted: bool,
    jumps: Vec<(f64, f64)>,
}

impl Composer {
    pub(crate) fn new(r: f64, spec: RngStreamSpec) -> Self {
        Self {
            sampler: PsiSampler::new(r, spec.derive_in(Domain::Subordinator)),
            pending: None,
            passed: 0.0,
            drawn: 0.0,
            exhausted: false,
            jumps: Vec::new(),
        }
    }

    /// Returns `(R(γ), L(γ))`; `enter` sees every jump whose interval `γ`
    /// has reached since the previous call.
    pub(crate) fn compose(&mut self, gamma: f64, mut enter: impl FnMut(JumpEntry)) -> (f64, f64) {
        loop {
            if self.pending.is_none() && !self.exhausted {
                match self.sampler.next_jump() {
                    Some((u, l)) => {
                        let a = u + self.drawn;
                        self.drawn += l;
                        self.jumps.push((u, l));
                        self.pending = Some(Pending {
                            u,
                            a,
                            b: a + l,
                            l,
                            entered: false,
                        });
                    }
                    None => self.exhausted = true,
                }
            }
            let Some(p) = self.pending.as_mut() else {
                return (0.0, gamma - self.passed);
            };
            if gamma < p.a {
                return (0.0, gamma - self.passed);
            }
            if !p.entered {
                p.entered = true;
                enter(JumpEntry {
                    op_time: p.u,
                    size: p.l,
                    residual: (p.b - gamma).max(0.0),
                });
            }
            if gamma < p.b {
                return (p.b - gamma, p.u);
            }
            self.passed += p.l;
            self.pending = None;
        }
    }

    /// `H^Ψ(x−)`: the regulator level at which `L^Ψ∘γ̃` reaches `x`.
    pub(crate) fn level_for(&mut self, x: f64) -> f64 {
        while !self.exhausted && self.jumps.last().is_none_or(|&(u, _)| u < x) {
            match self.sampler.next_jump() {
                Some((u, l)) => {
                    self.jumps.push((u, l));
                    self.drawn += l;
                }
                None => self.exhausted = true,
            }
        }
        x + self
            .jumps
            .iter()
            .take_while(|&&(u, _)| u < x)
            .map(|&(_, l)| l)
            .sum::<f64>()
    }
}

/// One simulated path of `X̃` with its ingredients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReversedPath {
    /// `X̃`; boundary jumps are logged as `(time, size)`.
    pub path: SamplePath,
    /// Regulator of `B̃` on the same grid.
    pub gamma_tilde: Vec<f64>,
    /// `H^Ψ` over operational time `[0, L^Ψ(γ̃_T)]`.
    pub subordinator: SubordinatorPath,
    /// `L^Ψ∘γ̃` on the same grid.
    pub composed_local_time: Vec<f64>,
}

impl ReversedPath {
    /// Structural checks: non-negativity, monotone local times, and boundary
    /// jumps only from near zero.
    pub fn check(&self, dt: f64) -> Result<()> {
        let bad = |what: &str| Err(crate::Error::OutOfRange(what.to_string()));
        let n = self.path.len();
        if self.gamma_tilde.len() != n || self.composed_local_time.len() != n {
            return bad("component lengths differ");
        }
        if self.path.values.iter().any(|&x| x < -TOL_X) {
            return bad("negative value");
        }
        let mono = |v: &[f64]| v.windows(2).all(|w| w[1] >= w[0]);
        if !mono(&self.gamma_tilde) || !mono(&self.composed_local_time) {
            return bad("local time decreases");
        }
        let reach = TOL_X + 8.0 * (2.0 * dt).sqrt();
        for &(t, size) in &self.path.events.boundary_jumps {
            let k = self.path.times.partition_point(|&s| s < t);
            if k >= n || self.path.times[k] != t {
                return bad("boundary jump off the grid");
            }
            if self.path.values[k] - size > reach {
                return bad("boundary jump from the interior");
            }
        }
        Ok(())
    }
}

struct Builder {
    comp: Composer,
    out: ReversedPath,
}

impl Observer for Builder {
    fn step(&mut self, t: f64, x: f64, gamma: f64, _: f64) -> ControlFlow<()> {
        let jumps = &mut self.out.path.events.boundary_jumps;
        let (rem, ell) = self.comp.compose(gamma, |j| {
            if j.residual > 0.0 {
                jumps.push((t, j.residual));
            }
        });
        self.out.path.times.push(t);
        self.out.path.values.push(x + rem);
        self.out.gamma_tilde.push(gamma);
        self.out.composed_local_time.push(ell);
        ControlFlow::Continue(())
    }
}

/// Simulates `X̃` on `[0, p.horizon]` from `p.x0`.
pub fn build_x_tilde(p: &ModelParams, spec: RngStreamSpec) -> Result<ReversedPath> {
    ProcessKind::DriftedReflected.validate(p)?;
    let mut b = Builder {
        comp: Composer::new(p.r, spec),
        out: ReversedPath {
            path: SamplePath {
                times: Vec::new(),
                values: Vec::new(),
                events: EventLog::default(),
            },
            gamma_tilde: Vec::new(),
            subordinator: SubordinatorPath::new(1.0, vec![], vec![], 1.0)?,
            composed_local_time: Vec::new(),
        },
    };
    let _ = b.step(0.0, p.x0, 0.0, 0.0);
    let mut e = Engine::new(ProcessKind::DriftedReflected, p, spec);
    let _ = e.run(p.horizon, &mut b);
    let op_end = b.out.composed_local_time.last().copied().unwrap_or(0.0);
    let horizon = op_end.max(f64::MIN_POSITIVE);
    let (times, sizes) = b
        .comp
        .jumps
        .iter()
        .filter(|&&(u, _)| u <= horizon)
        .copied()
        .unzip();
    b.out.subordinator = SubordinatorPath::new(1.0, times, sizes, horizon)?;
    Ok(b.out)
}

/// Where `X̃` starts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Start {
    Fixed(f64),
    /// Drawn from `μ⁺ = Exp(√r)`.
    Stationary,
}

fn start_point(start: Start, spec: RngStreamSpec, r: f64) -> f64 {
    match start {
        Start::Fixed(x) => x,
        Start::Stationary => stationary_start(spec, r),
    }
}

fn check_start(start: Start, r: f64) -> Result<()> {
    match start {
        Start::Stationary if !(r > 0.0) => Err(domain("a stationary start needs r > 0", r)),
        Start::Fixed(x) if !(x >= 0.0) => Err(domain("x0 must be ≥ 0", x)),
        _ => Ok(()),
    }
}

/// `(X̃_0, X̃_t)` for `n` paths.
pub fn x_tilde_pairs(
    p: &ModelParams,
    seed: u64,
    t: f64,
    start: Start,
    n: usize,
) -> Result<PairSample> {
    p.validate()?;
    check_start(start, p.r)?;
    if !(t >= 0.0) {
        return Err(domain("t must be ≥ 0", t));
    }
    let (start, end) = par_paths(n, |i| {
        let spec = RngStreamSpec::new(seed, i);
        let x0 = start_point(start, spec, p.r);
        if t == 0.0 {
            return (x0, x0);
        }
        let q = ModelParams {
            x0,
            horizon: t,
            ..*p
        };
        let mut e = Engine::new(ProcessKind::DriftedReflected, &q, spec);
        let _ = e.run(t, &mut Quiet);
        let (rem, _) = Composer::new(p.r, spec).compose(e.ell, |_| {});
        (x0, e.x + rem)
    })
    .into_iter()
    .unzip();
    Ok(PairSample { start, end })
}

/// First grid time at which `L^Ψ∘γ̃` reaches `level`, per path, from `p.x0`.
/// Paths short of the level at the horizon run on to four times the horizon;
/// when `r = 0` the remainder is then completed exactly, otherwise the path
/// is censored.
pub fn x_tilde_inverse_local_time_samples(
    p: &ModelParams,
    seed: u64,
    level: f64,
    n: usize,
) -> Result<Censored> {
    ProcessKind::DriftedReflected.validate(p)?;
    if !(level >= 0.0) {
        return Err(domain("level must be ≥ 0", level));
    }
    let per_path = par_paths(n, |i| {
        x_tilde_inverse_one(p, RngStreamSpec::new(seed, i), level)
    });
    Ok(Censored::collect(per_path))
}

pub(crate) fn x_tilde_inverse_one(
    p: &ModelParams,
    spec: RngStreamSpec,
    level: f64,
) -> (Option<f64>, bool) {
    if level == 0.0 {
        return (Some(0.0), false);
    }
    let target = Composer::new(p.r, spec).level_for(level);
    let mut e = Engine::new(ProcessKind::DriftedReflected, p, spec);
    let mut obs = LevelCrossing {
        level: target,
        hit: None,
    };
    for t_end in [p.horizon, 4.0 * p.horizon] {
        if e.run(t_end, &mut obs).is_break() {
            return (obs.hit, false);
        }
    }
    if p.r == 0.0 {
        (
            Some(e.t + completion_time(e.x + target - e.ell, spec)),
            true,
        )
    } else {
        (None, false)
    }
}

/// Boundary behaviour of `X̃` started at the origin.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BoundaryJumps {
    /// Visible jump sizes of `X̃` off zero.
    pub sizes: Vec<f64>,
    /// Composed local time gained between consecutive jumps.
    pub holding: Vec<f64>,
}

struct JumpLog {
    comp: Composer,
    want: usize,
    last_op: f64,
    out: BoundaryJumps,
}

impl Observer for JumpLog {
    fn step(&mut self, _: f64, _: f64, gamma: f64, _: f64) -> ControlFlow<()> {
        let out = &mut self.out;
        let last = &mut self.last_op;
        self.comp.compose(gamma, |j| {
            if j.residual > 0.0 {
                out.sizes.push(j.residual);
            }
            out.holding.push(j.op_time - *last);
            *last = j.op_time;
        });
        if out.holding.len() >= self.want {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    }
}

const JUMPS_PER_PATH: usize = 64;

/// Runs `X̃` from the origin until `n_jumps` jumps of `H^Ψ` have been met.
/// Jumps crossed within a single step leave no visible jump and contribute
/// only a holding sample.
pub fn boundary_jump_samples(p: &ModelParams, seed: u64, n_jumps: usize) -> Result<BoundaryJumps> {
    p.validate()?;
    if !(p.r > 0.0) {
        return Err(domain("boundary jumps need r > 0", p.r));
    }
    let q = ModelParams { x0: 0.0, ..*p };
    let paths = n_jumps.div_ceil(JUMPS_PER_PATH);
    let parts = par_paths(paths, |i| {
        let spec = RngStreamSpec::new(seed, i);
        let mut log = JumpLog {
            comp: Composer::new(q.r, spec),
            want: JUMPS_PER_PATH.min(n_jumps - i as usize * JUMPS_PER_PATH),
            last_op: 0.0,
            out: BoundaryJumps::default(),
        };
        let mut e = Engine::new(ProcessKind::DriftedReflected, &q, spec);
        let _ = e.run(f64::INFINITY, &mut log);
        log.out.holding.truncate(log.want);
        log.out
    });
    let mut out = BoundaryJumps::default();
    for part in parts {
        out.sizes.extend(part.sizes);
        out.holding.extend(part.holding);
    }
    Ok(out)
}

/// `E_{μ⁺}[f(X̃_t)]` against `∫ f dμ⁺`, within three standard errors.
pub fn x_tilde_marginal_check<F>(
    p: &ModelParams,
    seed: u64,
    t: f64,
    f: F,
    n: usize,
) -> Result<VerificationReport>
where
    F: Fn(f64) -> f64 + Sync,
{
    let pairs = x_tilde_pairs(p, seed, t, Start::Stationary, n)?;
    let s = p.sqrt_r();
    let target = integrate_to_infinity(|y| f(y) * s * (-s * y).exp(), 0.0)?;
    let values: Vec<f64> = pairs.end.iter().map(|&x| f(x)).collect();
    Ok(VerificationReport::three_sigma(
        format!("x_tilde_marginal r={} t={t}", p.r),
        &values,
        target,
    )
    .with_provenance(n, seed, Some(p.dt)))
}

/// `E[e^{-λτ}]` for the inverse local time at `level` of `X̃` (first report)
/// and of `X⁺` (second report), both against `e^{-level·Φ(λ)}`. Censored paths
/// count as `τ = ∞`; the note records how many there were.
pub fn composed_local_time_law_check(
    p: &ModelParams,
    seed: u64,
    level: f64,
    lambda: f64,
    n: usize,
) -> Result<Vec<VerificationReport>> {
    if !(lambda > 0.0) {
        return Err(domain("lambda must be > 0", lambda));
    }
    let phi = LaplaceExponent::new(ExponentKind::Phi, p.r);
    let target = inverse_local_time_laplace(&phi, lambda, level)?;
    let x_tilde = x_tilde_inverse_local_time_samples(p, seed, level, n)?;
    let q = ModelParams { x0: 0.0, ..*p };
    let x_plus = inverse_local_time_samples(
        ProcessKind::ReflectedResetting,
        &q,
        sub_seed(seed, 1),
        level,
        n,
    )?;
    let report = |name: &str, c: &Censored, seed: u64| {
        let mut v: Vec<f64> = c.samples.iter().map(|&t| (-lambda * t).exp()).collect();
        v.resize(v.len() + c.censored, 0.0);
        let (mean, se) = mean_se(&v);
        VerificationReport::within(
            format!("{name} inverse local time r={} x={level} λ={lambda}", p.r),
            mean,
            target,
            3.0 * se + TARGET_SLACK,
        )
        .with_provenance(n, seed, Some(p.dt))
        .with_note(format!("se = {se:.3e}, censored = {}", c.censored))
    };
    Ok(vec![
        report("x_tilde", &x_tilde, seed),
        report("x_plus", &x_plus, sub_seed(seed, 1)),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::simulate;

    fn params(r: f64, x0: f64, horizon: f64) -> ModelParams {
        ModelParams::new(r, x0, horizon).with_dt(1e-3)
    }

    #[test]
    fn composer_follows_the_subordinator() {
        let spec = RngStreamSpec::new(3, 0);
        let mut c = Composer::new(2.0, spec);
        let mut entered = Vec::new();
        let grid: Vec<f64> = (0..4000).map(|k| k as f64 * 0.005).collect();
        let vals: Vec<(f64, f64)> = grid
            .iter()
            .map(|&g| c.compose(g, |j| entered.push(j)))
            .collect();
        let jumps = c.jumps.clone();
        let horizon = jumps.last().unwrap().0;
        let (times, sizes): (Vec<f64>, Vec<f64>) = jumps.into_iter().unzip();
        let s = SubordinatorPath::new(1.0, times, sizes, horizon).unwrap();
        for (&g, &(rem, ell)) in grid.iter().zip(&vals) {
            if g > s.range_end() {
                break;
            }
            assert!((rem - s.remaining_lifetime(g).unwrap()).abs() < 1e-12);
            assert!((ell - s.inverse(g).unwrap()).abs() < 1e-12);
        }
        assert!(!entered.is_empty());
    }

    #[test]
    fn level_for_matches_left_limit() {
        let spec = RngStreamSpec::new(8, 2);
        let mut c = Composer::new(1.0, spec);
        let h = c.level_for(2.5);
        let mut d = Composer::new(1.0, spec);
        let (_, ell_below) = d.compose(h - 1e-9, |_| {});
        let (_, ell_at) = d.compose(h, |_| {});
        assert!(ell_below < 2.5);
        assert!((ell_at - 2.5).abs() < 1e-9);
    }

    #[test]
    fn r_zero_is_reflected_bm() {
        let p = params(0.0, 0.3, 2.0);
        let spec = RngStreamSpec::new(12, 5);
        let xt = build_x_tilde(&p, spec).unwrap();
        let bp = simulate(ProcessKind::ReflectedBM, &p, spec).unwrap();
        assert_eq!(xt.path.values, bp.path.values);
        assert_eq!(xt.composed_local_time, bp.local_time);
        assert!(xt.path.events.boundary_jumps.is_empty());
    }

    #[test]
    fn built_paths_are_consistent() {
        let p = params(4.0, 0.0, 3.0);
        for i in 0..20 {
            let spec = RngStreamSpec::new(1, i);
            let xt = build_x_tilde(&p, spec).unwrap();
            xt.check(p.dt).unwrap();
            let b = simulate(ProcessKind::DriftedReflected, &p, spec).unwrap();
            assert_eq!(xt.gamma_tilde, b.local_time);
            let s = &xt.subordinator;
            for (k, &g) in xt.gamma_tilde.iter().enumerate() {
                let rem = s.remaining_lifetime(g).unwrap();
                assert!((xt.path.values[k] - rem - b.path.values[k]).abs() < 1e-12);
                assert!((xt.composed_local_time[k] - s.inverse(g).unwrap()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn increments_match_b_tilde_between_events() {
        let p = params(1.0, 0.5, 2.0);
        let spec = RngStreamSpec::new(2, 0);
        let xt = build_x_tilde(&p, spec).unwrap();
        let b = simulate(ProcessKind::DriftedReflected, &p, spec).unwrap();
        for k in 1..xt.path.len() {
            let flat = xt.composed_local_time[k] == xt.composed_local_time[k - 1]
                && xt.gamma_tilde[k] == xt.gamma_tilde[k - 1];
            if flat {
                let dx = xt.path.values[k] - xt.path.values[k - 1];
                let db = b.path.values[k] - b.path.values[k - 1];
                assert!((dx - db).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn composed_local_time_grows_only_at_zero() {
        let p = params(2.0, 0.0, 5.0);
        let xt = build_x_tilde(&p, RngStreamSpec::new(6, 1)).unwrap();
        let reach = TOL_X + 8.0 * (2.0 * p.dt).sqrt();
        let jumped: Vec<f64> = xt.path.events.boundary_jumps.iter().map(|j| j.0).collect();
        for k in 1..xt.path.len() {
            if xt.composed_local_time[k] > xt.composed_local_time[k - 1] {
                // Growth in a step that also entered a jump happened before it.
                let entered = jumped.contains(&xt.path.times[k]);
                assert!(
                    entered || xt.path.values[k] <= reach,
                    "grew at {}",
                    xt.path.values[k]
                );
            }
        }
    }

    #[test]
    fn pairs_and_levels_degenerate_cases() {
        let p = params(1.0, 0.0, 1.0);
        let z = x_tilde_pairs(&p, 1, 0.0, Start::Stationary, 10).unwrap();
        assert_eq!(z.start, z.end);
        assert!(x_tilde_pairs(&params(0.0, 0.0, 1.0), 1, 0.5, Start::Stationary, 2).is_err());
        let c = x_tilde_inverse_local_time_samples(&p, 1, 0.0, 5).unwrap();
        assert_eq!(c.samples, vec![0.0; 5]);
    }

    #[test]
    fn constant_function_marginal_is_exact() {
        let p = params(1.0, 0.0, 1.0);
        let r = x_tilde_marginal_check(&p, 4, 0.3, |_| 1.0, 200).unwrap();
        assert!(r.passed);
        assert!((r.statistic - 1.0).abs() == 0.0);
    }

    #[test]
    fn boundary_jumps_collect_exactly() {
        let p = params(4.0, 0.0, 1.0);
        let b = boundary_jump_samples(&p, 3, 300).unwrap();
        assert_eq!(b.holding.len(), 300);
        assert!(b.sizes.len() <= 300 && b.sizes.len() > 200);
        assert!(b.sizes.iter().chain(&b.holding).all(|&v| v > 0.0));
    }

    #[test]
    fn pairs_are_reproducible() {
        let p = params(2.0, 0.0, 1.0);
        let a = x_tilde_pairs(&p, 9, 0.4, Start::Stationary, 32).unwrap();
        let b = x_tilde_pairs(&p, 9, 0.4, Start::Stationary, 32).unwrap();
        assert_eq!(a, b);
    }
}
