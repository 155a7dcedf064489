use super::{march, solve_with, FDGrid, Problem, SolverOptions};
use crate::analytic::{resolvent_full, resolvent_resetting};
use crate::error::{domain, Result};
use crate::params::ModelParams;
use crate::reversal::{x_tilde_pairs, Start};
use crate::simulate::{terminal_samples, ProcessKind};
use crate::stats::{mean_se, VerificationReport};

/// Sup over nodes in `[0, min(5, x_max/2)]` of the difference between the
/// time Laplace transform of the finite-difference solution and the analytic
/// resolvent. The time integral treats `u` as linear between grid times and
/// adds `e^{-λ t_max} u(t_max, x)/λ` for the remainder.
pub fn resolvent_consistency_check<F>(
    problem: Problem,
    f: &F,
    lambda: f64,
    r: f64,
    grid: &FDGrid,
    tolerance: f64,
) -> Result<VerificationReport>
where
    F: Fn(f64) -> f64,
{
    if !(lambda > 0.0) {
        return Err(domain("lambda must be > 0", lambda));
    }
    // Weights integrating e^{-λt} exactly against the piecewise linear
    // interpolant of u in time.
    let q = lambda * grid.dt();
    let em = (-q).exp();
    let left = (1.0 - (-(-q).exp_m1()) / q) / lambda;
    let right = ((-(-q).exp_m1()) / q - em) / lambda;
    let mut acc = vec![0.0; grid.nx];
    let mut last = Vec::new();
    march(problem, f, r, grid, SolverOptions::default(), |n, u| {
        let mut w = 0.0;
        if n < grid.nt {
            w += left;
        }
        if n > 0 {
            w += right / em;
        }
        let e = w * (-lambda * grid.t(n)).exp();
        for (a, v) in acc.iter_mut().zip(u) {
            *a += e * v;
        }
        if n == grid.nt {
            last = u.to_vec();
        }
    })?;
    let tail = (-lambda * grid.t_max).exp() / lambda;
    let reach = (0.5 * grid.x_max).min(5.0);
    let stride = ((reach / grid.dx()) as usize / 50).max(1);
    let mut worst = 0.0f64;
    let mut i = 0;
    while grid.x(i) <= reach {
        let x = grid.x(i);
        let exact = match problem {
            Problem::Neumann => resolvent_resetting(f, x, lambda, r)?,
            Problem::Nlbvp => resolvent_full(f, x, lambda, r)?,
        };
        worst = worst.max((acc[i] + tail * last[i] - exact).abs());
        i += stride;
    }
    let mut report = VerificationReport::at_most(
        format!("resolvent {problem:?} r={r} λ={lambda}"),
        worst,
        tolerance,
    );
    if (-lambda * grid.t_max).exp() > 1e-6 {
        report = report.with_note("time horizon short: e^{-λ t_max} > 1e-6, tail extrapolated");
    }
    Ok(report)
}

/// `max_t |∫u(t,·)dμ⁺ − ∫f dμ⁺|` for the finite-difference solution, with
/// the trapezoid rule on the grid and a flat tail beyond `x_max`.
pub fn stationary_mass_drift<F>(problem: Problem, f: &F, r: f64, grid: &FDGrid) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(r > 0.0) {
        return Err(domain("μ⁺ needs r > 0", r));
    }
    let s = r.sqrt();
    let h = grid.dx();
    let weights: Vec<f64> = (0..grid.nx)
        .map(|i| {
            let w = if i == 0 || i == grid.nx - 1 {
                0.5 * h
            } else {
                h
            };
            let mut m = w * s * (-s * grid.x(i)).exp();
            if i == grid.nx - 1 {
                m += (-s * grid.x_max).exp();
            }
            m
        })
        .collect();
    let mut first = None;
    let mut worst = 0.0f64;
    march(problem, f, r, grid, SolverOptions::default(), |_, u| {
        let m: f64 = weights.iter().zip(u).map(|(w, v)| w * v).sum();
        let m0 = *first.get_or_insert(m);
        worst = worst.max((m - m0).abs());
    })?;
    Ok(worst)
}

/// Monte Carlo `E_x f(X_t)` with its standard error, where `X` is `X⁺` for
/// the Neumann problem and `X̃` for the non-local one.
#[allow(clippy::too_many_arguments)]
pub fn feynman_kac_mc<F>(
    problem: Problem,
    f: &F,
    r: f64,
    t: f64,
    x: f64,
    seed: u64,
    n: usize,
    dt: f64,
) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64 + Sync,
{
    let p = ModelParams::new(r, x, t).with_dt(dt.min(t / 2.0));
    let ends = match problem {
        Problem::Neumann => terminal_samples(ProcessKind::ReflectedResetting, &p, seed, n)?,
        Problem::Nlbvp => x_tilde_pairs(&p, seed, t, Start::Fixed(x), n)?.end,
    };
    let v: Vec<f64> = ends.into_iter().map(f).collect();
    Ok(mean_se(&v))
}

/// Finite differences against Monte Carlo at `(t, x)` points; each passes
/// within three standard errors plus `fd_budget`.
#[allow(clippy::too_many_arguments)]
pub fn fd_mc_cross_check<F>(
    problem: Problem,
    f: &F,
    r: f64,
    grid: &FDGrid,
    points: &[(f64, f64)],
    seed: u64,
    n: usize,
    dt: f64,
    fd_budget: f64,
) -> Result<Vec<VerificationReport>>
where
    F: Fn(f64) -> f64 + Sync,
{
    let sol = solve_with(problem, f, r, grid, SolverOptions::default())?;
    points
        .iter()
        .enumerate()
        .map(|(k, &(t, x))| {
            let fd = sol.at(t, x)?;
            let (mc, se) = feynman_kac_mc(problem, f, r, t, x, seed.wrapping_add(k as u64), n, dt)?;
            Ok(VerificationReport::within(
                format!("fd vs mc {problem:?} r={r} t={t} x={x}"),
                fd,
                mc,
                3.0 * se + fd_budget,
            )
            .with_provenance(n, seed.wrapping_add(k as u64), Some(dt))
            .with_note(format!("se = {se:.3e}")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn expneg(y: f64) -> f64 {
        (-y).exp()
    }

    #[test]
    fn resolvent_of_constant() {
        let g = FDGrid::new(12.0, 301, 2000, 8.0).unwrap();
        for p in [Problem::Neumann, Problem::Nlbvp] {
            let rep = resolvent_consistency_check(p, &|_| 1.0, 2.0, 1.0, &g, 1e-9).unwrap();
            assert!(rep.passed, "{rep:?}");
        }
    }

    #[test]
    fn resolvent_of_decaying_data() {
        let g = FDGrid::for_problem(1.0, 8.0).unwrap();
        for p in [Problem::Neumann, Problem::Nlbvp] {
            let rep = resolvent_consistency_check(p, &expneg, 2.0, 1.0, &g, 1e-3).unwrap();
            assert!(rep.passed, "{rep:?}");
            assert!(rep.note.is_none());
        }
    }

    #[test]
    fn stationary_mass_is_conserved() {
        let g = FDGrid::for_problem(1.0, 2.0).unwrap();
        for p in [Problem::Neumann, Problem::Nlbvp] {
            let d = stationary_mass_drift(p, &expneg, 1.0, &g).unwrap();
            assert!(d <= 1e-4, "{p:?}: {d}");
        }
    }
}
