//! Named groups of verification checks.

use std::str::FromStr;

use serde::Serialize;

use resetting_core::analytic::{
    bernstein_check, dn_symbol, hitting_time_laplace, k2_symbol_assembled,
    levy_khintchine_residual, phi, psi_phi_identity_check, stationary_cdf_halfline,
    tail_symbol_check, ExponentKind, LaplaceExponent,
};
use resetting_core::params::default_dt;
use resetting_core::pde::{
    fd_mc_cross_check, resolvent_consistency_check, solve_with, FDGrid, Problem, SolverOptions,
};
use resetting_core::reversal::{
    boundary_jump_samples, x_tilde_inverse_local_time_samples, x_tilde_marginal_check,
    x_tilde_pairs, Start,
};
use resetting_core::rng::sub_seed;
use resetting_core::simulate::{
    between_reset_samples, hitting_time_samples, inverse_local_time_samples, stationary_pairs,
    terminal_samples, Censored, ProcessKind,
};
use resetting_core::stats::{
    duality_two_point_test, empirical_char, ks_test, ks_two_sample, mean_se, Cellization,
    EmpiricalDistribution, VerificationReport, TARGET_SLACK,
};
use resetting_core::trace::{
    sample_trace, trace_cf_target, truncated_levy_trace_oracle, TraceKind,
};
use resetting_core::{Error, ModelParams, Result};

pub const ALPHA: f64 = 0.01;

/// A verification suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    /// Stationary law `μ⁺ = Exp(√r)` of `X⁺` and of `X̃`.
    Stationary,
    /// Laws of the inverse local times of `X⁺` and `X̃`.
    LocalTime,
    /// Laws between resets, boundary jumps of `X̃` and hitting times of `B̃`.
    Reversal,
    /// Two-point duality and the non-reversibility control.
    Duality,
    /// Finite differences against Monte Carlo and against the resolvents.
    Pde,
    /// Boundary traces against each other and their characteristic function.
    Trace,
    /// Closed-form identities.
    Identities,
    All,
}

impl Suite {
    pub const EACH: [Suite; 7] = [
        Suite::Identities,
        Suite::Stationary,
        Suite::LocalTime,
        Suite::Reversal,
        Suite::Duality,
        Suite::Pde,
        Suite::Trace,
    ];
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "stationary" => Suite::Stationary,
            "localtime" => Suite::LocalTime,
            "reversal" => Suite::Reversal,
            "duality" => Suite::Duality,
            "pde" => Suite::Pde,
            "trace" => Suite::Trace,
            "identities" => Suite::Identities,
            "all" => Suite::All,
            "" => return Err("empty suite name".into()),
            _ => {
                return Err(format!(
                    "unknown suite {s:?}; expected stationary, localtime, reversal, duality, pde, trace, identities or all"
                ))
            }
        })
    }
}

/// Shared settings of the suites.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuiteConfig {
    pub r: f64,
    pub paths: usize,
    pub seed: u64,
    /// Overrides the per-suite grid step.
    pub dt: Option<f64>,
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if !(self.r >= 0.0 && self.r.is_finite()) {
            errs.push(format!("r must be finite and ≥ 0 (got {})", self.r));
        }
        if self.paths < 100 {
            errs.push(format!("paths must be ≥ 100 (got {})", self.paths));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                errs.push(format!("dt must be > 0 (got {dt})"));
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParams(errs))
        }
    }

    /// Step for checks whose discretisation bias is visible.
    fn fine_dt(&self) -> f64 {
        self.dt.unwrap_or_else(|| default_dt(self.r))
    }

    /// Step for checks exact in law at grid times or with negligible bias.
    fn coarse_dt(&self) -> f64 {
        self.dt.unwrap_or(1e-3)
    }

    fn needs_resets(&self, what: &str) -> Result<()> {
        if self.r > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidParams(vec![format!(
                "the {what} suite needs r > 0"
            )]))
        }
    }
}

/// Runs `suite`. Deterministic given the configuration.
pub fn run_suite(suite: Suite, cfg: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    cfg.validate()?;
    match suite {
        Suite::Stationary => stationary(cfg),
        Suite::LocalTime => local_time(cfg),
        Suite::Reversal => reversal(cfg),
        Suite::Duality => duality(cfg),
        Suite::Pde => pde(cfg),
        Suite::Trace => trace(cfg),
        Suite::Identities => identities(cfg.r),
        Suite::All => {
            let mut out = Vec::new();
            for s in Suite::EACH {
                if cfg.r == 0.0 && matches!(s, Suite::Stationary | Suite::Reversal | Suite::Duality)
                {
                    continue;
                }
                out.extend(run_suite(s, cfg)?);
            }
            Ok(out)
        }
    }
}

fn exp_cdf(rate: f64) -> impl Fn(f64) -> f64 {
    move |x| if x <= 0.0 { 0.0 } else { -(-rate * x).exp_m1() }
}

fn ks_exp(
    name: String,
    samples: Vec<f64>,
    rate: f64,
    seed: u64,
    dt: f64,
) -> Result<VerificationReport> {
    let n = samples.len();
    Ok(ks_test(
        &name,
        &EmpiricalDistribution::new(samples)?,
        exp_cdf(rate),
        ALPHA,
    )?
    .with_provenance(n, seed, Some(dt)))
}

fn stationary(cfg: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    cfg.needs_resets("stationary")?;
    let (r, n, dt) = (cfg.r, cfg.paths, cfg.fine_dt());
    let rate = r.sqrt();
    let horizon = 20.0 / r.min(1.0);
    let p = ModelParams::new(r, 0.0, horizon).with_dt(dt);
    let s0 = sub_seed(cfg.seed, 0);
    let terminal = terminal_samples(ProcessKind::ReflectedResetting, &p, s0, n)?;
    let mut out = vec![ks_exp(
        format!("x_plus terminal from 0 r={r} T={horizon}"),
        terminal,
        rate,
        s0,
        dt,
    )?];

    let t = 1.0;
    let p = ModelParams::new(r, 0.0, t).with_dt(dt);
    let s1 = sub_seed(cfg.seed, 1);
    let pairs = stationary_pairs(&p, s1, t, n)?;
    out.push(ks_exp(
        format!("x_plus from stationary start r={r} t={t}"),
        pairs.end,
        rate,
        s1,
        dt,
    )?);

    let t = 0.5;
    let p = ModelParams::new(r, 0.0, t).with_dt(dt);
    let s2 = sub_seed(cfg.seed, 2);
    let pairs = x_tilde_pairs(&p, s2, t, Start::Stationary, n)?;
    out.push(ks_exp(
        format!("x_tilde from stationary start r={r} t={t}"),
        pairs.end,
        rate,
        s2,
        dt,
    )?);
    let s3 = sub_seed(cfg.seed, 3);
    out.push(x_tilde_marginal_check(&p, s3, t, |y| (-y).exp(), n)?);
    Ok(out)
}

/// Level and transform arguments of the inverse local time checks.
pub const LOCAL_TIME_LEVEL: f64 = 0.5;
pub const LOCAL_TIME_LAMBDAS: [f64; 3] = [0.5, 1.0, 3.0];

/// `E e^{-λτ}` of censored first-passage samples, counting censored paths
/// as `τ = ∞`.
pub fn laplace_report(
    name: String,
    c: &Censored,
    lambda: f64,
    target: f64,
    seed: u64,
    dt: f64,
) -> VerificationReport {
    let mut v: Vec<f64> = c.samples.iter().map(|&t| (-lambda * t).exp()).collect();
    v.resize(v.len() + c.censored, 0.0);
    let (mean, se) = mean_se(&v);
    VerificationReport::within(name, mean, target, 3.0 * se + TARGET_SLACK)
        .with_provenance(v.len(), seed, Some(dt))
        .with_note(format!("se = {se:.3e}, censored = {}", c.censored))
}

fn local_time(cfg: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    let (r, n, dt, x) = (cfg.r, cfg.paths, cfg.fine_dt(), LOCAL_TIME_LEVEL);
    let p = ModelParams::new(r, 0.0, 5.0).with_dt(dt);
    let (sp, st) = (sub_seed(cfg.seed, 0), sub_seed(cfg.seed, 1));
    let plus = inverse_local_time_samples(ProcessKind::ReflectedResetting, &p, sp, x, n)?;
    let tilde = x_tilde_inverse_local_time_samples(&p, st, x, n)?;
    let exponent = LaplaceExponent::new(ExponentKind::Phi, r);
    let mut out = Vec::new();
    for lambda in LOCAL_TIME_LAMBDAS {
        let target = (-x * exponent.eval(lambda)?).exp();
        for (label, c, seed) in [("x_plus", &plus, sp), ("x_tilde", &tilde, st)] {
            out.push(laplace_report(
                format!("{label} inverse local time r={r} x={x} λ={lambda}"),
                c,
                lambda,
                target,
                seed,
                dt,
            ));
        }
    }
    let ks = ks_two_sample(
        &format!("x_plus vs x_tilde inverse local time r={r} x={x}"),
        &EmpiricalDistribution::new(plus.samples.clone())?,
        &EmpiricalDistribution::new(tilde.samples.clone())?,
        ALPHA,
    )?
    .with_provenance(n, cfg.seed, Some(dt))
    .with_note(format!("censored {} and {}", plus.censored, tilde.censored));
    out.push(ks);
    Ok(out)
}

fn reversal(cfg: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    cfg.needs_resets("reversal")?;
    let (r, n, dt) = (cfg.r, cfg.paths, cfg.coarse_dt());
    let rate = r.sqrt();
    let p = ModelParams::new(r, 0.0, 1.0).with_dt(dt);
    let s0 = sub_seed(cfg.seed, 0);
    let segments = between_reset_samples(&p, s0, n)?;
    let s1 = sub_seed(cfg.seed, 1);
    let jumps = boundary_jump_samples(&p, s1, n)?;
    let mut out = vec![
        ks_exp(
            format!("pre-reset positions r={r}"),
            segments.pre_reset,
            rate,
            s0,
            dt,
        )?,
        ks_exp(
            format!("local time between resets r={r}"),
            segments.local_times,
            rate,
            s0,
            dt,
        )?,
        ks_exp(
            format!("x_tilde boundary jump sizes r={r}"),
            jumps.sizes,
            rate,
            s1,
            dt,
        )?,
        ks_exp(
            format!("x_tilde holding local time r={r}"),
            jumps.holding,
            rate,
            s1,
            dt,
        )?,
    ];

    let (x, lambda) = (1.0, 3.0);
    let fine = cfg.fine_dt();
    let q = ModelParams::new(r, x, 10.0).with_dt(fine);
    let s2 = sub_seed(cfg.seed, 2);
    let hits = hitting_time_samples(ProcessKind::DriftedReflected, &q, s2, n)?;
    let v: Vec<f64> = hits
        .iter()
        .map(|h| h.map_or(0.0, |t| (-lambda * t).exp()))
        .collect();
    let target = hitting_time_laplace(lambda, x, r)?;
    out.push(
        VerificationReport::three_sigma(
            format!("b_tilde hitting time x={x} r={r} λ={lambda}"),
            &v,
            target,
        )
        .with_provenance(n, s2, Some(fine)),
    );
    Ok(out)
}

fn duality(cfg: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    cfg.needs_resets("duality")?;
    let t = 0.5;
    let p = ModelParams::new(cfg.r, 0.0, 1.0).with_dt(cfg.coarse_dt());
    let outcome = duality_two_point_test(&p, cfg.seed, t, Cellization::default(), cfg.paths)?;
    let control = outcome.control.clone();
    let note = format!("{}; must fail", control.note.clone().unwrap_or_default());
    Ok(vec![
        outcome.duality,
        control.expect_failure().with_note(note),
    ])
}

/// Evaluation points `(t, x)` of the Monte Carlo cross-check.
pub const PDE_POINTS: [(f64, f64); 3] = [(0.5, 0.2), (1.0, 0.5), (1.0, 1.0)];
pub const FD_BUDGET: f64 = 1e-3;

fn pde(cfg: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    let (r, n, dt) = (cfg.r, cfg.paths, cfg.coarse_dt());
    let f = |y: f64| (-y).exp();
    let grid = FDGrid::for_problem(r, 1.0)?;
    let long = FDGrid::for_problem(r, 8.0)?;
    let mut out = Vec::new();
    for (k, problem) in [Problem::Neumann, Problem::Nlbvp].into_iter().enumerate() {
        let seed = sub_seed(cfg.seed, k as u64);
        out.extend(fd_mc_cross_check(
            problem,
            &f,
            r,
            &grid,
            &PDE_POINTS,
            seed,
            n,
            dt,
            FD_BUDGET,
        )?);
        let sol = solve_with(problem, &f, r, &grid, SolverOptions::default())?;
        out.push(VerificationReport::at_most(
            format!("maximum principle {problem:?} r={r}"),
            sol.max_principle_excess(0.0, 1.0),
            1e-12,
        ));
        out.push(resolvent_consistency_check(
            problem, &f, 2.0, r, &long, 1e-3,
        )?);
    }
    Ok(out)
}

/// Frequencies of the characteristic function checks.
pub const TRACE_XIS: [f64; 3] = [0.5, 1.0, 2.0];

/// Real part of the empirical characteristic function of `values` against
/// `e^{-tΦ(ξ²)}`, and the imaginary part against 0, both within 3σ.
pub fn cf_reports(
    label: &str,
    values: &[f64],
    t: f64,
    r: f64,
    xis: &[f64],
    seed: u64,
    dt: f64,
) -> Result<Vec<VerificationReport>> {
    let emp = EmpiricalDistribution::new(values.to_vec())?;
    let mut out = Vec::new();
    for &xi in xis {
        let c = empirical_char(&emp, xi);
        let target = trace_cf_target(xi, t, r)?;
        let ok_im = c.mean.im.abs() <= 3.0 * c.se_im + TARGET_SLACK;
        let mut rep = VerificationReport::within(
            format!("{label} trace cf r={r} t={t} ξ={xi}"),
            c.mean.re,
            target,
            3.0 * c.se_re + TARGET_SLACK,
        )
        .with_provenance(values.len(), seed, Some(dt))
        .with_note(format!(
            "imaginary part {:.3e} ± {:.3e}",
            c.mean.im, c.se_im
        ));
        rep.passed &= ok_im;
        out.push(rep);
    }
    Ok(out)
}

fn trace(cfg: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    let (r, n, dt, t) = (cfg.r, cfg.paths, cfg.coarse_dt(), 1.0);
    let p = ModelParams::new(r, 0.0, 5.0).with_dt(dt);
    let (s1, s2, s3) = (
        sub_seed(cfg.seed, 0),
        sub_seed(cfg.seed, 1),
        sub_seed(cfg.seed, 2),
    );
    let t1 = sample_trace(TraceKind::T1, &p, s1, t, n)?;
    let mut out = cf_reports("T1", &t1.values, t, r, &TRACE_XIS, s1, dt)?;
    let oracle = truncated_levy_trace_oracle(r, t, 1e-6, s3, n)?;
    out.push(
        ks_two_sample(
            &format!("T1 vs subordinated oracle r={r} t={t}"),
            &EmpiricalDistribution::new(t1.values.clone())?,
            &EmpiricalDistribution::new(oracle)?,
            ALPHA,
        )?
        .with_provenance(n, cfg.seed, Some(dt)),
    );
    if r > 0.0 {
        let t2 = sample_trace(TraceKind::T2, &p, s2, t, n)?;
        out.extend(cf_reports("T2", &t2.values, t, r, &TRACE_XIS, s2, dt)?);
        out.push(
            ks_two_sample(
                &format!("T1 vs T2 r={r} t={t}"),
                &EmpiricalDistribution::new(t1.values)?,
                &EmpiricalDistribution::new(t2.values)?,
                ALPHA,
            )?
            .with_provenance(n, cfg.seed, Some(dt))
            .with_note(format!("censored {} and {}", t1.censored, t2.censored)),
        );
    }
    Ok(out)
}

fn log_grid(lo: f64, hi: f64, k: usize) -> impl Iterator<Item = f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..k).map(move |i| (a + (b - a) * i as f64 / (k - 1) as f64).exp())
}

/// Residual sweeps of the closed-form identities at `r`.
pub fn identities(r: f64) -> Result<Vec<VerificationReport>> {
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::InvalidParams(vec![format!(
            "r must be finite and ≥ 0 (got {r})"
        )]));
    }
    let mut out = Vec::new();
    let worst = log_grid(1e-3, 1e3, 50)
        .map(|l| psi_phi_identity_check(l, r))
        .fold(0.0, f64::max);
    out.push(VerificationReport::at_most(
        format!("psi after shift equals phi r={r}"),
        worst,
        1e-12,
    ));

    let kinds = [
        ExponentKind::Phi,
        ExponentKind::Psi,
        ExponentKind::DriftedBM,
    ];
    let lambdas = [0.1, 1.0, 10.0];
    let (mut lk, mut tail, mut bern) = (0.0f64, 0.0f64, true);
    for kind in kinds {
        let e = LaplaceExponent::new(kind, r);
        for l in lambdas {
            lk = lk.max(levy_khintchine_residual(&e, l)?);
            tail = tail.max(tail_symbol_check(&e, l)?);
        }
        bern &= log_grid(1e-2, 1e2, 20).all(|l| bernstein_check(&e, l).passed);
    }
    out.push(VerificationReport::at_most(
        format!("levy-khintchine residual r={r}"),
        lk,
        1e-6,
    ));
    out.push(VerificationReport::at_most(
        format!("tail-symbol residual r={r}"),
        tail,
        1e-6,
    ));
    out.push(VerificationReport::at_most(
        format!("bernstein sign pattern r={r}"),
        if bern { 0.0 } else { 1.0 },
        0.0,
    ));

    let mut k12 = 0.0f64;
    for i in 0..=80 {
        let xi = -10.0 + 0.25 * i as f64;
        k12 = k12.max((dn_symbol(xi, r) - k2_symbol_assembled(xi, r)?).abs());
    }
    out.push(VerificationReport::at_most(
        format!("K1 and K2 symbols agree r={r}"),
        k12,
        1e-10,
    ));

    let mut dn_phi = 0.0f64;
    for xi in log_grid(1e-2, 1e2, 30) {
        dn_phi = dn_phi.max((dn_symbol(xi, r) + phi(xi * xi, r)?).abs());
    }
    out.push(VerificationReport::at_most(
        format!("DN symbol equals -phi of square r={r}"),
        dn_phi,
        1e-12,
    ));

    if r > 0.0 {
        let cdf_mass = 1.0 - stationary_cdf_halfline(60.0 / r.sqrt(), r)?;
        out.push(VerificationReport::at_most(
            format!("stationary law has unit mass r={r}"),
            cdf_mass,
            1e-12,
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names() {
        assert_eq!("localtime".parse::<Suite>(), Ok(Suite::LocalTime));
        assert_eq!("all".parse::<Suite>(), Ok(Suite::All));
        assert!("".parse::<Suite>().is_err());
        assert!("everything".parse::<Suite>().is_err());
    }

    #[test]
    fn config_validation() {
        let ok = SuiteConfig {
            r: 1.0,
            paths: 100,
            seed: 0,
            dt: None,
        };
        assert!(ok.validate().is_ok());
        assert!(SuiteConfig { r: -1.0, ..ok }.validate().is_err());
        assert!(SuiteConfig { r: f64::NAN, ..ok }.validate().is_err());
        assert!(SuiteConfig { paths: 10, ..ok }.validate().is_err());
        assert!(SuiteConfig {
            dt: Some(0.0),
            ..ok
        }
        .validate()
        .is_err());
    }

    #[test]
    fn identities_hold_for_several_rates() {
        for r in [0.0, 0.5, 1.0, 4.0] {
            for rep in identities(r).unwrap() {
                assert!(rep.passed, "{rep:?}");
            }
        }
    }

    #[test]
    fn resetting_suites_reject_zero_rate() {
        let cfg = SuiteConfig {
            r: 0.0,
            paths: 100,
            seed: 0,
            dt: None,
        };
        assert!(run_suite(Suite::Duality, &cfg).is_err());
        assert!(run_suite(Suite::Stationary, &cfg).is_err());
    }

    #[test]
    fn log_grid_endpoints() {
        let g: Vec<f64> = log_grid(1e-2, 1e2, 5).collect();
        assert_eq!(g.len(), 5);
        assert!((g[0] - 1e-2).abs() < 1e-15 && (g[4] - 1e2).abs() < 1e-10);
        assert!((g[2] - 1.0).abs() < 1e-12);
    }
}
