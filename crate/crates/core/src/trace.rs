//! Boundary traces `T₁ = B∘(ℓ⁺)⁻¹` and `T₂ = B∘(ℓ̃)⁻¹` of the half-plane
//! processes, and an independent sampler of the subordinated law used to
//! cross-check them.
//!
//! The vertical component runs until its local time at zero reaches the
//! trace time; the horizontal Brownian motion, on its own stream, is then
//! read at that stopping time as `√(2τ)·Z`.

use rand::Rng;
use rand_distr::{Open01, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::analytic::{phi, LevyMeasure, MeasureKind};
use crate::error::{domain, Result};
use crate::params::ModelParams;
use crate::quad::Quadrature;
use crate::reversal::x_tilde_inverse_one;
use crate::rng::{Domain, RngStreamSpec};
use crate::simulate::{inverse_local_time_one, par_paths, ProcessKind};

/// Which vertical process drives the trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TraceKind {
    /// Vertical component `X⁺`.
    T1,
    /// Vertical component `X̃`.
    T2,
}

/// One boundary position at trace time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceSample {
    pub t: f64,
    pub value: f64,
    pub which: TraceKind,
}

/// Trace samples of many paths, with censoring counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSet {
    pub which: TraceKind,
    pub t: f64,
    pub values: Vec<f64>,
    /// Paths whose local time never reached `t`.
    pub censored: usize,
    /// Paths finished by the exact driftless completion.
    pub completed: usize,
}

impl TraceSet {
    pub fn samples(&self) -> impl Iterator<Item = TraceSample> + '_ {
        self.values.iter().map(|&value| TraceSample {
            t: self.t,
            value,
            which: self.which,
        })
    }
}

/// Samples `n` paths of the trace at time `t_trace`. The vertical process
/// starts from `p.x0`; its horizon is extended as in
/// [`crate::simulate::inverse_local_time_samples`].
pub fn sample_trace(
    which: TraceKind,
    p: &ModelParams,
    seed: u64,
    t_trace: f64,
    n: usize,
) -> Result<TraceSet> {
    if !(t_trace > 0.0) {
        return Err(domain("t_trace must be > 0", t_trace));
    }
    let kind = match which {
        TraceKind::T1 => ProcessKind::ReflectedResetting,
        TraceKind::T2 => ProcessKind::DriftedReflected,
    };
    kind.validate(p)?;
    let per_path = par_paths(n, |i| {
        let spec = RngStreamSpec::new(seed, i);
        let (tau, completed) = match which {
            TraceKind::T1 => inverse_local_time_one(kind, p, spec, t_trace),
            TraceKind::T2 => x_tilde_inverse_one(p, spec, t_trace),
        };
        let value = tau.map(|tau| {
            let z: f64 = spec.derive_in(Domain::Horizontal).sample(StandardNormal);
            (2.0 * tau).sqrt() * z
        });
        (value, completed)
    });
    let mut out = TraceSet {
        which,
        t: t_trace,
        values: Vec::with_capacity(n),
        censored: 0,
        completed: 0,
    };
    for (v, completed) in per_path {
        match v {
            Some(v) => out.values.push(v),
            None => out.censored += 1,
        }
        out.completed += completed as usize;
    }
    Ok(out)
}

/// `e^{-t Φ(ξ²)} = e^{-t ξ²/√(ξ²+r)}`, the characteristic function of the
/// trace at time `t`.
pub fn trace_cf_target(xi: f64, t_trace: f64, r: f64) -> Result<f64> {
    if !(t_trace > 0.0) {
        return Err(domain("t_trace must be > 0", t_trace));
    }
    if xi == 0.0 {
        return Ok(1.0);
    }
    Ok((-t_trace * phi(xi * xi, r)?).exp())
}

/// Largest admissible variance `t·∫₀^ε z² Π^Φ(dz)` of the jumps the oracle
/// replaces by their mean.
pub const ORACLE_SMALL_JUMP_VARIANCE: f64 = 1e-6;

/// Peak of `e^{-x}(2x+1)`, the ratio of `Π^Φ` to its `r = 0` form.
const THINNING_BOUND: f64 = 1.213_061_319_425_267; // 2 e^{-1/2}

/// `H^Φ_t` sampled as compound Poisson jumps of `Π^Φ` above `ε_cut` plus the
/// mean `t∫₀^ε z Π^Φ(dz)` of the jumps below. Jumps are proposed from the
/// `r = 0` measure `z^{-3/2}/(2√π)` and thinned.
pub fn oracle_subordinator_samples(
    r: f64,
    t_trace: f64,
    eps_cut: f64,
    seed: u64,
    n: usize,
) -> Result<Vec<f64>> {
    if !(r >= 0.0) {
        return Err(domain("r must be ≥ 0", r));
    }
    if !(t_trace > 0.0) {
        return Err(domain("t_trace must be > 0", t_trace));
    }
    if !(eps_cut > 0.0) {
        return Err(domain("eps_cut must be > 0", eps_cut));
    }
    let measure = LevyMeasure::new(MeasureKind::PiPhi, r);
    // z = v² keeps the integrands bounded at the origin.
    let second = Quadrature::with_abs_tol(1e-16).integrate(
        |v| 2.0 * v.powi(5) * measure.density(v * v),
        0.0,
        eps_cut.sqrt(),
    )?;
    if t_trace * second > ORACLE_SMALL_JUMP_VARIANCE {
        return Err(domain(
            "eps_cut too large: neglected small-jump variance",
            t_trace * second,
        ));
    }
    let drift = t_trace * measure.truncated_mean(eps_cut)?;
    let bound = if r > 0.0 { THINNING_BOUND } else { 1.0 };
    let rate = bound * t_trace / (std::f64::consts::PI * eps_cut).sqrt();
    Ok(par_paths(n, |i| {
        let mut rng = RngStreamSpec::new(seed, i).derive_in(Domain::Oracle);
        let count = poisson(rate, &mut rng);
        let mut h = drift;
        for _ in 0..count {
            let u: f64 = rng.sample(Open01);
            let z = eps_cut / (u * u);
            let keep = (-r * z).exp() * (2.0 * r * z + 1.0) / bound;
            let a: f64 = rng.sample(Open01);
            if a < keep {
                h += z;
            }
        }
        h
    }))
}

fn poisson(mean: f64, rng: &mut impl Rng) -> u64 {
    use rand_distr::{Distribution, Poisson};
    Poisson::new(mean)
        .map(|d| d.sample(rng) as u64)
        .unwrap_or(0)
}

/// The oracle trace: `√(2H)·Z` with `H` from [`oracle_subordinator_samples`].
pub fn truncated_levy_trace_oracle(
    r: f64,
    t_trace: f64,
    eps_cut: f64,
    seed: u64,
    n: usize,
) -> Result<Vec<f64>> {
    let h = oracle_subordinator_samples(r, t_trace, eps_cut, seed, n)?;
    Ok(h.into_iter()
        .enumerate()
        .map(|(i, h)| {
            let z: f64 = RngStreamSpec::new(seed, i as u64)
                .derive_in(Domain::Horizontal)
                .sample(StandardNormal);
            (2.0 * h).sqrt() * z
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{empirical_char, mean_se, EmpiricalDistribution};
    use num_complex::Complex64;

    #[test]
    fn cf_target_values() {
        assert_eq!(trace_cf_target(0.0, 1.0, 1.0).unwrap(), 1.0);
        for &xi in &[-2.0, 0.5, 3.0] {
            assert_eq!(
                trace_cf_target(xi, 1.5, 0.0).unwrap(),
                (-1.5 * f64::abs(xi)).exp()
            );
        }
        let v = trace_cf_target(3f64.sqrt(), 2.0, 1.0).unwrap();
        assert!((v - (-3.0f64).exp()).abs() < 1e-15);
        assert!(trace_cf_target(1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn cf_target_is_phi_of_square() {
        for &xi in &[0.2, 1.0, 4.0] {
            for &r in &[0.0, 0.5, 2.0] {
                let want = (-0.7 * phi(xi * xi, r).unwrap()).exp();
                assert_eq!(trace_cf_target(xi, 0.7, r).unwrap(), want);
            }
        }
    }

    #[test]
    fn oracle_rejects_coarse_cut() {
        assert!(oracle_subordinator_samples(1.0, 1.0, 0.1, 1, 10).is_err());
        assert!(oracle_subordinator_samples(1.0, 1.0, 0.0, 1, 10).is_err());
    }

    #[test]
    fn oracle_mean_matches_exponent_slope() {
        // E H_t = t Φ'(0) = t/√r.
        let (r, t) = (4.0, 1.0);
        let h = oracle_subordinator_samples(r, t, 1e-6, 3, 100_000).unwrap();
        let (m, se) = mean_se(&h);
        assert!((m - t / r.sqrt()).abs() <= 3.0 * se, "{m} ± {se}");
    }

    #[test]
    fn oracle_laplace_transform() {
        let (r, t, lambda) = (1.0, 1.0, 2.0);
        let h = oracle_subordinator_samples(r, t, 1e-6, 5, 100_000).unwrap();
        let v: Vec<f64> = h.iter().map(|x| (-lambda * x).exp()).collect();
        let (m, se) = mean_se(&v);
        let target = (-t * phi(lambda, r).unwrap()).exp();
        assert!((m - target).abs() <= 3.0 * se + 1e-6, "{m} vs {target}");
    }

    #[test]
    fn oracle_cauchy_case() {
        let x = truncated_levy_trace_oracle(0.0, 1.0, 1e-6, 2, 100_000).unwrap();
        let c = empirical_char(&EmpiricalDistribution::new(x).unwrap(), 1.0);
        assert!(c.agrees(Complex64::new((-1.0f64).exp(), 0.0), 3.0), "{c:?}");
    }

    #[test]
    fn trace_is_symmetric_and_reproducible() {
        let p = ModelParams::new(1.0, 0.0, 5.0).with_dt(1e-3);
        let a = sample_trace(TraceKind::T1, &p, 4, 0.3, 2000).unwrap();
        let b = sample_trace(TraceKind::T1, &p, 4, 0.3, 2000).unwrap();
        assert_eq!(a, b);
        let c = empirical_char(&EmpiricalDistribution::new(a.values.clone()).unwrap(), 1.0);
        assert!(c.mean.im.abs() <= 4.0 * c.se_im);
        assert_eq!(a.samples().count(), a.values.len());
    }

    #[test]
    fn cauchy_trace_at_r_zero() {
        let p = ModelParams::new(0.0, 0.0, 2.0).with_dt(1e-3);
        let s = sample_trace(TraceKind::T1, &p, 8, 1.0, 20_000).unwrap();
        assert_eq!(s.censored, 0);
        let c = empirical_char(&EmpiricalDistribution::new(s.values).unwrap(), 1.0);
        assert!(c.agrees(Complex64::new((-1.0f64).exp(), 0.0), 3.0), "{c:?}");
    }
}
