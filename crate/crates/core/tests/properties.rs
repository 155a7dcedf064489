use proptest::prelude::*;
use statrs::function::erf::erf;

use resetting_core::analytic::{
    phi, resetting_density_reflected, stationary_density_halfline, ExponentKind, LaplaceExponent,
};
use resetting_core::pde::{solve_resetting_neumann, FDGrid};
use resetting_core::quad::Quadrature;
use resetting_core::reversal::{build_x_tilde, sample_subordinator_psi, SubordinatorPath};
use resetting_core::rng::Domain;
use resetting_core::simulate::{
    reset_counts, simulate, terminal_samples_with, ProcessKind, Scheme,
};
use resetting_core::stats::{ks_statistic, mean_se, EmpiricalDistribution};
use resetting_core::trace::trace_cf_target;
use resetting_core::{ModelParams, RngStreamSpec};

const TOL_X: f64 = 1e-12;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn reflected_paths_stay_on_the_half_line(
        r in 0.0f64..5.0, x0 in 0.0f64..3.0, seed in any::<u64>(), drifted in any::<bool>()
    ) {
        let kind = if drifted { ProcessKind::DriftedReflected } else { ProcessKind::ReflectedResetting };
        let p = ModelParams::new(r, x0, 0.5).with_dt(1e-3);
        let a = simulate(kind, &p, RngStreamSpec::new(seed, 0)).unwrap();
        prop_assert!(a.values().iter().all(|&x| x >= 0.0));
        prop_assert!(a.local_time.windows(2).all(|w| w[1] >= w[0]));
        prop_assert!(a.check(p.horizon, p.dt, true).is_ok());
    }

    #[test]
    fn resets_drop_to_the_origin(r in 0.5f64..8.0, x0 in 0.0f64..2.0, seed in any::<u64>()) {
        let p = ModelParams::new(r, x0, 1.0).with_dt(1e-3);
        let a = simulate(ProcessKind::ReflectedResetting, &p, RngStreamSpec::new(seed, 3)).unwrap();
        for &t in &a.path.events.reset_times {
            let k = a.times().iter().rposition(|&s| s == t).unwrap();
            prop_assert!(a.values()[k] <= TOL_X);
        }
    }

    #[test]
    fn zero_rate_collapses_for_every_stream(x0 in 0.0f64..2.0, seed in any::<u64>(), index in any::<u64>()) {
        let p = ModelParams::new(0.0, x0, 0.3).with_dt(1e-3);
        let spec = RngStreamSpec::new(seed, index);
        let b = simulate(ProcessKind::ReflectedBM, &p, spec).unwrap();
        let plus = simulate(ProcessKind::ReflectedResetting, &p, spec).unwrap();
        let tilde = build_x_tilde(&p, spec).unwrap();
        prop_assert_eq!(&plus.path.values, &b.path.values);
        prop_assert_eq!(&tilde.path.values, &b.path.values);
        let free = simulate(ProcessKind::FreeBM, &p, spec).unwrap();
        let free_r = simulate(ProcessKind::FreeResetting, &p, spec).unwrap();
        prop_assert_eq!(&free.path.values, &free_r.path.values);
    }

    #[test]
    fn simulation_is_reproducible(r in 0.0f64..4.0, seed in any::<u64>()) {
        let p = ModelParams::new(r, 0.3, 0.4).with_dt(1e-3);
        let spec = RngStreamSpec::new(seed, 9);
        let a = serde_json::to_string(&simulate(ProcessKind::ReflectedResetting, &p, spec).unwrap()).unwrap();
        let b = serde_json::to_string(&simulate(ProcessKind::ReflectedResetting, &p, spec).unwrap()).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn reversed_paths_are_consistent(r in 0.1f64..4.0, x0 in 0.0f64..2.0, seed in any::<u64>()) {
        let p = ModelParams::new(r, x0, 0.5).with_dt(1e-3);
        let path = build_x_tilde(&p, RngStreamSpec::new(seed, 1)).unwrap();
        prop_assert!(path.check(p.dt).is_ok());
        prop_assert!(path.path.values.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn subordinator_paths_round_trip(r in 0.1f64..5.0, horizon in 0.1f64..5.0, seed in any::<u64>()) {
        let rng = RngStreamSpec::new(seed, 0).derive_in(Domain::Subordinator);
        let s = sample_subordinator_psi(r, horizon, rng).unwrap();
        let json = serde_json::to_string(&s).unwrap();
        let back: SubordinatorPath = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back, s);
    }

    #[test]
    fn trace_cf_is_the_exponent_of_the_square(xi in -20.0f64..20.0, t in 0.01f64..5.0, r in 0.0f64..10.0) {
        let want = if xi == 0.0 { 1.0 } else { (-t * phi(xi * xi, r).unwrap()).exp() };
        prop_assert_eq!(trace_cf_target(xi, t, r).unwrap(), want);
    }

    #[test]
    fn resetting_density_is_nonnegative(t in 0.01f64..5.0, x in 0.0f64..4.0, y in 0.0f64..8.0, r in 0.0f64..5.0) {
        prop_assert!(resetting_density_reflected(t, x, y, r).unwrap() >= 0.0);
    }

    #[test]
    fn exponents_are_monotone(a in 1e-3f64..1e3, b in 1e-3f64..1e3, r in 0.0f64..10.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        for kind in [ExponentKind::Phi, ExponentKind::Psi, ExponentKind::DriftedBM, ExponentKind::HalfStable] {
            let e = LaplaceExponent::new(kind, r);
            prop_assert!(e.value(lo) <= e.value(hi));
        }
    }
}

#[test]
fn stationary_density_integrates_to_one() {
    for r in [0.05, 0.5, 1.0, 9.0] {
        let m = Quadrature::default()
            .integrate_to_infinity(|y| stationary_density_halfline(y, r).unwrap(), 0.0)
            .unwrap();
        assert!((m - 1.0).abs() <= 1e-7, "r={r}: {m}");
    }
}

#[test]
fn reset_counts_are_poisson() {
    let (r, horizon, n) = (1.5, 2.0, 200_000);
    let p = ModelParams::new(r, 0.0, horizon);
    let k: Vec<f64> = reset_counts(&p, 17, n)
        .unwrap()
        .into_iter()
        .map(|k| k as f64)
        .collect();
    let (mean, se_mean) = mean_se(&k);
    let rt = r * horizon;
    assert!((mean - rt).abs() <= 3.0 * se_mean, "mean {mean} vs {rt}");
    let sq: Vec<f64> = k.iter().map(|&x| (x - rt) * (x - rt)).collect();
    let (var, se_var) = mean_se(&sq);
    assert!((var - rt).abs() <= 3.0 * se_var, "variance {var} vs {rt}");
}

#[test]
fn clamp_scheme_converges_in_the_step() {
    // Reflected motion from 0 with variance 2t: P(X_1 ≤ y) = erf(y/2).
    let cdf = |y: f64| if y <= 0.0 { 0.0 } else { erf(y / 2.0) };
    let mut last = f64::INFINITY;
    for dt in [1e-2, 1e-3, 1e-4] {
        let p = ModelParams::new(0.0, 0.0, 1.0).with_dt(dt);
        let x =
            terminal_samples_with(ProcessKind::ReflectedBM, &p, 3, 20_000, Scheme::Clamp).unwrap();
        let d = ks_statistic(&EmpiricalDistribution::new(x).unwrap().sorted(), cdf);
        assert!(d < last, "dt={dt}: D={d} not below {last}");
        last = d;
    }
}

#[test]
fn neumann_solver_converges_under_refinement() {
    let (r, t) = (1.0, 0.5);
    let f = |y: f64| (-y).exp();
    let q = Quadrature::default();
    let base = FDGrid::for_problem(r, t).unwrap();
    let mut last = f64::INFINITY;
    for k in [4usize, 2, 1] {
        let g = FDGrid::new(base.x_max, (base.nx - 1) / k + 1, base.nt / k, t).unwrap();
        let s = solve_resetting_neumann(&f, r, &g).unwrap();
        let mut worst = 0.0f64;
        for i in (0..g.nx).step_by((g.nx / 40).max(1)) {
            let x = g.x(i);
            if x > 4.0 {
                break;
            }
            let exact = q
                .integrate_to_infinity(
                    |y| f(y) * resetting_density_reflected(t, x, y, r).unwrap(),
                    0.0,
                )
                .unwrap();
            worst = worst.max((s.u[g.nt][i] - exact).abs());
        }
        assert!(worst < last, "refinement {k}: {worst} not below {last}");
        last = worst;
    }
    assert!(last <= 1e-4);
}
