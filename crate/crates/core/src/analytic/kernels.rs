use std::f64::consts::PI;

use crate::error::{domain, Result};
use crate::quad::Quadrature;

fn positive(what: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(domain(what, v))
    }
}

fn nonnegative(what: &'static str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(domain(what, v))
    }
}

pub(crate) fn g(t: f64, z: f64) -> f64 {
    (-z * z / (4.0 * t)).exp() / (4.0 * PI * t).sqrt()
}

/// `g(t, z) = e^{-z²/4t} / √(4πt)`, the transition density of `B`.
pub fn heat_kernel(t: f64, z: f64) -> Result<f64> {
    positive("t must be > 0", t)?;
    Ok(g(t, z))
}

/// `∫₀^∞ e^{-λt} g(t, x) dt = e^{-|x|√λ} / (2√λ)`.
pub fn heat_kernel_laplace(lambda: f64, x: f64) -> Result<f64> {
    positive("lambda must be > 0", lambda)?;
    let s = lambda.sqrt();
    Ok(0.5 * (-x.abs() * s).exp() / s)
}

/// `∫₀^∞ e^{-λt} (|x|/t) g(t, x) dt = e^{-|x|√λ}`.
pub fn first_passage_laplace_kernel(lambda: f64, x: f64) -> Result<f64> {
    positive("lambda must be > 0", lambda)?;
    Ok((-x.abs() * lambda.sqrt()).exp())
}

/// Transition density of `B⁺` by the method of images.
pub fn reflected_bm_density(t: f64, x: f64, y: f64) -> Result<f64> {
    positive("t must be > 0", t)?;
    nonnegative("x must be ≥ 0", x)?;
    nonnegative("y must be ≥ 0", y)?;
    Ok(g(t, x + y) + g(t, y - x))
}

/// `∫₀^t c·r e^{-rs} g(s, z) ds`, integrated in `v = √s` to remove the
/// `s^{-1/2}` singularity at `z = 0`.
fn reset_mass(t: f64, r: f64, z: f64, c: f64) -> Result<f64> {
    if r == 0.0 {
        return Ok(0.0);
    }
    let q = Quadrature::default();
    let z2 = z * z;
    let inner = q.integrate(
        |v: f64| {
            if v == 0.0 {
                return 0.0;
            }
            (-r * v * v - z2 / (4.0 * v * v)).exp()
        },
        0.0,
        t.sqrt(),
    )?;
    Ok(c * r * inner / PI.sqrt())
}

/// Density of the free process with resetting to `x_r` at rate `r`.
pub fn resetting_density_free(t: f64, x: f64, x_r: f64, y: f64, r: f64) -> Result<f64> {
    positive("t must be > 0", t)?;
    nonnegative("r must be ≥ 0", r)?;
    Ok((-r * t).exp() * g(t, y - x) + reset_mass(t, r, y - x_r, 1.0)?)
}

/// Density of `X⁺` (reflected, resetting to 0 at rate `r`).
pub fn resetting_density_reflected(t: f64, x: f64, y: f64, r: f64) -> Result<f64> {
    positive("t must be > 0", t)?;
    nonnegative("x must be ≥ 0", x)?;
    nonnegative("y must be ≥ 0", y)?;
    nonnegative("r must be ≥ 0", r)?;
    Ok((-r * t).exp() * (g(t, x + y) + g(t, y - x)) + reset_mass(t, r, y, 2.0)?)
}

/// `μ⁺(y) = √r e^{-√r y}`.
pub fn stationary_density_halfline(y: f64, r: f64) -> Result<f64> {
    positive("r must be > 0", r)?;
    nonnegative("y must be ≥ 0", y)?;
    let s = r.sqrt();
    Ok(s * (-s * y).exp())
}

pub fn stationary_cdf_halfline(y: f64, r: f64) -> Result<f64> {
    positive("r must be > 0", r)?;
    Ok(if y <= 0.0 {
        0.0
    } else {
        -(-r.sqrt() * y).exp_m1()
    })
}

/// Transition density of `B̃`, reflected at 0 with drift `-2√r`.
///
/// The improper integral is cut where its Gaussian factor drops below
/// `1e-16` of its peak.
pub fn drifted_reflected_density(t: f64, x: f64, y: f64, r: f64) -> Result<f64> {
    positive("t must be > 0", t)?;
    nonnegative("x must be ≥ 0", x)?;
    nonnegative("y must be ≥ 0", y)?;
    nonnegative("r must be ≥ 0", r)?;
    let sr = r.sqrt();
    let pre = -r * t + sr * (x - y);
    let a = x + y;
    let images = (pre - (y - x).powi(2) / (4.0 * t)).exp() + (pre - a * a / (4.0 * t)).exp();
    let images = images / (4.0 * PI * t).sqrt();
    if r == 0.0 {
        return Ok(images);
    }
    let peak = (2.0 * sr * t - a).max(0.0);
    let w_max = peak + (4.0 * t * 16.0 * std::f64::consts::LN_10).sqrt();
    let tail = Quadrature::default().integrate(
        |w| (pre + sr * w - (w + a).powi(2) / (4.0 * t)).exp(),
        0.0,
        w_max,
    )?;
    Ok(images + 2.0 * sr * tail / (4.0 * PI * t).sqrt())
}

/// Transition density of `B̃` killed at 0.
pub fn killed_drifted_density(t: f64, x: f64, y: f64, r: f64) -> Result<f64> {
    positive("t must be > 0", t)?;
    nonnegative("x must be ≥ 0", x)?;
    nonnegative("y must be ≥ 0", y)?;
    let pre = -r * t + r.sqrt() * (x - y);
    Ok(
        ((pre - (y - x).powi(2) / (4.0 * t)).exp() - (pre - (x + y).powi(2) / (4.0 * t)).exp())
            / (4.0 * PI * t).sqrt(),
    )
}

/// Laplace transform in `t` of the joint density of `(B̃_t, γ̃_t)` from 0.
pub fn joint_laplace_drift(lambda: f64, y: f64, w: f64, r: f64) -> Result<f64> {
    positive("lambda must be > 0", lambda)?;
    nonnegative("r must be ≥ 0", r)?;
    let sr = r.sqrt();
    let s = (lambda + r).sqrt();
    Ok((-sr * (y - w) - s * (y + w)).exp())
}

/// `E_x[e^{-λτ₀}] = e^{-x(√(λ+r) - √r)}` for `B̃`.
pub fn hitting_time_laplace(lambda: f64, x: f64, r: f64) -> Result<f64> {
    positive("lambda must be > 0", lambda)?;
    nonnegative("x must be ≥ 0", x)?;
    nonnegative("r must be ≥ 0", r)?;
    let k = lambda / ((lambda + r).sqrt() + r.sqrt());
    Ok((-x * k).exp())
}

/// `∫₀^∞ e^{√r w} g(t, w + a) dw` in closed form; used as an oracle.
#[cfg(test)]
pub(crate) fn drift_tail_closed(t: f64, a: f64, r: f64) -> f64 {
    use statrs::function::erf::erfc;
    let sr = r.sqrt();
    (-sr * a + r * t).exp() * 0.5 * erfc((a - 2.0 * sr * t) / (2.0 * t.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate, integrate_real_line, integrate_to_infinity};

    #[test]
    fn heat_kernel_at_origin() {
        let v = heat_kernel(1.0, 0.0).unwrap();
        assert!((v - 0.282_094_791_773_878_1).abs() < 1e-15);
        assert!(heat_kernel(0.0, 1.0).is_err());
        assert!(heat_kernel(-1.0, 1.0).is_err());
    }

    #[test]
    fn heat_kernel_is_even_and_normalised() {
        for &(t, z) in &[(0.3, 1.2), (2.0, -0.4), (5.0, 3.3)] {
            assert_eq!(heat_kernel(t, z).unwrap(), heat_kernel(t, -z).unwrap());
        }
        let m = integrate_real_line(|z| g(1.0, z)).unwrap();
        assert!((m - 1.0).abs() < 1e-10);
    }

    #[test]
    fn laplace_kernels_match_time_quadrature() {
        assert_eq!(heat_kernel_laplace(1.0, 0.0).unwrap(), 0.5);
        assert_eq!(heat_kernel_laplace(4.0, 0.0).unwrap(), 0.25);
        let lt = integrate_to_infinity(|t| if t > 0.0 { (-t).exp() * g(t, 2.0) } else { 0.0 }, 0.0)
            .unwrap();
        let closed = heat_kernel_laplace(1.0, 2.0).unwrap();
        assert!((lt - closed).abs() <= 1e-8 * closed);

        assert_eq!(first_passage_laplace_kernel(3.0, 0.0).unwrap(), 1.0);
        assert!(
            (first_passage_laplace_kernel(1.0, 1.0).unwrap() - 0.367_879_441_171_442_3).abs()
                < 1e-15
        );
        let x = 0.5;
        let lt = integrate_to_infinity(
            |t| {
                if t > 0.0 {
                    (-2.0 * t).exp() * x / t * g(t, x)
                } else {
                    0.0
                }
            },
            0.0,
        )
        .unwrap();
        let closed = first_passage_laplace_kernel(2.0, x).unwrap();
        assert!((lt - closed).abs() <= 1e-8 * closed);
        assert!(heat_kernel_laplace(0.0, 1.0).is_err());
    }

    #[test]
    fn reflected_density_values() {
        let v = reflected_bm_density(1.0, 0.0, 0.0).unwrap();
        assert!((v - 0.564_189_583_547_756_3).abs() < 1e-15);
        let m = integrate_to_infinity(|y| reflected_bm_density(1.0, 0.7, y).unwrap(), 0.0).unwrap();
        assert!((m - 1.0).abs() < 1e-9);
        assert_eq!(
            reflected_bm_density(0.8, 0.3, 1.1).unwrap(),
            reflected_bm_density(0.8, 1.1, 0.3).unwrap()
        );
        assert!(reflected_bm_density(1.0, -0.1, 0.0).is_err());
    }

    #[test]
    fn free_resetting_density() {
        assert_eq!(
            resetting_density_free(1.3, 0.2, 0.0, 0.9, 0.0).unwrap(),
            g(1.3, 0.7)
        );
        let m = integrate_real_line(|y| resetting_density_free(1.0, 0.3, 0.0, y, 2.0).unwrap())
            .unwrap();
        assert!((m - 1.0).abs() < 1e-8);
        // Long-time limit is the two-sided exponential around x_r = 0.
        let r: f64 = 2.0;
        for &y in &[-1.5, 0.0, 0.4, 2.0] {
            let v = resetting_density_free(30.0, 0.7, 0.0, y, r).unwrap();
            let lim = 0.5 * r.sqrt() * (-r.sqrt() * f64::abs(y)).exp();
            assert!((v - lim).abs() < 1e-9, "y={y}: {v} vs {lim}");
        }
    }

    #[test]
    fn reflected_resetting_density() {
        assert_eq!(
            resetting_density_reflected(0.7, 0.4, 1.0, 0.0).unwrap(),
            reflected_bm_density(0.7, 0.4, 1.0).unwrap()
        );
        let m = integrate_to_infinity(
            |y| resetting_density_reflected(2.0, 0.5, y, 1.0).unwrap(),
            0.0,
        )
        .unwrap();
        assert!((m - 1.0).abs() < 1e-8);
        let mut sup: f64 = 0.0;
        for i in 0..=500 {
            let y = 5.0 * i as f64 / 500.0;
            let d = resetting_density_reflected(10.0, 0.0, y, 2.0).unwrap()
                - stationary_density_halfline(y, 2.0).unwrap();
            sup = sup.max(d.abs());
        }
        assert!(sup <= 1e-6, "sup distance {sup}");
    }

    #[test]
    fn stationary_density_moments() {
        assert_eq!(stationary_density_halfline(0.0, 4.0).unwrap(), 2.0);
        let r = 3.0;
        let m = integrate_to_infinity(|y| stationary_density_halfline(y, r).unwrap(), 0.0).unwrap();
        assert!((m - 1.0).abs() < 1e-12);
        let mean =
            integrate_to_infinity(|y| y * stationary_density_halfline(y, r).unwrap(), 0.0).unwrap();
        assert!((mean - 1.0 / f64::sqrt(r)).abs() < 1e-10);
        assert!(stationary_density_halfline(1.0, 0.0).is_err());
    }

    #[test]
    fn drifted_density_matches_closed_tail_and_normalises() {
        assert_eq!(
            drifted_reflected_density(0.9, 0.3, 0.8, 0.0).unwrap(),
            reflected_bm_density(0.9, 0.3, 0.8).unwrap()
        );
        let (t, x, r) = (1.0, 0.5, 2.0);
        for &y in &[0.0, 0.1, 0.7, 2.5] {
            let sr = f64::sqrt(r);
            let closed = (-r * t + sr * (x - y)).exp()
                * (g(t, y - x) + g(t, y + x) + 2.0 * sr * drift_tail_closed(t, x + y, r));
            let v = drifted_reflected_density(t, x, y, r).unwrap();
            assert!((v - closed).abs() < 1e-10, "y={y}: {v} vs {closed}");
        }
        let m =
            integrate_to_infinity(|y| drifted_reflected_density(t, x, y, r).unwrap(), 0.0).unwrap();
        assert!((m - 1.0).abs() < 1e-7, "mass {m}");
    }

    #[test]
    fn drifted_density_tends_to_stationary_law_of_the_reversal() {
        // B̃ alone has stationary law 2√r e^{-2√r y}.
        let r: f64 = 1.0;
        for &y in &[0.0, 0.5, 1.5] {
            let v = drifted_reflected_density(40.0, 0.2, y, r).unwrap();
            let lim = 2.0 * r.sqrt() * (-2.0 * r.sqrt() * y).exp();
            assert!((v - lim).abs() < 1e-8);
        }
    }

    #[test]
    fn joint_laplace_marginals() {
        assert_eq!(joint_laplace_drift(2.0, 0.0, 0.0, 3.0).unwrap(), 1.0);
        let (lambda, r) = (3.0f64, 1.0f64);
        let s = (lambda + r).sqrt();
        let sr = r.sqrt();
        // Integrating out the local time level w.
        for &y in &[0.0, 0.4, 1.3] {
            let m = integrate_to_infinity(|w| joint_laplace_drift(lambda, y, w, r).unwrap(), 0.0)
                .unwrap();
            let closed = (-y * (s + sr)).exp() / (s - sr);
            assert!((m - closed).abs() < 1e-10 * closed.max(1.0));
        }
        // Integrating out the position y: e^{-w(s - √r)}/(s + √r).
        for &w in &[0.0, 0.5, 2.0] {
            let m = integrate_to_infinity(|y| joint_laplace_drift(lambda, y, w, r).unwrap(), 0.0)
                .unwrap();
            let closed = (-w * (s - sr)).exp() / (s + sr);
            assert!((m - closed).abs() < 1e-12);
            assert!((m - (-w).exp() / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn joint_laplace_is_transform_of_joint_density_marginal() {
        // ∫ e^{-λt} P_0(B̃_t ∈ dy)/dy dt against the w-marginal above.
        let (lambda, r, y) = (3.0f64, 1.0f64, 0.6f64);
        let lt = integrate_to_infinity(
            |t| {
                if t <= 0.0 {
                    return 0.0;
                }
                (-lambda * t).exp() * drifted_reflected_density(t, 0.0, y, r).unwrap()
            },
            0.0,
        )
        .unwrap();
        let s = (lambda + r).sqrt();
        let closed = (-y * (s + r.sqrt())).exp() / (s - r.sqrt());
        assert!((lt - closed).abs() <= 1e-8 * closed, "{lt} vs {closed}");
    }

    #[test]
    fn hitting_time_values() {
        assert_eq!(hitting_time_laplace(2.0, 0.0, 1.0).unwrap(), 1.0);
        assert!((hitting_time_laplace(3.0, 1.0, 1.0).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
        assert!(hitting_time_laplace(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn killed_density_mass_is_survival_probability() {
        // P_x(τ₀ > t) from the Laplace transform is awkward; check instead that
        // ∫₀^∞ e^{-λt}(1 - mass(t)) dt = E e^{-λτ₀}/λ.
        let (lambda, x, r) = (2.0f64, 0.7f64, 1.0f64);
        let lt = integrate(
            |t| {
                if t <= 0.0 {
                    return 0.0;
                }
                let mass =
                    integrate_to_infinity(|y| killed_drifted_density(t, x, y, r).unwrap(), 0.0)
                        .unwrap();
                (-lambda * t).exp() * (1.0 - mass)
            },
            0.0,
            30.0,
        )
        .unwrap();
        let target = hitting_time_laplace(lambda, x, r).unwrap() / lambda;
        assert!((lt - target).abs() < 1e-7, "{lt} vs {target}");
    }
}
