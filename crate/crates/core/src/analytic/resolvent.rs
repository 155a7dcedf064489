use super::exponents::psi;
use super::kernels::hitting_time_laplace;
use crate::error::{domain, Result};
use crate::quad::Quadrature;

fn check(lambda: f64, r: f64) -> Result<()> {
    if !(lambda > 0.0) {
        return Err(domain("lambda must be > 0", lambda));
    }
    if !(r >= 0.0) {
        return Err(domain("r must be ≥ 0", r));
    }
    Ok(())
}

fn inner() -> Quadrature {
    Quadrature::with_abs_tol(1e-12)
}

/// Resolvent of `B̃` killed at 0:
/// `½ ∫₀^∞ e^{√r(x−y)} (e^{-|x−y|s} − e^{-(x+y)s}) / s · f(y) dy`, `s = √(λ+r)`.
pub fn resolvent_dirichlet<F>(f: &F, x: f64, lambda: f64, r: f64) -> Result<f64>
where
    F: Fn(f64) -> f64 + ?Sized,
{
    check(lambda, r)?;
    if !(x >= 0.0) {
        return Err(domain("x must be ≥ 0", x));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let s = (lambda + r).sqrt();
    let sr = r.sqrt();
    let image = |y: f64| (sr * (x - y) - (x + y) * s).exp();
    let q = inner();
    let left = q.integrate(|y| (((x - y) * (sr - s)).exp() - image(y)) * f(y), 0.0, x)?;
    let right = q.integrate_to_infinity(|y| (((x - y) * (s + sr)).exp() - image(y)) * f(y), x)?;
    Ok((left + right) / (2.0 * s))
}

/// `d/dx R^D_λ f(0) = ∫₀^∞ e^{-y(√(λ+r)+√r)} f(y) dy`.
pub fn resolvent_dirichlet_derivative_at_zero<F>(f: &F, lambda: f64, r: f64) -> Result<f64>
where
    F: Fn(f64) -> f64 + ?Sized,
{
    check(lambda, r)?;
    let k = (lambda + r).sqrt() + r.sqrt();
    inner().integrate_to_infinity(|y| (-k * y).exp() * f(y), 0.0)
}

/// Resolvent of the reversed process at the origin:
/// `[∫ e^{-y(s+√r)} f + ∫ R^D_λ f dΠ^Ψ] / Ψ(s − √r)`.
pub fn resolvent_at_zero<F>(f: &F, lambda: f64, r: f64) -> Result<f64>
where
    F: Fn(f64) -> f64 + ?Sized,
{
    check(lambda, r)?;
    let direct = resolvent_dirichlet_derivative_at_zero(f, lambda, r)?;
    let jumps = if r > 0.0 {
        let sr = r.sqrt();
        let mut err = None;
        let v = Quadrature::default().integrate_to_infinity(
            |l| match resolvent_dirichlet(f, l, lambda, r) {
                Ok(v) => v * r * (-sr * l).exp(),
                Err(e) => {
                    err.get_or_insert(e);
                    0.0
                }
            },
            0.0,
        )?;
        if let Some(e) = err {
            return Err(e);
        }
        v
    } else {
        0.0
    };
    let shifted = lambda / ((lambda + r).sqrt() + r.sqrt());
    Ok((direct + jumps) / psi(shifted, r)?)
}

/// `R_λ f(x) = R^D_λ f(x) + e^{-x(√(λ+r)−√r)} R_λ f(0)` for the reversed
/// process.
pub fn resolvent_full<F>(f: &F, x: f64, lambda: f64, r: f64) -> Result<f64>
where
    F: Fn(f64) -> f64 + ?Sized,
{
    let at_zero = resolvent_at_zero(f, lambda, r)?;
    Ok(resolvent_dirichlet(f, x, lambda, r)? + hitting_time_laplace(lambda, x, r)? * at_zero)
}

/// Residual of the boundary condition `u'(0) + D^Ψ u(0) = 0` for
/// `u = R_λ f`, with the non-local term integrated over `resolvent_full`.
pub fn bc_resolvent_residual<F>(f: &F, lambda: f64, r: f64) -> Result<f64>
where
    F: Fn(f64) -> f64 + ?Sized,
{
    check(lambda, r)?;
    let at_zero = resolvent_at_zero(f, lambda, r)?;
    let k = lambda / ((lambda + r).sqrt() + r.sqrt());
    let slope = resolvent_dirichlet_derivative_at_zero(f, lambda, r)? - k * at_zero;
    if r == 0.0 {
        return Ok(slope.abs());
    }
    let full = |y: f64| -> f64 {
        resolvent_dirichlet(f, y, lambda, r).unwrap_or(f64::NAN)
            + hitting_time_laplace(lambda, y, r).unwrap_or(f64::NAN) * at_zero
    };
    let nonlocal = marchaud_apply(&full, 0.0, r)?;
    Ok((slope + nonlocal).abs())
}

/// `D^Ψ f(x) = ∫₀^∞ (f(x+y) − f(x)) r e^{-√r y} dy`.
pub fn marchaud_apply<F>(f: &F, x: f64, r: f64) -> Result<f64>
where
    F: Fn(f64) -> f64 + ?Sized,
{
    if !(r > 0.0) {
        return Err(domain("r must be > 0", r));
    }
    let sr = r.sqrt();
    let fx = f(x);
    let v = Quadrature::with_abs_tol(1e-13)
        .integrate_to_infinity(|y| (f(x + y) - fx) * r * (-sr * y).exp(), 0.0)?;
    if v.is_nan() {
        return Err(domain("integrand is not finite", x));
    }
    Ok(v)
}

/// Resolvent of `X⁺`: `R⁰_{λ+r} f(x) + (r/λ) R⁰_{λ+r} f(0)` with `R⁰` the
/// resolvent of `B⁺`.
pub fn resolvent_resetting<F>(f: &F, x: f64, lambda: f64, r: f64) -> Result<f64>
where
    F: Fn(f64) -> f64 + ?Sized,
{
    check(lambda, r)?;
    if !(x >= 0.0) {
        return Err(domain("x must be ≥ 0", x));
    }
    let s = (lambda + r).sqrt();
    let q = inner();
    let reflected = |x: f64| -> Result<f64> {
        let left = q.integrate(|y| (-(x - y) * s).exp() * f(y), 0.0, x)?;
        let right = q.integrate_to_infinity(|y| (-(y - x) * s).exp() * f(y), x)?;
        let image = q.integrate_to_infinity(|y| (-(x + y) * s).exp() * f(y), 0.0)?;
        Ok((left + right + image) / (2.0 * s))
    };
    Ok(reflected(x)? + r / lambda * reflected(0.0)?)
}
