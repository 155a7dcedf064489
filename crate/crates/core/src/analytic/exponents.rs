use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Which Bernstein function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExponentKind {
    /// `λ/√(λ+r)`, inverse local time of the reflected resetting process.
    Phi,
    /// `λ + √r − r/(λ+√r)`, the subordinator driving the reversed jumps.
    Psi,
    /// `√λ`.
    HalfStable,
    /// `√(λ+r) − √r`, inverse local time of the drifted reflected motion.
    DriftedBM,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaplaceExponent {
    pub kind: ExponentKind,
    pub r: f64,
}

impl LaplaceExponent {
    pub fn new(kind: ExponentKind, r: f64) -> Self {
        Self { kind, r }
    }

    /// Value at `λ ≥ 0`, without argument checks.
    pub fn value(&self, lambda: f64) -> f64 {
        let r = self.r;
        match self.kind {
            ExponentKind::Phi => {
                if lambda == 0.0 {
                    0.0
                } else if r == 0.0 {
                    lambda.sqrt()
                } else {
                    lambda / (lambda + r).sqrt()
                }
            }
            ExponentKind::Psi => psi_value(lambda, r),
            ExponentKind::HalfStable => lambda.sqrt(),
            ExponentKind::DriftedBM => drifted_value(lambda, r),
        }
    }

    pub fn eval(&self, lambda: f64) -> Result<f64> {
        if !(lambda > 0.0) {
            return Err(domain("lambda must be > 0", lambda));
        }
        Ok(self.value(lambda))
    }

    /// Exact first derivative.
    pub fn derivative(&self, lambda: f64) -> f64 {
        let r = self.r;
        match self.kind {
            ExponentKind::Phi => (lambda + 2.0 * r) / (2.0 * (lambda + r).powf(1.5)),
            ExponentKind::Psi => 1.0 + r / (lambda + r.sqrt()).powi(2),
            ExponentKind::HalfStable => 0.5 / lambda.sqrt(),
            ExponentKind::DriftedBM => 0.5 / (lambda + r).sqrt(),
        }
    }

    /// Drift coefficient `d = lim_{λ→∞} f(λ)/λ`.
    pub fn drift(&self) -> f64 {
        match self.kind {
            ExponentKind::Psi => 1.0,
            _ => 0.0,
        }
    }
}

fn psi_value(lambda: f64, r: f64) -> f64 {
    // λ + √r − r/(λ+√r) rewritten without cancellation.
    if lambda == 0.0 {
        return 0.0;
    }
    let sr = r.sqrt();
    lambda * (1.0 + sr / (lambda + sr))
}

fn drifted_value(lambda: f64, r: f64) -> f64 {
    if r == 0.0 {
        return lambda.sqrt();
    }
    lambda / ((lambda + r).sqrt() + r.sqrt())
}

/// `Φ(λ) = λ/√(λ+r)`.
pub fn phi(lambda: f64, r: f64) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(domain("r must be ≥ 0", r));
    }
    LaplaceExponent::new(ExponentKind::Phi, r).eval(lambda)
}

/// `Ψ(λ) = λ + √r − r/(λ+√r)`.
pub fn psi(lambda: f64, r: f64) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(domain("r must be ≥ 0", r));
    }
    LaplaceExponent::new(ExponentKind::Psi, r).eval(lambda)
}

/// Relative residual `|Ψ(√(λ+r) − √r) − Φ(λ)| / Φ(λ)`.
pub fn psi_phi_identity_check(lambda: f64, r: f64) -> f64 {
    let shifted = drifted_value(lambda, r);
    let lhs = psi_value(shifted, r);
    let rhs = lambda / (lambda + r).sqrt();
    (lhs - rhs).abs() / rhs.abs()
}

/// `E[e^{-λ T_x}] = e^{-x f(λ)}` for the first passage `T_x` of a
/// subordinator with exponent `f` above level `x`.
pub fn inverse_local_time_laplace(exponent: &LaplaceExponent, lambda: f64, x: f64) -> Result<f64> {
    Ok((-x * exponent.eval(lambda)?).exp())
}

/// `∫₀^∞ e^{-λt} P(L_t ∈ dx) dt / dx = (f(λ)/λ) e^{-x f(λ)}` for the inverse
/// `L` of a subordinator with exponent `f`.
pub fn inverse_subordinator_laplace(
    exponent: &LaplaceExponent,
    lambda: f64,
    x: f64,
) -> Result<f64> {
    let v = exponent.eval(lambda)?;
    Ok(v / lambda * (-x * v).exp())
}

/// Central-difference sign pattern of a Bernstein function at `λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BernsteinCheck {
    pub lambda: f64,
    pub value: f64,
    pub first: f64,
    pub second: f64,
    pub passed: bool,
}

/// Checks `f ≥ 0`, `f' ≥ 0`, `f'' ≤ 0` with step `h = λ·1e-5`.
///
/// The second difference carries rounding noise of order `ε|f|/h²`, which is
/// allowed on the wrong side of zero.
pub fn bernstein_check(exponent: &LaplaceExponent, lambda: f64) -> BernsteinCheck {
    let h = lambda * 1e-5;
    let f0 = exponent.value(lambda);
    let fp = exponent.value(lambda + h);
    let fm = exponent.value(lambda - h);
    let first = (fp - fm) / (2.0 * h);
    let second = (fp - 2.0 * f0 + fm) / (h * h);
    let noise = 8.0 * f64::EPSILON * f0.abs() / (h * h);
    let passed = f0 >= 0.0 && first >= 0.0 && second <= noise;
    BernsteinCheck {
        lambda,
        value: f0,
        first,
        second,
        passed,
    }
}
