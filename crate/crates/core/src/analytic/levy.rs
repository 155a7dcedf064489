use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use super::exponents::{ExponentKind, LaplaceExponent};
use crate::error::{domain, Result};
use crate::quad::Quadrature;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MeasureKind {
    /// `e^{-rz}(2rz+1) / (2√π z^{3/2})`.
    PiPhi,
    /// `r e^{-√r z}`.
    PiPsi,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevyMeasure {
    pub kind: MeasureKind,
    pub r: f64,
}

impl LevyMeasure {
    pub fn new(kind: MeasureKind, r: f64) -> Self {
        Self { kind, r }
    }

    /// Density at `z > 0`, unchecked.
    pub fn density(&self, z: f64) -> f64 {
        let r = self.r;
        match self.kind {
            MeasureKind::PiPhi => {
                (-r * z).exp() * (2.0 * r * z + 1.0) / (2.0 * PI.sqrt() * z.powf(1.5))
            }
            MeasureKind::PiPsi => r * (-r.sqrt() * z).exp(),
        }
    }

    /// Tail `Π̄(z) = Π((z, ∞))`.
    pub fn tail(&self, z: f64) -> f64 {
        match self.kind {
            MeasureKind::PiPhi => (-self.r * z).exp() / (PI * z).sqrt(),
            MeasureKind::PiPsi => {
                let s = self.r.sqrt();
                s * (-s * z).exp()
            }
        }
    }

    /// `Π((0, ∞))`; infinite for `PiPhi`.
    pub fn total_mass(&self) -> f64 {
        match self.kind {
            MeasureKind::PiPhi => f64::INFINITY,
            MeasureKind::PiPsi => self.r.sqrt(),
        }
    }

    /// `∫₀^∞ (1 ∧ z) Π(dz)` by quadrature.
    pub fn small_moment(&self) -> Result<f64> {
        let q = Quadrature::default();
        let near = match self.kind {
            // z = v² turns z·Π(dz) into a bounded integrand.
            MeasureKind::PiPhi => {
                q.integrate(|v| 2.0 * v * v * v * self.density(v * v), 0.0, 1.0)?
            }
            MeasureKind::PiPsi => q.integrate(|z| z * self.density(z), 0.0, 1.0)?,
        };
        Ok(near + self.tail(1.0))
    }

    /// `∫₀^ε z Π(dz)`, the mean contribution of jumps below `ε`.
    pub fn truncated_mean(&self, eps: f64) -> Result<f64> {
        let q = Quadrature::with_abs_tol(1e-13);
        match self.kind {
            MeasureKind::PiPhi => {
                q.integrate(|v| 2.0 * v * v * v * self.density(v * v), 0.0, eps.sqrt())
            }
            MeasureKind::PiPsi => q.integrate(|z| z * self.density(z), 0.0, eps),
        }
    }
}

/// Density of `measure` at `z > 0`.
pub fn levy_density(measure: &LevyMeasure, z: f64) -> Result<f64> {
    if !(z > 0.0) {
        return Err(domain("z must be > 0", z));
    }
    Ok(measure.density(z))
}

fn measure_of(exponent: &LaplaceExponent) -> Option<LevyMeasure> {
    match exponent.kind {
        ExponentKind::Phi => Some(LevyMeasure::new(MeasureKind::PiPhi, exponent.r)),
        ExponentKind::HalfStable => Some(LevyMeasure::new(MeasureKind::PiPhi, 0.0)),
        ExponentKind::Psi => Some(LevyMeasure::new(MeasureKind::PiPsi, exponent.r)),
        ExponentKind::DriftedBM => None,
    }
}

/// Tail of the Lévy measure `e^{-rz} z^{-3/2}/(2√π) dz` of `√(λ+r) − √r`.
fn drifted_tail(z: f64, r: f64) -> f64 {
    (-r * z).exp() / (PI * z).sqrt() - r.sqrt() * erfc((r * z).sqrt())
}

fn drifted_density(z: f64, r: f64) -> f64 {
    (-r * z).exp() / (2.0 * PI.sqrt() * z.powf(1.5))
}

/// `|f(λ) − d·λ − ∫₀^∞ (1 − e^{-λz}) Π(dz)|` by quadrature.
pub fn levy_khintchine_residual(exponent: &LaplaceExponent, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(domain("lambda must be > 0", lambda));
    }
    let q = Quadrature::default();
    let r = exponent.r;
    let density = |z: f64| match measure_of(exponent) {
        Some(m) => m.density(z),
        None => drifted_density(z, r),
    };
    // Near zero use z = v² so (1 − e^{-λz}) z^{-3/2} stays bounded.
    let near = q.integrate(
        |v| {
            if v == 0.0 {
                return 0.0;
            }
            let z = v * v;
            2.0 * v * (-(-lambda * z).exp_m1()) * density(z)
        },
        0.0,
        1.0,
    )?;
    let far = q.integrate_to_infinity(|z| (-(-lambda * z).exp_m1()) * density(z), 1.0)?;
    Ok((exponent.value(lambda) - exponent.drift() * lambda - near - far).abs())
}

/// `|f(λ)/λ − d − ∫₀^∞ e^{-λz} Π̄(z) dz|` by quadrature.
pub fn tail_symbol_check(exponent: &LaplaceExponent, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(domain("lambda must be > 0", lambda));
    }
    let q = Quadrature::default();
    let r = exponent.r;
    let tail = |z: f64| match measure_of(exponent) {
        Some(m) => m.tail(z),
        None => drifted_tail(z, r),
    };
    let near = q.integrate(
        |v| {
            if v == 0.0 {
                return 0.0;
            }
            let z = v * v;
            2.0 * v * (-lambda * z).exp() * tail(z)
        },
        0.0,
        1.0,
    )?;
    let far = q.integrate_to_infinity(|z| (-lambda * z).exp() * tail(z), 1.0)?;
    Ok((exponent.value(lambda) / lambda - exponent.drift() - near - far).abs())
}
