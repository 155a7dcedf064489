use serde::{Deserialize, Serialize};

use crate::analytic::{dn_symbol, k2_symbol_assembled};
use crate::error::{domain, Result};

/// The two elliptic problems on the half-plane `{y > 0}` with boundary data
/// `f` on `y = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HalfPlaneProblem {
    /// `Δu = r(u − u(·,0))`.
    P1,
    /// Drifted in `y`, with bounded solutions.
    P2,
}

/// Fourier multiplier of the bounded solution at height `y`:
/// `P1`: `ξ²/(ξ²+r)·e^{-y√(ξ²+r)} + r/(ξ²+r)`;
/// `P2`: `e^{-y(√(ξ²+r) − √r)}`.
pub fn halfplane_fourier_solution(
    problem: HalfPlaneProblem,
    xi: f64,
    y: f64,
    r: f64,
) -> Result<f64> {
    if !(y >= 0.0) {
        return Err(domain("y must be ≥ 0", y));
    }
    if !(r >= 0.0) {
        return Err(domain("r must be ≥ 0", r));
    }
    let k = xi * xi;
    let s = (k + r).sqrt();
    Ok(match problem {
        HalfPlaneProblem::P1 => {
            if k + r == 0.0 {
                1.0
            } else {
                k / (k + r) * (-y * s).exp() + r / (k + r)
            }
        }
        HalfPlaneProblem::P2 => (-y * (s - r.sqrt())).exp(),
    })
}

/// Boundary operator applied to the multiplier: `∂_y` at 0 for `P1`, and
/// `∂_y + D^Ψ` at 0 for `P2`.
pub fn halfplane_boundary_derivative(problem: HalfPlaneProblem, xi: f64, r: f64) -> Result<f64> {
    match problem {
        HalfPlaneProblem::P1 => Ok(dn_symbol(xi, r)),
        HalfPlaneProblem::P2 => k2_symbol_assembled(xi, r),
    }
}
