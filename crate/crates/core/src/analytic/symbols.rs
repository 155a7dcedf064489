use super::resolvent::marchaud_apply;
use crate::error::Result;

/// Fourier symbol `−ξ²/√(ξ²+r)` of the Dirichlet-to-Neumann operator of the
/// resetting problem, i.e. `−Φ(ξ²)`.
pub fn dn_symbol(xi: f64, r: f64) -> f64 {
    let k = xi * xi;
    if k == 0.0 {
        return 0.0;
    }
    if r == 0.0 {
        return -xi.abs();
    }
    -k / (k + r).sqrt()
}

/// Symbol of the boundary operator `∂_y + D^Ψ` applied to the bounded
/// harmonic extension `e^{-y(√(ξ²+r) − √r)}`, with the non-local part
/// evaluated by quadrature.
pub fn k2_symbol_assembled(xi: f64, r: f64) -> Result<f64> {
    if xi == 0.0 {
        return Ok(0.0);
    }
    let a = xi * xi / ((xi * xi + r).sqrt() + r.sqrt());
    let slope = -a;
    if r == 0.0 {
        return Ok(slope);
    }
    let nonlocal = marchaud_apply(&|y: f64| (-a * y).exp(), 0.0, r)?;
    Ok(slope + nonlocal)
}
