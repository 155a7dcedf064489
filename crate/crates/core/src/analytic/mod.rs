//! Closed-form kernels, densities, Laplace exponents, Lévy measures,
//! resolvents and symbols.
//!
//! Every function is pure. Integrals without an elementary antiderivative are
//! evaluated with [`crate::quad`] at absolute tolerance `1e-10`.

mod exponents;
mod kernels;
mod levy;
mod resolvent;
mod symbols;

pub use exponents::{
    bernstein_check, inverse_local_time_laplace, inverse_subordinator_laplace, phi, psi,
    psi_phi_identity_check, BernsteinCheck, ExponentKind, LaplaceExponent,
};
pub use kernels::{
    drifted_reflected_density, first_passage_laplace_kernel, heat_kernel, heat_kernel_laplace,
    hitting_time_laplace, joint_laplace_drift, killed_drifted_density, reflected_bm_density,
    resetting_density_free, resetting_density_reflected, stationary_cdf_halfline,
    stationary_density_halfline,
};
pub use levy::{
    levy_density, levy_khintchine_residual, tail_symbol_check, LevyMeasure, MeasureKind,
};
pub use resolvent::{
    bc_resolvent_residual, marchaud_apply, resolvent_at_zero, resolvent_dirichlet,
    resolvent_dirichlet_derivative_at_zero, resolvent_full, resolvent_resetting,
};
pub use symbols::{dn_symbol, k2_symbol_assembled};
