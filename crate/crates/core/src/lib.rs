//! Simulation and numerical verification for reflecting Brownian motion with
//! Poissonian resetting to the origin, its time reversal (a drifted reflecting
//! Brownian motion that jumps away from zero according to a subordinator),
//! the local times of both processes at zero, and the boundary traces they
//! leave on the half-plane.
//!
//! Brownian motion throughout has generator `d²/dx²`, i.e. `Var B_t = 2t`.
//!
//! Module map:
//!
//! * [`params`], [`rng`], [`path`]: shared domain types, reproducible random
//!   streams and path containers.
//! * [`analytic`]: closed-form kernels, densities, Laplace exponents, Lévy
//!   measures, resolvents and symbols, evaluated with [`quad`].
//! * [`simulate`]: Monte Carlo for the forward processes with exact event
//!   handling and local-time bookkeeping.
//! * [`reversal`]: the subordinator with exponent `Ψ`, its inverse and
//!   remaining lifetime, and the reversed process built from them.
//! * [`stats`]: goodness-of-fit tests, empirical transforms and the two-point
//!   duality test.
//! * [`pde`]: finite-difference solvers for the two parabolic problems and
//!   Fourier multipliers for the half-plane problems.
//! * [`trace`]: boundary trace processes and an independent subordination
//!   oracle.

// `!(x > 0.0)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod error;
pub mod params;
pub mod path;
pub mod pde;
pub mod quad;
pub mod reversal;
pub mod rng;
pub mod simulate;
pub mod stats;
pub mod trace;

pub use error::{Error, Result};
pub use params::ModelParams;
pub use path::{AugmentedPath, EventLog, SamplePath};
pub use rng::RngStreamSpec;

/// Absolute tolerance used to decide that a position is at the origin.
pub const TOL_X: f64 = 1e-12;
