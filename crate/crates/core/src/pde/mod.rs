//! Finite differences for the two parabolic problems on the half-line
//!
//! * resetting: `u_t = u_xx + r(u(t,0) − u)`, `u_x(t,0) = 0`, solved by
//!   `E_x f(X⁺_t)`;
//! * non-local boundary: `u_t = u_xx − 2√r u_x`,
//!   `u_x(t,0) + ∫(u(t,y) − u(t,0)) r e^{-√r y} dy = 0`, solved by
//!   `E_x f(X̃_t)`;
//!
//! and the Fourier multipliers of the two half-plane problems.
//!
//! Both parabolic operators are a tridiagonal matrix plus a rank-one term
//! (the column `r·u_0` in the first case, the dense boundary row in the
//! second). Each θ-step is therefore a Thomas solve plus a Sherman–Morrison
//! correction. The first step is replaced by four implicit Euler quarter
//! steps to damp the start-up oscillations of Crank–Nicolson.

mod checks;
mod halfplane;

use std::io::Write;

use serde::{Deserialize, Serialize};

pub use checks::{
    fd_mc_cross_check, feynman_kac_mc, resolvent_consistency_check, stationary_mass_drift,
};
pub use halfplane::{halfplane_boundary_derivative, halfplane_fourier_solution, HalfPlaneProblem};

use crate::error::{domain, Error, Result};

/// Uniform space-time grid on `[0, x_max] × [0, t_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FDGrid {
    pub x_max: f64,
    pub nx: usize,
    pub nt: usize,
    pub t_max: f64,
}

/// Default spatial step.
pub const DEFAULT_DX: f64 = 0.01;
/// Default time step.
pub const DEFAULT_DT: f64 = 1e-3;

impl FDGrid {
    pub fn new(x_max: f64, nx: usize, nt: usize, t_max: f64) -> Result<Self> {
        let g = Self {
            x_max,
            nx,
            nt,
            t_max,
        };
        g.validate()?;
        Ok(g)
    }

    /// Grid with the default steps and `x_max ≥ max(6/√r, 6√(2 t_max), 12)`.
    pub fn for_problem(r: f64, t_max: f64) -> Result<Self> {
        if !(t_max > 0.0) {
            return Err(domain("t_max must be > 0", t_max));
        }
        let mut x_max = (6.0 * (2.0 * t_max).sqrt()).max(12.0);
        if r > 0.0 {
            x_max = x_max.max(6.0 / r.sqrt());
        }
        let x_max = x_max.ceil();
        let nx = (x_max / DEFAULT_DX).round() as usize + 1;
        let nt = (t_max / DEFAULT_DT).ceil() as usize;
        Self::new(x_max, nx, nt, t_max)
    }

    fn validate(&self) -> Result<()> {
        if self.nx < 16 {
            return Err(domain("nx must be ≥ 16", self.nx as f64));
        }
        if self.nt < 1 {
            return Err(domain("nt must be ≥ 1", self.nt as f64));
        }
        if !(self.x_max > 0.0 && self.x_max.is_finite()) {
            return Err(domain("x_max must be > 0", self.x_max));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(domain("t_max must be > 0", self.t_max));
        }
        Ok(())
    }

    /// Checks that the domain covers the stationary scale `6/√r`.
    pub fn validate_for(&self, r: f64) -> Result<()> {
        self.validate()?;
        if !(r >= 0.0) {
            return Err(domain("r must be ≥ 0", r));
        }
        if r > 0.0 && self.x_max < 6.0 / r.sqrt() {
            return Err(domain("x_max must be ≥ 6/√r", self.x_max));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        self.x_max / (self.nx - 1) as f64
    }

    pub fn dt(&self) -> f64 {
        self.t_max / self.nt as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.dx()
    }

    pub fn t(&self, n: usize) -> f64 {
        n as f64 * self.dt()
    }

    /// Halves both steps.
    pub fn refined(&self) -> Self {
        Self {
            nx: 2 * (self.nx - 1) + 1,
            nt: 2 * self.nt,
            ..*self
        }
    }

    /// Index of grid time `t`.
    pub fn time_index(&self, t: f64) -> Result<usize> {
        let n = (t / self.dt()).round();
        if !(n >= 0.0 && n <= self.nt as f64) || (n * self.dt() - t).abs() > 1e-9 * self.t_max {
            return Err(Error::OutOfRange(format!("t = {t} is not a grid time")));
        }
        Ok(n as usize)
    }
}

/// The two parabolic problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Problem {
    /// Resetting with a Neumann condition at 0.
    Neumann,
    /// Drifted interior with the non-local boundary condition.
    Nlbvp,
}

/// Discretisation of the `−2√r u_x` term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Convection {
    /// Second order; monotone while `dx ≤ 1/√r`.
    #[default]
    Central,
    /// First order backward difference; monotone for every `dx`.
    Upwind,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub theta: f64,
    /// Implicit Euler sub-steps replacing the first θ-step; 0 disables.
    pub startup_substeps: usize,
    pub convection: Convection,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            theta: 0.5,
            startup_substeps: 4,
            convection: Convection::Central,
        }
    }
}

/// Solution values `u[n][i] ≈ u(t_n, x_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FDSolution {
    pub grid: FDGrid,
    pub problem: Problem,
    pub r: f64,
    pub options: SolverOptions,
    pub u: Vec<Vec<f64>>,
}

impl FDSolution {
    /// `u(t, x)` at a grid time, linear in `x` between nodes.
    pub fn at(&self, t: f64, x: f64) -> Result<f64> {
        let n = self.grid.time_index(t)?;
        interpolate(&self.u[n], self.grid.dx(), x)
    }

    /// Largest excursion of `u` outside `[lo, hi]` over all grid times.
    pub fn max_principle_excess(&self, lo: f64, hi: f64) -> f64 {
        self.u
            .iter()
            .flatten()
            .map(|&v| (v - hi).max(lo - v).max(0.0))
            .fold(0.0, f64::max)
    }

    /// CSV with columns `t,x,u`, keeping every `every`-th time row.
    pub fn write_csv<W: Write>(&self, mut w: W, every: usize) -> Result<()> {
        writeln!(w, "t,x,u")?;
        let every = every.max(1);
        for (n, row) in self.u.iter().enumerate() {
            if n % every != 0 && n != self.grid.nt {
                continue;
            }
            let t = self.grid.t(n);
            for (i, v) in row.iter().enumerate() {
                writeln!(w, "{t},{},{v}", self.grid.x(i))?;
            }
        }
        Ok(())
    }
}

pub(crate) fn interpolate(row: &[f64], dx: f64, x: f64) -> Result<f64> {
    let last = (row.len() - 1) as f64 * dx;
    if !(x >= 0.0 && x <= last * (1.0 + 1e-12)) {
        return Err(Error::OutOfRange(format!("x = {x} outside [0, {last}]")));
    }
    let s = x / dx;
    let i = (s.floor() as usize).min(row.len() - 2);
    let w = s - i as f64;
    Ok(row[i] * (1.0 - w) + row[i + 1] * w)
}

/// `A = tridiag(lo, di, up) + a·bᵀ`.
struct Operator {
    lo: Vec<f64>,
    di: Vec<f64>,
    up: Vec<f64>,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl Operator {
    fn apply(&self, u: &[f64], out: &mut [f64]) {
        let n = u.len();
        let bu: f64 = self.b.iter().zip(u).map(|(x, y)| x * y).sum();
        for i in 0..n {
            let mut v = self.di[i] * u[i] + self.a[i] * bu;
            if i > 0 {
                v += self.lo[i] * u[i - 1];
            }
            if i + 1 < n {
                v += self.up[i] * u[i + 1];
            }
            out[i] = v;
        }
    }

    fn build(problem: Problem, r: f64, grid: &FDGrid, conv: Convection) -> Self {
        let n = grid.nx;
        let h = grid.dx();
        let d2 = 1.0 / (h * h);
        let (mut lo, mut di, mut up) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        for i in 1..n - 1 {
            lo[i] = d2;
            di[i] = -2.0 * d2;
            up[i] = d2;
        }
        // Reflecting ghost points at both ends.
        di[0] = -2.0 * d2;
        up[0] = 2.0 * d2;
        lo[n - 1] = 2.0 * d2;
        di[n - 1] = -2.0 * d2;
        let (mut a, mut b) = (vec![0.0; n], vec![0.0; n]);
        match problem {
            Problem::Neumann => {
                for d in &mut di {
                    *d -= r;
                }
                a.fill(r);
                b[0] = 1.0;
            }
            Problem::Nlbvp => {
                let drift = -2.0 * r.sqrt();
                for i in 1..n - 1 {
                    match conv {
                        Convection::Central => {
                            lo[i] -= drift / (2.0 * h);
                            up[i] += drift / (2.0 * h);
                        }
                        Convection::Upwind => {
                            lo[i] -= drift / h;
                            di[i] += drift / h;
                        }
                    }
                }
                // Row 0: (2/h + 2√r)·β with β the trapezoid rule for the
                // non-local integral plus the exact tail beyond x_max.
                let s = r.sqrt();
                let c = 2.0 / h + 2.0 * s;
                a[0] = 1.0;
                let mut total = 0.0;
                for (j, bj) in b.iter_mut().enumerate().skip(1) {
                    let w = if j == n - 1 { 0.5 * h } else { h };
                    let mut k = w * r * (-s * grid.x(j)).exp();
                    if j == n - 1 {
                        k += s * (-s * grid.x_max).exp();
                    }
                    *bj = c * k;
                    total += k;
                }
                b[0] = -c * total;
            }
        }
        Self { lo, di, up, a, b }
    }
}

/// Solver for `(I − θk A) u = rhs`.
struct Stepper {
    theta_k: f64,
    lo: Vec<f64>,
    di: Vec<f64>,
    up: Vec<f64>,
    z: Vec<f64>,
    denom: f64,
}

impl Stepper {
    fn new(op: &Operator, theta_k: f64) -> Result<Self> {
        let lo: Vec<f64> = op.lo.iter().map(|v| -theta_k * v).collect();
        let di: Vec<f64> = op.di.iter().map(|v| 1.0 - theta_k * v).collect();
        let up: Vec<f64> = op.up.iter().map(|v| -theta_k * v).collect();
        let p: Vec<f64> = op.a.iter().map(|v| -theta_k * v).collect();
        let z = thomas(&lo, &di, &up, &p)?;
        let denom = 1.0 + op.b.iter().zip(&z).map(|(x, y)| x * y).sum::<f64>();
        if !(denom.abs() > 1e-12) || !denom.is_finite() {
            return Err(Error::Solver(format!(
                "rank-one update is singular ({denom})"
            )));
        }
        Ok(Self {
            theta_k,
            lo,
            di,
            up,
            z,
            denom,
        })
    }

    fn solve(&self, op: &Operator, rhs: &[f64]) -> Result<Vec<f64>> {
        let mut y = thomas(&self.lo, &self.di, &self.up, rhs)?;
        let by: f64 = op.b.iter().zip(&y).map(|(x, v)| x * v).sum();
        let c = by / self.denom;
        for (yi, zi) in y.iter_mut().zip(&self.z) {
            *yi -= c * zi;
        }
        Ok(y)
    }

    /// One θ-step of size `k` with `θk = self.theta_k`.
    fn step(&self, op: &Operator, k: f64, u: &[f64], work: &mut [f64]) -> Result<Vec<f64>> {
        op.apply(u, work);
        let explicit = k - self.theta_k;
        let rhs: Vec<f64> = u
            .iter()
            .zip(work.iter())
            .map(|(x, a)| x + explicit * a)
            .collect();
        self.solve(op, &rhs)
    }
}

fn thomas(lo: &[f64], di: &[f64], up: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = di.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut m = di[0];
    for i in 0..n {
        if i > 0 {
            m = di[i] - lo[i] * c[i - 1];
        }
        if !(m.abs() > 1e-300) {
            return Err(Error::Solver(format!("zero pivot at row {i}")));
        }
        c[i] = up[i] / m;
        d[i] = (rhs[i] - if i > 0 { lo[i] * d[i - 1] } else { 0.0 }) / m;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}

/// Time-marches `problem`, calling `visit(n, u_n)` for every grid time.
pub(crate) fn march<F, V>(
    problem: Problem,
    f: &F,
    r: f64,
    grid: &FDGrid,
    opts: SolverOptions,
    mut visit: V,
) -> Result<()>
where
    F: Fn(f64) -> f64 + ?Sized,
    V: FnMut(usize, &[f64]),
{
    grid.validate_for(r)?;
    if problem == Problem::Nlbvp && !(r > 0.0) {
        return Err(domain("the non-local problem needs r > 0", r));
    }
    if !(opts.theta >= 0.5 && opts.theta <= 1.0) {
        return Err(domain("theta must lie in [1/2, 1]", opts.theta));
    }
    let op = Operator::build(problem, r, grid, opts.convection);
    let k = grid.dt();
    let mut u: Vec<f64> = (0..grid.nx).map(|i| f(grid.x(i))).collect();
    if let Some(bad) = u.iter().find(|v| !v.is_finite()) {
        return Err(domain("initial data must be finite", *bad));
    }
    visit(0, &u);
    let main = Stepper::new(&op, opts.theta * k)?;
    let sub = opts.startup_substeps;
    let start = if sub > 0 {
        Some(Stepper::new(&op, k / sub as f64)?)
    } else {
        None
    };
    let mut work = vec![0.0; grid.nx];
    for n in 1..=grid.nt {
        u = match (&start, n) {
            (Some(s), 1) => {
                let mut v = u;
                for _ in 0..sub {
                    v = s.step(&op, k / sub as f64, &v, &mut work)?;
                }
                v
            }
            _ => main.step(&op, k, &u, &mut work)?,
        };
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::Solver(format!("non-finite values at step {n}")));
        }
        visit(n, &u);
    }
    Ok(())
}

/// Solves `problem` with explicit options, storing every grid time.
pub fn solve_with<F>(
    problem: Problem,
    f: &F,
    r: f64,
    grid: &FDGrid,
    opts: SolverOptions,
) -> Result<FDSolution>
where
    F: Fn(f64) -> f64 + ?Sized,
{
    let mut rows = Vec::with_capacity(grid.nt + 1);
    march(problem, f, r, grid, opts, |_, u| rows.push(u.to_vec()))?;
    Ok(FDSolution {
        grid: *grid,
        problem,
        r,
        options: opts,
        u: rows,
    })
}

/// `u_t = u_xx + r(u(t,0) − u)`, `u_x(t,0) = 0`, `u(0,·) = f`.
pub fn solve_resetting_neumann<F>(f: &F, r: f64, grid: &FDGrid) -> Result<FDSolution>
where
    F: Fn(f64) -> f64 + ?Sized,
{
    solve_with(Problem::Neumann, f, r, grid, SolverOptions::default())
}

/// `u_t = u_xx − 2√r u_x` with `u_x(t,0) + D^Ψ u(t,0) = 0`, `u(0,·) = f`.
pub fn solve_nlbvp<F>(f: &F, r: f64, grid: &FDGrid) -> Result<FDSolution>
where
    F: Fn(f64) -> f64 + ?Sized,
{
    solve_with(Problem::Nlbvp, f, r, grid, SolverOptions::default())
}
