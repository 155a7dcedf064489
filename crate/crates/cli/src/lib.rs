//! Command-line driver: simulation, reversal, verification suites, PDE
//! solves, traces and closed-form tables.
//!
//! Exit codes: 0 when every requested verification passes, 1 when one fails,
//! 2 on usage or configuration errors.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod output;
mod suites;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use resetting_core::analytic::{
    dn_symbol, phi, psi, stationary_density_halfline, LevyMeasure, MeasureKind,
};
use resetting_core::params::{default_dt, DEFAULT_PATHS};
use resetting_core::pde::{solve_with, FDGrid, Problem, SolverOptions};
use resetting_core::reversal::{build_x_tilde, x_tilde_pairs, Start};
use resetting_core::simulate::{simulate, ProcessKind};
use resetting_core::stats::VerificationReport;
use resetting_core::trace::{sample_trace, truncated_levy_trace_oracle, TraceKind};
use resetting_core::{ModelParams, RngStreamSpec};

pub use output::{write_atomic, Summary};
pub use suites::{run_suite, Suite, SuiteConfig};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "RESETTING_LAB_THREADS";

#[derive(Debug, Parser, Serialize)]
#[command(
    name = "resetting-lab",
    version,
    about = "Reflected Brownian motion with resetting: simulation and verification"
)]
pub struct Cli {
    /// Write the JSON-lines report here.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
    /// Format of the report printed on stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Table,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Simulate forward paths and write them as CSV.
    Simulate(SimulateArgs),
    /// Simulate the reversed process.
    Reverse(ReverseArgs),
    /// Run a verification suite.
    ///
    /// Suites: stationary (stationary law of X⁺ and X̃), localtime (inverse
    /// local time laws of X⁺ and X̃), reversal (laws between resets and of
    /// the boundary jumps), duality (two-point duality and its negative
    /// control), pde (finite differences against Monte Carlo and resolvents),
    /// trace (boundary trace laws), identities (closed-form identities),
    /// all.
    Verify(VerifyArgs),
    /// Solve one of the parabolic problems by finite differences.
    Pde(PdeArgs),
    /// Sample boundary trace values.
    Trace(TraceArgs),
    /// Compare trace characteristic functions with their target on a grid.
    TraceVerify(TraceVerifyArgs),
    /// Tabulate a closed-form function, or check the identities.
    Analytic(AnalyticArgs),
}

#[derive(Debug, Args, Serialize, Clone)]
pub struct ModelArgs {
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub r: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub x0: f64,
    /// Time horizon.
    #[arg(long = "T", default_value_t = 1.0, allow_negative_numbers = true)]
    pub horizon: f64,
    /// Grid step; defaults to 1e-4·max(1, 1/r) capped at 1e-3.
    #[arg(long, allow_negative_numbers = true)]
    pub dt: Option<f64>,
    #[arg(long, default_value_t = 10)]
    pub paths: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl ModelArgs {
    fn params(&self) -> ModelParams {
        ModelParams::new(self.r, self.x0, self.horizon)
            .with_dt(self.dt.unwrap_or_else(|| default_dt(self.r)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum KindArg {
    FreeBm,
    ReflectedBm,
    FreeResetting,
    ReflectedResetting,
    DriftedReflected,
}

impl From<KindArg> for ProcessKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::FreeBm => ProcessKind::FreeBM,
            KindArg::ReflectedBm => ProcessKind::ReflectedBM,
            KindArg::FreeResetting => ProcessKind::FreeResetting,
            KindArg::ReflectedResetting => ProcessKind::ReflectedResetting,
            KindArg::DriftedReflected => ProcessKind::DriftedReflected,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value_t = KindArg::ReflectedResetting)]
    pub kind: KindArg,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Directory for one CSV per path (`t,x,gamma`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON file with the event log of every path.
    #[arg(long)]
    pub events_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InitArg {
    Fixed,
    Stationary,
}

#[derive(Debug, Args, Serialize)]
pub struct ReverseArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// `stationary` draws each start from μ⁺; `fixed` uses --x0.
    #[arg(long, value_enum, default_value_t = InitArg::Fixed)]
    pub init: InitArg,
    /// Directory for one CSV per path (`t,x`) and `events.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long)]
    pub suite: String,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub r: f64,
    #[arg(long, default_value_t = DEFAULT_PATHS)]
    pub paths: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Grid step for the suites that follow the default step rule.
    #[arg(long, allow_negative_numbers = true)]
    pub dt: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemArg {
    Neumann,
    Nlbvp,
}

/// Initial data for the PDE solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum TestFunction {
    ExpNeg,
    Gauss,
    Indicator(f64, f64),
}

impl TestFunction {
    pub fn eval(&self, y: f64) -> f64 {
        match *self {
            TestFunction::ExpNeg => (-y).exp(),
            TestFunction::Gauss => (-y * y).exp(),
            TestFunction::Indicator(a, b) => {
                if (a..b).contains(&y) {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

impl std::str::FromStr for TestFunction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "expneg" => Ok(TestFunction::ExpNeg),
            "gauss" => Ok(TestFunction::Gauss),
            _ => {
                let rest = s.strip_prefix("indicator:").ok_or_else(|| {
                    format!("unknown function {s:?}; use expneg, gauss or indicator:a,b")
                })?;
                let (a, b) = rest.split_once(',').ok_or("indicator needs a,b")?;
                let a: f64 = a.trim().parse().map_err(|e| format!("{e}"))?;
                let b: f64 = b.trim().parse().map_err(|e| format!("{e}"))?;
                if !(a < b) {
                    return Err("indicator needs a < b".into());
                }
                Ok(TestFunction::Indicator(a, b))
            }
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct PdeArgs {
    #[arg(long, value_enum)]
    pub problem: ProblemArg,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub r: f64,
    #[arg(long, default_value = "expneg")]
    pub f: TestFunction,
    #[arg(long, default_value_t = 1.0)]
    pub t_max: f64,
    #[arg(long)]
    pub x_max: Option<f64>,
    #[arg(long)]
    pub nx: Option<usize>,
    #[arg(long)]
    pub nt: Option<usize>,
    /// Keep every n-th time row in the CSV.
    #[arg(long, default_value_t = 100)]
    pub every: usize,
    #[arg(long, default_value = "pde.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WhichArg {
    T1,
    T2,
    Oracle,
}

#[derive(Debug, Args, Serialize)]
pub struct TraceArgs {
    #[arg(long, value_enum, default_value_t = WhichArg::T1)]
    pub which: WhichArg,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub r: f64,
    /// Trace time (local-time units).
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub t: f64,
    #[arg(long, default_value_t = 10_000)]
    pub paths: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    /// Horizon before the first extension of the vertical process.
    #[arg(long = "T", default_value_t = 5.0)]
    pub horizon: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub eps_cut: f64,
    #[arg(long, default_value = "trace.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct TraceVerifyArgs {
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub r: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub t: f64,
    #[arg(long, default_value_t = 10_000)]
    pub paths: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    /// Comma-separated frequencies.
    #[arg(long, value_delimiter = ',', default_value = "0.25,0.5,1,2,4")]
    pub xi: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FormulaArg {
    Phi,
    Psi,
    StationaryDensity,
    PiPhiDensity,
    PiPhiTail,
    DnSymbol,
}

#[derive(Debug, Args, Serialize)]
pub struct AnalyticArgs {
    #[arg(long, value_enum, default_value_t = FormulaArg::Phi)]
    pub formula: FormulaArg,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub r: f64,
    #[arg(long, default_value_t = 0.01, allow_negative_numbers = true)]
    pub from: f64,
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    pub to: f64,
    #[arg(long, default_value_t = 101)]
    pub points: usize,
    /// Run the identity checks instead of tabulating.
    #[arg(long)]
    pub check: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Failure modes of a run, mapped to exit codes.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] resetting_core::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl RunError {
    fn exit_code(&self) -> i32 {
        2
    }
}

/// Parses `argv` (program name first) and runs it. Returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    configure_threads();
    match execute(&cli) {
        Ok(reports) => {
            let summary = Summary::of(&reports);
            if let Err(e) = output::emit(&cli, &reports, &summary) {
                eprintln!("error: {e}");
                return 2;
            }
            if summary.failed == 0 {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        if n > 0 {
            // Fails harmlessly if a pool already exists in this process.
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
        }
    }
}

fn execute(cli: &Cli) -> Result<Vec<VerificationReport>, RunError> {
    match &cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Reverse(a) => cmd_reverse(a),
        Command::Verify(a) => {
            let suite: Suite = a.suite.parse().map_err(RunError::Usage)?;
            let cfg = SuiteConfig {
                r: a.r,
                paths: a.paths,
                seed: a.seed,
                dt: a.dt,
            };
            cfg.validate()?;
            Ok(run_suite(suite, &cfg)?)
        }
        Command::Pde(a) => cmd_pde(a),
        Command::Trace(a) => cmd_trace(a),
        Command::TraceVerify(a) => cmd_trace_verify(a),
        Command::Analytic(a) => cmd_analytic(a),
    }
}

fn cmd_simulate(a: &SimulateArgs) -> Result<Vec<VerificationReport>, RunError> {
    let kind: ProcessKind = a.kind.into();
    let p = a.model.params();
    kind.validate(&p)?;
    let mut logs = Vec::new();
    let mut terminal = Vec::new();
    for i in 0..a.model.paths as u64 {
        let path = simulate(kind, &p, RngStreamSpec::new(a.model.seed, i))?;
        terminal.push(path.path.terminal().map_or(f64::NAN, |(_, x)| x));
        if let Some(dir) = &a.out {
            let mut buf = Vec::new();
            path.write_csv(&mut buf)?;
            write_atomic(&dir.join(format!("path_{i:06}.csv")), &buf)?;
        }
        logs.push(path.path.events);
    }
    if let Some(file) = &a.events_out {
        write_atomic(
            file,
            serde_json::to_string_pretty(&logs)
                .map_err(resetting_core::Error::from)?
                .as_bytes(),
        )?;
    }
    info(&format!("simulate {kind:?}"), &terminal);
    Ok(Vec::new())
}

fn info(what: &str, values: &[f64]) {
    let (mean, se) = resetting_core::stats::mean_se(values);
    eprintln!(
        "{what}: {} samples, mean {mean:.6} ± {se:.2e}",
        values.len()
    );
}

fn cmd_reverse(a: &ReverseArgs) -> Result<Vec<VerificationReport>, RunError> {
    let p = a.model.params();
    p.validate()?;
    let mut logs = Vec::new();
    let mut terminal = Vec::new();
    if a.init == InitArg::Stationary {
        let pairs = x_tilde_pairs(
            &p,
            a.model.seed,
            p.horizon,
            Start::Stationary,
            a.model.paths,
        )?;
        terminal = pairs.end;
    } else {
        for i in 0..a.model.paths as u64 {
            let path = build_x_tilde(&p, RngStreamSpec::new(a.model.seed, i))?;
            terminal.push(path.path.terminal().map_or(f64::NAN, |(_, x)| x));
            if let Some(dir) = &a.out {
                let mut buf = Vec::new();
                path.path.write_csv(&mut buf)?;
                write_atomic(&dir.join(format!("path_{i:06}.csv")), &buf)?;
            }
            logs.push(path.path.events);
        }
    }
    if let Some(dir) = &a.out {
        if a.init == InitArg::Stationary {
            let text: String = terminal.iter().map(|x| format!("{x}\n")).collect();
            write_atomic(&dir.join("terminal.csv"), format!("x\n{text}").as_bytes())?;
        } else {
            let json = serde_json::to_string_pretty(&logs).map_err(resetting_core::Error::from)?;
            write_atomic(&dir.join("events.json"), json.as_bytes())?;
        }
    }
    info("reverse", &terminal);
    Ok(Vec::new())
}

fn cmd_pde(a: &PdeArgs) -> Result<Vec<VerificationReport>, RunError> {
    let mut grid = FDGrid::for_problem(a.r, a.t_max)?;
    if let Some(x) = a.x_max {
        grid.x_max = x;
        grid.nx = (x / grid.dx()).round() as usize + 1;
    }
    if let Some(nx) = a.nx {
        grid.nx = nx;
    }
    if let Some(nt) = a.nt {
        grid.nt = nt;
    }
    let grid = FDGrid::new(grid.x_max, grid.nx, grid.nt, grid.t_max)?;
    let problem = match a.problem {
        ProblemArg::Neumann => Problem::Neumann,
        ProblemArg::Nlbvp => Problem::Nlbvp,
    };
    let f = a.f;
    let sol = solve_with(
        problem,
        &|y| f.eval(y),
        a.r,
        &grid,
        SolverOptions::default(),
    )?;
    let mut buf = Vec::new();
    sol.write_csv(&mut buf, a.every)?;
    write_atomic(&a.out, &buf)?;
    // Every initial datum takes values in [0, 1].
    Ok(vec![VerificationReport::at_most(
        format!("maximum principle {problem:?} r={}", a.r),
        sol.max_principle_excess(0.0, 1.0),
        1e-10,
    )])
}

fn cmd_trace(a: &TraceArgs) -> Result<Vec<VerificationReport>, RunError> {
    let values = match a.which {
        WhichArg::Oracle => truncated_levy_trace_oracle(a.r, a.t, a.eps_cut, a.seed, a.paths)?,
        w => {
            let which = if w == WhichArg::T1 {
                TraceKind::T1
            } else {
                TraceKind::T2
            };
            let p = ModelParams::new(a.r, 0.0, a.horizon).with_dt(a.dt);
            let s = sample_trace(which, &p, a.seed, a.t, a.paths)?;
            if s.censored > 0 {
                eprintln!("warning: {} censored paths dropped", s.censored);
            }
            s.values
        }
    };
    let text: String = values.iter().map(|x| format!("{x}\n")).collect();
    write_atomic(&a.out, format!("value\n{text}").as_bytes())?;
    info(&format!("trace {:?}", a.which), &values);
    Ok(Vec::new())
}

fn cmd_trace_verify(a: &TraceVerifyArgs) -> Result<Vec<VerificationReport>, RunError> {
    if a.xi.is_empty() {
        return Err(RunError::Usage("--xi needs at least one value".into()));
    }
    let p = ModelParams::new(a.r, 0.0, 5.0).with_dt(a.dt);
    let mut out = Vec::new();
    for which in [TraceKind::T1, TraceKind::T2] {
        if a.r == 0.0 && which == TraceKind::T2 {
            continue;
        }
        let s = sample_trace(which, &p, a.seed, a.t, a.paths)?;
        out.extend(suites::cf_reports(
            &format!("{which:?}"),
            &s.values,
            a.t,
            a.r,
            &a.xi,
            a.seed,
            a.dt,
        )?);
    }
    Ok(out)
}

fn cmd_analytic(a: &AnalyticArgs) -> Result<Vec<VerificationReport>, RunError> {
    if a.check {
        return Ok(suites::identities(a.r)?);
    }
    if a.points < 2 || !(a.to > a.from) {
        return Err(RunError::Usage(
            "need --points ≥ 2 and --to > --from".into(),
        ));
    }
    let mut rows = String::from("x,value\n");
    for k in 0..a.points {
        let x = a.from + (a.to - a.from) * k as f64 / (a.points - 1) as f64;
        let v = match a.formula {
            FormulaArg::Phi => phi(x, a.r)?,
            FormulaArg::Psi => psi(x, a.r)?,
            FormulaArg::StationaryDensity => stationary_density_halfline(x, a.r)?,
            FormulaArg::PiPhiDensity => resetting_core::analytic::levy_density(
                &LevyMeasure::new(MeasureKind::PiPhi, a.r),
                x,
            )?,
            FormulaArg::PiPhiTail => LevyMeasure::new(MeasureKind::PiPhi, a.r).tail(x),
            FormulaArg::DnSymbol => dn_symbol(x, a.r),
        };
        rows.push_str(&format!("{x},{v}\n"));
    }
    match &a.out {
        Some(p) => write_atomic(p, rows.as_bytes())?,
        None => print!("{rows}"),
    }
    Ok(Vec::new())
}
