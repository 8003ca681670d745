//! `cbp` — benchmark harness for composite-Bernstein collocation.
//!
//! Subcommands: `approx` (sampling-based approximation error tables),
//! `solve` (one collocation solve of a registry example, JSON bundle),
//! `converge` (parameter sweeps to CSV/JSON with fitted-order rows),
//! `dai` (inequality-constrained examples, JSON bundle with audit), and
//! `dump` (operator matrices as CSV).
//!
//! Exit codes: 0 success, 2 usage error, 3 non-convergence (the report
//! is still written), 4 infeasible (ditto).

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use cbp_core::bernstein::{delta_matrix, d_matrix, elevation_matrix, gamma_matrix, Interval};
use cbp_core::composite::{uniform_knots, validate_knots, CompositeBernstein};
use cbp_core::dai::{approximate_nonpoly, solve_dai, DaiReport};
use cbp_core::knot_collocation::{extractor_matrix, zeta_matrix, ThetaChain};
use cbp_core::matrix::DenseMatrix;
use cbp_core::ode::OdeProblem;
use cbp_core::registry::{
    ex5_target, example5, example6, ode_example, rod_positions, DaiMethod, Ex5Params, Ex6Params,
};
use cbp_core::report::SolveReport;
use cbp_core::solver::{AuglagOptions, SolverOptions};
use cbp_core::{cp_collocation, knot_collocation};

const EXIT_USAGE: u8 = 2;
const EXIT_NO_CONVERGENCE: u8 = 3;
const EXIT_INFEASIBLE: u8 = 4;

#[derive(Parser)]
#[command(
    name = "cbp",
    version,
    about = "Composite Bernstein collocation: approximation, ODE solving, sweeps, constrained problems, matrix dumps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a function onto Bernstein composites and tabulate max errors
    Approx(ApproxArgs),
    /// Solve one registry example (1-4) and write a solution bundle
    Solve(SolveArgs),
    /// Sweep K (and n or M) on one example; emit rows plus fitted orders
    Converge(ConvergeArgs),
    /// Solve an inequality-constrained example (5 or 6); write bundle + audit
    Dai(DaiArgs),
    /// Print an operator matrix as CSV with 17 significant digits
    Dump(DumpArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Cp,
    Knot,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ApproxFn {
    /// sin(s)
    Sin,
    /// exp(s)
    Exp,
    /// the affine function 2s + 1 (exactly representable at any degree)
    Custom,
}

#[derive(Args)]
struct ApproxArgs {
    /// Function to approximate
    #[arg(long = "fn", value_enum, default_value = "sin")]
    function: ApproxFn,
    /// Comma-separated segment degrees, zipped with --k
    #[arg(long)]
    n: String,
    /// Comma-separated segment counts, zipped with --n
    #[arg(long)]
    k: String,
    /// Left end of the interval
    #[arg(long)]
    s0: Option<f64>,
    /// Right end of the interval (default: 2*pi for sin, 1 otherwise)
    #[arg(long)]
    sf: Option<f64>,
    /// Equidistant samples used for the error measurement
    #[arg(long, default_value_t = 2001)]
    samples: usize,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Output path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    /// Registry example id (1-4)
    #[arg(long)]
    example: usize,
    #[arg(long, value_enum)]
    method: MethodArg,
    /// Segment degree (cp method)
    #[arg(long)]
    n: Option<usize>,
    /// Integration depth M (knot method)
    #[arg(long = "m-order")]
    m_order: Option<usize>,
    /// Number of equidistant segments over the example's domain
    #[arg(long)]
    k: Option<usize>,
    /// Explicit comma-separated knot list (overrides --k)
    #[arg(long)]
    knots: Option<String>,
    /// Solver stopping tolerance on the residual
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, default_value_t = 2001)]
    samples: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ConvergeArgs {
    /// Registry example id (1-4)
    #[arg(long)]
    example: usize,
    #[arg(long, value_enum)]
    method: MethodArg,
    /// Comma-separated segment degrees (cp method)
    #[arg(long)]
    n: Option<String>,
    /// Comma-separated integration depths (knot method)
    #[arg(long = "m-order")]
    m_order: Option<String>,
    /// Comma-separated segment counts; at least three
    #[arg(long)]
    k: String,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, default_value_t = 2001)]
    samples: usize,
    /// Parallel workers for the sweep (row order stays deterministic)
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DaiArgs {
    /// Registry example id (5 or 6)
    #[arg(long)]
    example: usize,
    /// Number of segments (default: 25 for example 5, 15 for example 6)
    #[arg(long)]
    k: Option<usize>,
    /// Example 5: allowed distance from the target trajectory
    #[arg(long)]
    band: Option<f64>,
    /// Example 5: input bound
    #[arg(long = "u-max")]
    u_max: Option<f64>,
    /// Example 5: end of the time horizon
    #[arg(long = "t-end")]
    t_end: Option<f64>,
    /// Example 5: integration depth for the state (3 or 4)
    #[arg(long = "m-order")]
    m_order: Option<usize>,
    /// Example 5: parameterization of the unknowns
    #[arg(long, value_enum, default_value = "knot")]
    method: MethodArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MatrixKind {
    /// Degree-reducing differentiation matrix
    Delta,
    /// Degree-raising integration matrix
    Gamma,
    /// Degree elevation matrix
    #[value(name = "E", alias = "e")]
    Elevation,
    /// Degree-preserving differentiation matrix
    #[value(name = "D", alias = "d")]
    Differentiation,
    /// Composite integration matrix with continuity chaining
    Zeta,
    /// Knot-value extractor matrix
    #[value(name = "P", alias = "p")]
    Extractor,
    /// Knot-value map for one derivative level of the theta chain
    #[value(name = "T", alias = "t")]
    KnotMap,
}

#[derive(Args)]
struct DumpArgs {
    #[arg(long, value_enum)]
    matrix: MatrixKind,
    /// Degree parameter
    #[arg(long)]
    n: Option<usize>,
    /// Target degree for elevation
    #[arg(long)]
    ne: Option<usize>,
    #[arg(long, default_value_t = 0.0)]
    s0: f64,
    #[arg(long, default_value_t = 1.0)]
    sf: f64,
    /// Explicit comma-separated knot list (zeta, P, T)
    #[arg(long)]
    knots: Option<String>,
    /// Number of equidistant segments on [s0, sf] (alternative to --knots)
    #[arg(long)]
    k: Option<usize>,
    /// Integration depth M (zeta, P, T)
    #[arg(long = "m-order")]
    m_order: Option<usize>,
    /// Derivative level (P: extraction degree; T: chain level)
    #[arg(long)]
    level: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A failure that already knows its exit code and diagnostic.
struct Failure {
    code: u8,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

impl From<cbp_core::Error> for Failure {
    fn from(e: cbp_core::Error) -> Self {
        usage(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure {
            code: 1,
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Approx(args) => cmd_approx(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Converge(args) => cmd_converge(args),
        Command::Dai(args) => cmd_dai(args),
        Command::Dump(args) => cmd_dump(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn parse_list<T: std::str::FromStr>(raw: &str, what: &str) -> Result<Vec<T>, Failure> {
    raw.split(',')
        .map(|p| p.trim())
        .filter(|p| !p.is_empty())
        .map(|p| {
            p.parse::<T>()
                .map_err(|_| usage(format!("invalid {what} entry '{p}'")))
        })
        .collect()
}

fn resolve_knots(
    explicit: &Option<String>,
    k: Option<usize>,
    s0: f64,
    sf: f64,
) -> Result<Vec<f64>, Failure> {
    let knots = match (explicit, k) {
        (Some(raw), _) => parse_list::<f64>(raw, "knot")?,
        (None, Some(k)) if k >= 1 => uniform_knots(s0, sf, k),
        _ => return Err(usage("provide --knots or a positive --k")),
    };
    validate_knots(&knots)?;
    Ok(knots)
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, content)?,
        None => print!("{content}"),
    }
    Ok(())
}

// ---------------------------------------------------------------- approx

fn cmd_approx(args: ApproxArgs) -> Result<u8, Failure> {
    let ns = parse_list::<usize>(&args.n, "--n")?;
    let ks = parse_list::<usize>(&args.k, "--k")?;
    if ns.is_empty() || ns.len() != ks.len() {
        return Err(usage(format!(
            "--n and --k must be equal-length nonempty lists (got {} and {})",
            ns.len(),
            ks.len()
        )));
    }
    if args.samples < 2 {
        return Err(usage("--samples must be at least 2"));
    }
    let s0 = args.s0.unwrap_or(0.0);
    let sf = args.sf.unwrap_or(match args.function {
        ApproxFn::Sin => std::f64::consts::TAU,
        _ => 1.0,
    });
    if !(s0.is_finite() && sf.is_finite() && s0 < sf) {
        return Err(usage(format!("need finite s0 < sf, got [{s0}, {sf}]")));
    }
    let f: fn(f64) -> f64 = match args.function {
        ApproxFn::Sin => f64::sin,
        ApproxFn::Exp => f64::exp,
        ApproxFn::Custom => |s| 2.0 * s + 1.0,
    };

    #[derive(Serialize)]
    struct ApproxRow {
        n: usize,
        #[serde(rename = "K")]
        k: usize,
        total_cps: usize,
        max_abs_error: f64,
    }
    let mut rows = Vec::new();
    for (&n, &k) in ns.iter().zip(&ks) {
        if k == 0 {
            return Err(usage("segment counts must be positive"));
        }
        let knots = uniform_knots(s0, sf, k);
        let c = CompositeBernstein::from_samples(f, &knots, n)?;
        rows.push(ApproxRow {
            n,
            k,
            total_cps: k * (n + 1),
            max_abs_error: c.max_abs_error(f, args.samples),
        });
    }

    let content = match args.format {
        Format::Json => format!("{}\n", serde_json::to_string_pretty(&rows).unwrap()),
        Format::Csv => {
            let mut s = String::from("n,K,total_cps,max_abs_error\n");
            for r in &rows {
                let _ = writeln!(s, "{},{},{},{:.16e}", r.n, r.k, r.total_cps, r.max_abs_error);
            }
            s
        }
    };
    emit(&args.out, &content)?;
    Ok(0)
}

// ----------------------------------------------------------------- solve

fn method_size(args_n: Option<usize>, args_m: Option<usize>, method: MethodArg) -> Result<usize, Failure> {
    match method {
        MethodArg::Cp => args_n.ok_or_else(|| usage("cp method needs --n")),
        MethodArg::Knot => args_m.ok_or_else(|| usage("knot method needs --m-order")),
    }
}

fn run_one(
    problem: &OdeProblem,
    method: MethodArg,
    size: usize,
    knots: &[f64],
    opts: &SolverOptions,
) -> cbp_core::Result<(CompositeBernstein, SolveReport)> {
    match method {
        MethodArg::Cp => cp_collocation::solve(problem, size, knots, opts),
        MethodArg::Knot => knot_collocation::solve(problem, size, knots, opts),
    }
}

fn solver_options(tol: Option<f64>) -> SolverOptions {
    match tol {
        Some(t) => SolverOptions {
            tol: t,
            ..SolverOptions::default()
        },
        None => SolverOptions::default(),
    }
}

fn ode_example_or_usage(id: usize) -> Result<OdeProblem, Failure> {
    if id == 5 || id == 6 {
        return Err(usage(format!(
            "example {id} is inequality-constrained; use the dai subcommand"
        )));
    }
    Ok(ode_example(id)?)
}

fn cmd_solve(args: SolveArgs) -> Result<u8, Failure> {
    let problem = ode_example_or_usage(args.example)?;
    let size = method_size(args.n, args.m_order, args.method)?;
    let knots = resolve_knots(&args.knots, args.k, problem.domain.s0(), problem.domain.sf())?;
    let opts = solver_options(args.tol);

    let (solution, report) = run_one(&problem, args.method, size, &knots, &opts)?;
    let max_abs_error = problem
        .exact
        .as_ref()
        .map(|exact| solution.max_abs_error(exact, args.samples));

    let bundle = json!({
        "problem": problem.name,
        "solution": solution,
        "report": report,
        "max_abs_error": max_abs_error,
    });
    let content = format!("{}\n", serde_json::to_string_pretty(&bundle).unwrap());

    let mut summary = format!(
        "{} example {}: K={}, unknowns={}, iterations={}, residual_inf={:.3e}, converged={}",
        match args.method {
            MethodArg::Cp => "cp",
            MethodArg::Knot => "knot",
        },
        args.example,
        report.k,
        report.unknowns,
        report.iterations,
        report.residual_inf,
        report.converged
    );
    if let Some(err) = max_abs_error {
        let _ = write!(summary, ", max_abs_error={err:.6e}");
    }

    match &args.out {
        Some(path) => {
            fs::write(path, &content)?;
            println!("{summary}");
        }
        None => {
            print!("{content}");
            eprintln!("{summary}");
        }
    }
    Ok(if report.converged { 0 } else { EXIT_NO_CONVERGENCE })
}

// -------------------------------------------------------------- converge

#[derive(Clone, Default)]
struct SweepRow {
    method: String,
    example: usize,
    n: Option<usize>,
    m: Option<usize>,
    k: Option<usize>,
    unknowns: Option<usize>,
    max_abs_error: Option<f64>,
    residual_inf: Option<f64>,
    iterations: Option<usize>,
    runtime_ms: Option<f64>,
    converged: Option<bool>,
    error: Option<String>,
}

const SWEEP_HEADER: &str =
    "method,example,n,M,K,unknowns,max_abs_error,residual_inf,iterations,runtime_ms,converged";

fn opt<T: std::fmt::Display>(v: &Option<T>, fmt: impl Fn(&T) -> String) -> String {
    v.as_ref().map(&fmt).unwrap_or_default()
}

fn sweep_rows_to_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from(SWEEP_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.method,
            r.example,
            opt(&r.n, |v| v.to_string()),
            opt(&r.m, |v| v.to_string()),
            opt(&r.k, |v| v.to_string()),
            opt(&r.unknowns, |v| v.to_string()),
            opt(&r.max_abs_error, |v| format!("{v:.16e}")),
            opt(&r.residual_inf, |v| format!("{v:.16e}")),
            opt(&r.iterations, |v| v.to_string()),
            opt(&r.runtime_ms, |v| format!("{v:.3}")),
            opt(&r.converged, |v| v.to_string()),
        );
    }
    s
}

fn sweep_rows_to_json(rows: &[SweepRow]) -> String {
    let values: Vec<serde_json::Value> = rows
        .iter()
        .map(|r| {
            json!({
                "method": r.method,
                "example": r.example,
                "n": r.n,
                "M": r.m,
                "K": r.k,
                "unknowns": r.unknowns,
                "max_abs_error": r.max_abs_error,
                "residual_inf": r.residual_inf,
                "iterations": r.iterations,
                "runtime_ms": r.runtime_ms,
                "converged": r.converged,
                "error": r.error,
            })
        })
        .collect();
    format!("{}\n", serde_json::to_string_pretty(&values).unwrap())
}

/// Least-squares slope of `-ln(err)` against `ln(K)` over converged rows.
fn fitted_order(points: &[(usize, f64)]) -> Option<f64> {
    if points.len() < 2 || !points.iter().all(|&(_, e)| e.is_finite() && e > 0.0) {
        return None;
    }
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(k, e) in points {
        let x = (k as f64).ln();
        let y = e.ln();
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    Some(-((n * sxy - sx * sy) / (n * sxx - sx * sx)))
}

fn cmd_converge(args: ConvergeArgs) -> Result<u8, Failure> {
    let problem = ode_example_or_usage(args.example)?;
    let sizes: Vec<usize> = match args.method {
        MethodArg::Cp => parse_list(
            args.n.as_deref().ok_or_else(|| usage("cp method needs --n"))?,
            "--n",
        )?,
        MethodArg::Knot => parse_list(
            args.m_order
                .as_deref()
                .ok_or_else(|| usage("knot method needs --m-order"))?,
            "--m-order",
        )?,
    };
    let ks: Vec<usize> = parse_list(&args.k, "--k")?;
    if sizes.is_empty() {
        return Err(usage("need at least one n or M value"));
    }
    if ks.len() < 3 {
        return Err(usage("a convergence sweep needs at least three K values"));
    }
    if args.jobs == 0 {
        return Err(usage("--jobs must be positive"));
    }
    let opts = solver_options(args.tol);
    let method_name = match args.method {
        MethodArg::Cp => "cp",
        MethodArg::Knot => "knot",
    };

    // Flat job list in deterministic parameter order (size-major).
    let configs: Vec<(usize, usize)> = sizes
        .iter()
        .flat_map(|&size| ks.iter().map(move |&k| (size, k)))
        .collect();
    let slots: Vec<Mutex<Option<SweepRow>>> = configs.iter().map(|_| Mutex::new(None)).collect();
    let cursor = AtomicUsize::new(0);
    let workers = args.jobs.min(configs.len());

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = cursor.fetch_add(1, Ordering::Relaxed);
                if i >= configs.len() {
                    break;
                }
                let (size, k) = configs[i];
                let mut row = SweepRow {
                    method: method_name.to_string(),
                    example: args.example,
                    n: (args.method == MethodArg::Cp).then_some(size),
                    m: (args.method == MethodArg::Knot).then_some(size),
                    k: Some(k),
                    ..SweepRow::default()
                };
                let knots = uniform_knots(problem.domain.s0(), problem.domain.sf(), k);
                match run_one(&problem, args.method, size, &knots, &opts) {
                    Ok((solution, report)) => {
                        row.unknowns = Some(report.unknowns);
                        row.max_abs_error = problem
                            .exact
                            .as_ref()
                            .map(|exact| solution.max_abs_error(exact, args.samples));
                        row.residual_inf = Some(report.residual_inf);
                        row.iterations = Some(report.iterations);
                        row.runtime_ms = Some(report.runtime_ms);
                        row.converged = Some(report.converged);
                    }
                    Err(e) => {
                        row.converged = Some(false);
                        row.error = Some(e.to_string());
                    }
                }
                *slots[i].lock().unwrap() = Some(row);
            });
        }
    });

    let mut rows: Vec<SweepRow> = slots
        .into_iter()
        .map(|slot| slot.into_inner().unwrap().expect("all jobs completed"))
        .collect();

    // One fitted-order row per size value, computed over its converged rows.
    let mut order_rows = Vec::new();
    for &size in &sizes {
        let points: Vec<(usize, f64)> = rows
            .iter()
            .filter(|r| {
                r.converged == Some(true)
                    && r.n.or(r.m) == Some(size)
                    && !r.method.ends_with("_order")
            })
            .filter_map(|r| r.k.zip(r.max_abs_error))
            .collect();
        order_rows.push(SweepRow {
            method: format!("{method_name}_order"),
            example: args.example,
            n: (args.method == MethodArg::Cp).then_some(size),
            m: (args.method == MethodArg::Knot).then_some(size),
            max_abs_error: fitted_order(&points),
            ..SweepRow::default()
        });
    }
    rows.extend(order_rows);

    let any_failed = rows
        .iter()
        .any(|r| r.converged == Some(false) || r.error.is_some());
    let content = match args.format {
        Format::Csv => sweep_rows_to_csv(&rows),
        Format::Json => sweep_rows_to_json(&rows),
    };
    emit(&args.out, &content)?;
    Ok(if any_failed { EXIT_NO_CONVERGENCE } else { 0 })
}

// ------------------------------------------------------------------- dai

fn dai_audit_ex5(
    params: &Ex5Params,
    knots: &[f64],
    solution: &[(String, CompositeBernstein)],
) -> Result<serde_json::Value, Failure> {
    let find = |name: &str| &solution.iter().find(|(n, _)| n == name).unwrap().1;
    let x = find("x");
    let u = find("u");
    let target_hat = approximate_nonpoly(ex5_target, knots, x.degree())?;
    let samples = 10_000usize;
    let (mut max_u, mut max_gap, mut hat_err) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..samples {
        let s = params.t_end * i as f64 / (samples - 1) as f64;
        max_u = max_u.max(u.eval(s).abs());
        max_gap = max_gap.max((x.eval(s) - target_hat.eval(s)).abs());
        hat_err = hat_err.max((target_hat.eval(s) - ex5_target(s)).abs());
    }
    let x1 = x.derivative()?;
    let x2 = x1.derivative()?;
    let mut knot_res: f64 = x.eval(knots[0]).abs().max(x1.eval(knots[0]).abs());
    for &kn in knots {
        knot_res = knot_res.max((x2.eval(kn) - (u.eval(kn) - params.gamma * x1.eval(kn))).abs());
    }
    Ok(json!({
        "samples": samples,
        "max_abs_input": max_u,
        "input_limit": params.u_max,
        "max_tracking_gap": max_gap,
        "band": params.band,
        "max_knot_dynamics_residual": knot_res,
        "target_approximation_error": hat_err,
    }))
}

fn dai_audit_ex6(
    params: &Ex6Params,
    solution: &[(String, CompositeBernstein)],
) -> Result<serde_json::Value, Failure> {
    let find = |name: &str| &solution.iter().find(|(n, _)| n == name).unwrap().1;
    let (px, py) = rod_positions(find("phi"), find("nu1"), find("nu2"), params.p0)?;
    let tip = (px.eval(params.length), py.eval(params.length));
    let samples = 10_000usize;
    let mut min_d2 = f64::INFINITY;
    for i in 0..samples {
        let s = params.length * i as f64 / (samples - 1) as f64;
        let d2 =
            (px.eval(s) - params.obstacle.0).powi(2) + (py.eval(s) - params.obstacle.1).powi(2);
        min_d2 = min_d2.min(d2);
    }
    let mut min_cp_d2 = f64::INFINITY;
    for (sx, sy) in px.segments().iter().zip(py.segments()) {
        for (&cx, &cy) in sx.iter().zip(sy) {
            min_cp_d2 = min_cp_d2
                .min((cx - params.obstacle.0).powi(2) + (cy - params.obstacle.1).powi(2));
        }
    }
    Ok(json!({
        "samples": samples,
        "tip": [tip.0, tip.1],
        "tip_target": [params.p_des.0, params.p_des.1],
        "min_sampled_clearance": min_d2.sqrt(),
        "min_control_point_clearance": min_cp_d2.sqrt(),
        "r_safe": params.r_safe,
    }))
}

/// Builds the post-solve audit block from the named solution composites.
type AuditFn = Box<dyn Fn(&[(String, CompositeBernstein)]) -> Result<serde_json::Value, Failure>>;

fn cmd_dai(args: DaiArgs) -> Result<u8, Failure> {
    let (problem, report_audit): (cbp_core::dai::DaiProblem, AuditFn) = match args.example {
        5 => {
            let mut params = Ex5Params::default();
            if let Some(k) = args.k {
                params.k = k;
            }
            if let Some(band) = args.band {
                if band < 0.0 {
                    return Err(usage("--band must be nonnegative"));
                }
                params.band = band;
            }
            if let Some(u_max) = args.u_max {
                params.u_max = u_max;
            }
            if let Some(t_end) = args.t_end {
                if !(t_end.is_finite() && t_end > 0.0) {
                    return Err(usage("--t-end must be positive"));
                }
                params.t_end = t_end;
            }
            if let Some(m) = args.m_order {
                params.m = m;
            }
            params.method = match args.method {
                MethodArg::Knot => DaiMethod::Knot,
                MethodArg::Cp => DaiMethod::Cp { strict: false },
            };
            let problem = example5(params)?;
            let knots = problem.knots.clone();
            (
                problem,
                Box::new(move |solution| dai_audit_ex5(&params, &knots, solution)),
            )
        }
        6 => {
            for (flag, present) in [
                ("--band", args.band.is_some()),
                ("--u-max", args.u_max.is_some()),
                ("--t-end", args.t_end.is_some()),
                ("--m-order", args.m_order.is_some()),
            ] {
                if present {
                    return Err(usage(format!("{flag} applies to example 5 only")));
                }
            }
            if args.method != MethodArg::Knot {
                return Err(usage("example 6 supports the knot parameterization only"));
            }
            let mut params = Ex6Params::default();
            if let Some(k) = args.k {
                params.k = k;
            }
            let problem = example6(params)?;
            (
                problem,
                Box::new(move |solution| dai_audit_ex6(&params, solution)),
            )
        }
        other => return Err(cbp_core::Error::UnknownExample(other).into()),
    };

    let (solution, report): (Vec<(String, CompositeBernstein)>, DaiReport) =
        solve_dai(&problem, &AuglagOptions::default())?;
    let audit = report_audit(&solution)?;

    let unknowns: serde_json::Map<String, serde_json::Value> = solution
        .iter()
        .map(|(name, c)| (name.clone(), serde_json::to_value(c).unwrap()))
        .collect();
    let bundle = json!({
        "problem": problem.name,
        "unknowns": unknowns,
        "report": report,
        "audit": audit,
    });
    emit(
        &args.out,
        &format!("{}\n", serde_json::to_string_pretty(&bundle).unwrap()),
    )?;

    if report.feasible {
        Ok(0)
    } else {
        eprintln!(
            "infeasible: max violation {:.6e}, equality residual {:.6e}{}",
            report.max_violation,
            report.eq_residual_inf,
            report
                .worst
                .as_ref()
                .map(|w| format!(
                    ", worst family '{}' on [{:.4}, {:.4}]",
                    w.label, w.s_lo, w.s_hi
                ))
                .unwrap_or_default()
        );
        Ok(EXIT_INFEASIBLE)
    }
}

// ------------------------------------------------------------------ dump

fn matrix_to_csv(m: &DenseMatrix) -> String {
    let mut s = String::new();
    for i in 0..m.rows() {
        let cells: Vec<String> = m.row(i).iter().map(|v| format!("{v:.16e}")).collect();
        let _ = writeln!(s, "{}", cells.join(","));
    }
    s
}

fn cmd_dump(args: DumpArgs) -> Result<u8, Failure> {
    let need_n = || args.n.ok_or_else(|| usage("this matrix needs --n"));
    let need_m = || {
        args.m_order
            .ok_or_else(|| usage("this matrix needs --m-order"))
    };
    let need_level = || args.level.ok_or_else(|| usage("this matrix needs --level"));
    let interval = Interval::new(args.s0, args.sf)?;

    let matrix = match args.matrix {
        MatrixKind::Delta => delta_matrix(need_n()?, interval),
        MatrixKind::Gamma => gamma_matrix(need_n()?, interval),
        MatrixKind::Elevation => {
            let n = need_n()?;
            let ne = args.ne.ok_or_else(|| usage("elevation needs --ne"))?;
            elevation_matrix(n, ne)?
        }
        MatrixKind::Differentiation => d_matrix(need_n()?, interval)?,
        MatrixKind::Zeta => {
            let knots = resolve_knots(&args.knots, args.k, args.s0, args.sf)?;
            zeta_matrix(need_n()?, &knots, need_m()?)?
        }
        MatrixKind::Extractor => {
            let knots = resolve_knots(&args.knots, args.k, args.s0, args.sf)?;
            extractor_matrix(need_level()?, &knots, need_m()?)?
        }
        MatrixKind::KnotMap => {
            let knots = resolve_knots(&args.knots, args.k, args.s0, args.sf)?;
            let chain = ThetaChain::new(&knots, need_m()?)?;
            let level = need_level()?;
            if level > chain.m() {
                return Err(usage(format!(
                    "--level must be at most M = {}",
                    chain.m()
                )));
            }
            chain.t_matrix(level).clone()
        }
    };
    emit(&args.out, &matrix_to_csv(&matrix))?;
    Ok(0)
}
