//! Command-line harness for the energy-free Newton solver: run solves,
//! compare line-search variants, validate oracles, and reproduce the cubic
//! counterexample.
//!
//! Exit codes are a stable contract: 0 converged, 2 max-iterations,
//! 3 line-search-stalled, 4 not-positive-definite, 5 domain-error, 64 usage
//! or configuration errors. `GRADNEWTON_LOG=info` (or `debug`/`trace`)
//! prints per-iteration lines to stderr.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use gradnewton::conformal::{angle_sums_at, check_gauss_bonnet, ConformalProblem, TargetCurvature};
use gradnewton::diagnostics::{analyze, DiagnosticsReport};
use gradnewton::mesh::TriangleMesh;
use gradnewton::problems::fixture_by_name;
use gradnewton::trace::write_csv;
use gradnewton::{
    fdcheck, linalg, solve, solve_armijo_baseline, ConstraintSpec, CountingOracle, Objective,
    Point, SolveResult, SolveStatus, SolverConfig,
};

const EXIT_USAGE: i32 = 64;

#[derive(Parser)]
#[command(
    name = "gradnewton",
    version,
    about = "Newton minimization with a gradient-only line search"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one solve; write a trace CSV and a JSON summary
    Solve(SolveArgs),
    /// Run several line-search variants on the same problem and compare
    Compare(CompareArgs),
    /// Check oracle derivatives and invariants for a problem
    Validate(ValidateArgs),
    /// Reproduce the cubic counterexample with both line searches
    DemoCounterexample(DemoArgs),
}

#[derive(Args, Clone)]
struct ProblemSpec {
    /// Built-in fixture (quadratic-diag, quadratic-hilbert, quadratic-rand-5,
    /// logsumexp-std, logsumexp-2, cubic-<eps>)
    #[arg(long, conflicts_with = "mesh")]
    problem: Option<String>,

    /// Triangle mesh file: OBJ, or the lenmesh metric format
    #[arg(long, requires = "curvature")]
    mesh: Option<PathBuf>,

    /// Target angle sums: 'uniform', 'perturbed:<magnitude>', or a file with
    /// one radian value per vertex
    #[arg(long)]
    curvature: Option<String>,

    /// Seed for randomized fixtures and perturbed targets
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Args, Clone)]
struct SolverArgs {
    /// Starting point, comma-separated (defaults to the problem's standard
    /// start; zeros for meshes)
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<String>,

    /// Sufficient-decrease constant in (0, 1/2)
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,

    /// Gradient-norm tolerance
    #[arg(long, default_value_t = 1e-10)]
    epsilon: f64,

    #[arg(long, default_value_t = 200)]
    max_iter: usize,

    /// Disable the two-probe full-step test (sign-only backtracking)
    #[arg(long)]
    no_first_condition: bool,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    problem: ProblemSpec,
    #[command(flatten)]
    solver: SolverArgs,

    #[arg(long, value_enum, default_value_t = Variant::EnergyFree)]
    variant: Variant,

    /// Write the iteration trace CSV here
    #[arg(long)]
    trace_out: Option<PathBuf>,

    /// Write the JSON summary here
    #[arg(long)]
    summary_out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    problem: ProblemSpec,
    #[command(flatten)]
    solver: SolverArgs,

    /// Comma-separated variants (defaults to every applicable one)
    #[arg(long)]
    variants: Option<String>,

    /// Write the comparison CSV here
    #[arg(long)]
    trace_out: Option<PathBuf>,

    /// Write the comparison JSON here
    #[arg(long)]
    summary_out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    problem: ProblemSpec,
}

#[derive(Args)]
struct DemoArgs {
    #[arg(long, default_value_t = 0.1)]
    eps: f64,

    #[arg(long, default_value_t = -0.5, allow_hyphen_values = true)]
    x0: f64,

    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Variant {
    /// Gradient-only line search with the full-step condition
    EnergyFree,
    /// Gradient-only line search, sign test alone
    EnergyFreeNoFirstCond,
    /// Classical backtracking on function values
    Armijo,
}

impl Variant {
    fn as_str(self) -> &'static str {
        match self {
            Variant::EnergyFree => "energy-free",
            Variant::EnergyFreeNoFirstCond => "energy-free-no-first-cond",
            Variant::Armijo => "armijo",
        }
    }

    fn parse_name(s: &str) -> Result<Self> {
        match s {
            "energy-free" => Ok(Variant::EnergyFree),
            "energy-free-no-first-cond" => Ok(Variant::EnergyFreeNoFirstCond),
            "armijo" => Ok(Variant::Armijo),
            other => bail!("unknown variant {other:?}"),
        }
    }
}

/// A resolved problem: instrumented oracle plus solve defaults.
struct LoadedProblem {
    label: String,
    oracle: CountingOracle<Box<dyn Objective + Send + Sync>>,
    default_start: Point,
    constraint: ConstraintSpec,
    has_energy: bool,
    /// Kept for validate/solve reporting on mesh problems.
    conformal: Option<(TriangleMesh, TargetCurvature)>,
}

fn load_mesh(path: &Path) -> Result<TriangleMesh> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading mesh {}", path.display()))?;
    let is_lenmesh = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .is_some_and(|l| l.starts_with("lenmesh"));
    let mesh = if is_lenmesh {
        TriangleMesh::parse_lenmesh(&text)
    } else {
        TriangleMesh::parse_obj(&text)
    };
    mesh.with_context(|| format!("parsing mesh {}", path.display()))
}

fn load_targets(spec_str: &str, mesh: &TriangleMesh, seed: u64) -> Result<TargetCurvature> {
    if spec_str == "uniform" {
        return Ok(TargetCurvature::uniform(mesh));
    }
    if let Some(mag) = spec_str.strip_prefix("perturbed:") {
        let magnitude: f64 = mag
            .parse()
            .map_err(|_| anyhow!("bad magnitude in --curvature {spec_str:?}"))?;
        return Ok(TargetCurvature::perturbed(mesh, seed, magnitude)?);
    }
    TargetCurvature::load(spec_str, mesh.vertex_count())
        .with_context(|| format!("reading curvature file {spec_str:?}"))
}

fn load_problem(spec: &ProblemSpec) -> Result<LoadedProblem> {
    match (&spec.problem, &spec.mesh) {
        (Some(name), None) => {
            let fixture = fixture_by_name(name, spec.seed)?;
            let has_energy = fixture.objective.has_energy();
            Ok(LoadedProblem {
                label: fixture.name,
                oracle: CountingOracle::new(fixture.objective),
                default_start: fixture.default_start,
                constraint: ConstraintSpec::none(),
                has_energy,
                conformal: None,
            })
        }
        (None, Some(path)) => {
            let curvature = spec
                .curvature
                .as_deref()
                .ok_or_else(|| anyhow!("--mesh requires --curvature"))?;
            let mesh = load_mesh(path)?;
            let target = load_targets(curvature, &mesh, spec.seed)?;
            let gb = check_gauss_bonnet(&mesh, &target);
            if !gb.feasible {
                eprintln!(
                    "warning: target curvature violates the Gauss-Bonnet condition \
                     (residual {:.3e}); the solve cannot converge",
                    gb.residual
                );
            }
            let n = mesh.vertex_count();
            let problem = ConformalProblem::new(mesh.clone(), target.clone())?;
            Ok(LoadedProblem {
                label: format!("{}", path.display()),
                oracle: CountingOracle::new(Box::new(problem)),
                default_start: Point::zeros(n),
                constraint: ConstraintSpec::pin_first(),
                has_energy: false,
                conformal: Some((mesh, target)),
            })
        }
        _ => bail!("specify exactly one of --problem or --mesh"),
    }
}

fn parse_start(arg: &Option<String>, fallback: &Point, dim: usize) -> Result<Point> {
    match arg {
        None => Ok(fallback.clone()),
        Some(text) => {
            let coords: Vec<f64> = text
                .split(',')
                .map(|p| {
                    p.trim()
                        .parse::<f64>()
                        .map_err(|_| anyhow!("bad coordinate {p:?} in --x0"))
                })
                .collect::<Result<_>>()?;
            if coords.len() != dim {
                bail!("--x0 has {} coordinates, problem has {dim}", coords.len());
            }
            Ok(Point::new(coords)?)
        }
    }
}

fn build_config(args: &SolverArgs, variant: Variant, constraint: ConstraintSpec) -> SolverConfig {
    SolverConfig {
        alpha: args.alpha,
        epsilon: args.epsilon,
        max_iterations: args.max_iter,
        use_first_condition: !(args.no_first_condition
            || variant == Variant::EnergyFreeNoFirstCond),
        constraint,
        ..SolverConfig::default()
    }
}

fn run_variant(
    problem: &LoadedProblem,
    variant: Variant,
    start: &Point,
    cfg: &SolverConfig,
) -> Result<SolveResult> {
    if variant == Variant::Armijo && !problem.has_energy {
        bail!(
            "variant 'armijo' needs an oracle with energy values; {} has none",
            problem.label
        );
    }
    let res = match variant {
        Variant::Armijo => solve_armijo_baseline(&problem.oracle, start, cfg)?,
        _ => solve(&problem.oracle, start, cfg)?,
    };
    Ok(res)
}

fn exit_code(status: SolveStatus) -> i32 {
    match status {
        SolveStatus::Converged => 0,
        SolveStatus::MaxIterations => 2,
        SolveStatus::LineSearchStalled => 3,
        SolveStatus::NotPositiveDefinite => 4,
        SolveStatus::DomainError => 5,
    }
}

fn log_enabled() -> bool {
    matches!(
        std::env::var("GRADNEWTON_LOG").as_deref(),
        Ok("info") | Ok("debug") | Ok("trace")
    )
}

fn log_trace(res: &SolveResult) {
    if !log_enabled() {
        return;
    }
    for r in &res.trace {
        eprintln!(
            "iter {:>4}: |g| = {:<12.6e} lambda^2 = {:<12.6e} t = {:<10} halvings = {} ({})",
            r.k, r.grad_norm, r.newton_decrement_sq, r.step, r.halvings, r.exit_condition
        );
    }
}

fn summary_json(res: &SolveResult, report: Option<&DiagnosticsReport>) -> serde_json::Value {
    json!({
        "status": res.status,
        "exit_code": exit_code(res.status),
        "iterations": res.iterations(),
        "final_point": res.final_point.coords(),
        "final_grad_norm": res.final_grad_norm,
        "failure_iteration": res.failure_iteration,
        "failure_message": res.failure_message,
        "counters": res.counters,
        "diagnostics": report,
    })
}

fn cmd_solve(args: SolveArgs) -> Result<i32> {
    let problem = load_problem(&args.problem)?;
    let cfg = build_config(&args.solver, args.variant, problem.constraint);
    let start = parse_start(
        &args.solver.x0,
        &problem.default_start,
        problem.oracle.dimension(),
    )?;

    let res = run_variant(&problem, args.variant, &start, &cfg)?;
    log_trace(&res);

    // diagnostics are post-hoc and may fail off the convex domain; the solve
    // result stands either way
    let report = analyze(&problem.oracle, &res, &cfg).ok();

    if let Some(path) = &args.trace_out {
        std::fs::write(path, write_csv(&res.trace))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(path) = &args.summary_out {
        let mut text = serde_json::to_string_pretty(&summary_json(&res, report.as_ref()))?;
        text.push('\n');
        std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }

    println!(
        "{}: {} after {} iterations (variant {})",
        problem.label,
        res.status,
        res.iterations(),
        args.variant.as_str()
    );
    if let Some(gn) = res.final_grad_norm {
        println!("  final |g| = {gn:.6e}");
    }
    if let Some(msg) = &res.failure_message {
        println!("  failure at iteration {:?}: {msg}", res.failure_iteration);
    }
    let c = res.counters;
    println!(
        "  oracle calls: energy {} / gradient {} / hessian {}",
        c.energy_evals, c.gradient_evals, c.hessian_evals
    );
    if let Some(rep) = &report {
        println!(
            "  bounds: m = {:.6e}, M = {:.6e}, L = {:.6e}",
            rep.bounds.eigen_min, rep.bounds.eigen_max, rep.bounds.lipschitz
        );
        if let Some(k0) = rep.convergence.quadratic_onset {
            println!("  full-step tail from iteration {k0}");
        }
    }
    if let Some((mesh, target)) = &problem.conformal {
        if res.converged() {
            let sums = angle_sums_at(mesh, res.final_point.coords())?;
            let dev = sums
                .iter()
                .zip(target.values())
                .map(|(s, t)| (s - t).abs())
                .fold(0.0_f64, f64::max);
            println!("  max angle-sum deviation from target: {dev:.3e}");
        }
    }

    Ok(exit_code(res.status))
}

fn cmd_compare(args: CompareArgs) -> Result<i32> {
    let problem = load_problem(&args.problem)?;

    let variants: Vec<Variant> = match &args.variants {
        Some(list) => list
            .split(',')
            .map(|s| Variant::parse_name(s.trim()))
            .collect::<Result<_>>()?,
        None => {
            let mut v = vec![Variant::EnergyFree, Variant::EnergyFreeNoFirstCond];
            if problem.has_energy {
                v.push(Variant::Armijo);
            }
            v
        }
    };

    let start = parse_start(
        &args.solver.x0,
        &problem.default_start,
        problem.oracle.dimension(),
    )?;

    let mut rows = Vec::new();
    let mut worst = 0i32;
    for &variant in &variants {
        problem.oracle.reset_counters();
        let cfg = build_config(&args.solver, variant, problem.constraint);
        let res = run_variant(&problem, variant, &start, &cfg)?;
        let report = analyze(&problem.oracle, &res, &cfg).ok();
        let rate = report
            .as_ref()
            .and_then(|r| r.convergence.fitted_exponent)
            .map(|p| format!("{p:.3}"))
            .unwrap_or_else(|| "-".into());
        worst = worst.max(exit_code(res.status));
        rows.push((variant, res, rate));
    }

    let header = [
        "variant",
        "status",
        "iterations",
        "energy_evals",
        "gradient_evals",
        "hessian_evals",
        "final_grad_norm",
        "observed_rate",
    ];
    println!(
        "{:<27} {:<12} {:>10} {:>12} {:>14} {:>13} {:>16} {:>13}",
        header[0], header[1], header[2], header[3], header[4], header[5], header[6], header[7]
    );
    let mut csv = header.join(",");
    csv.push('\n');
    for (variant, res, rate) in &rows {
        let gn = res
            .final_grad_norm
            .map(|g| format!("{g:e}"))
            .unwrap_or_default();
        println!(
            "{:<27} {:<12} {:>10} {:>12} {:>14} {:>13} {:>16} {:>13}",
            variant.as_str(),
            res.status,
            res.iterations(),
            res.counters.energy_evals,
            res.counters.gradient_evals,
            res.counters.hessian_evals,
            gn,
            rate
        );
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{}",
            variant.as_str(),
            res.status,
            res.iterations(),
            res.counters.energy_evals,
            res.counters.gradient_evals,
            res.counters.hessian_evals,
            gn,
            rate
        );
    }

    if let Some(path) = &args.trace_out {
        std::fs::write(path, &csv).with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(path) = &args.summary_out {
        let entries: Vec<serde_json::Value> = rows
            .iter()
            .map(|(variant, res, rate)| {
                json!({
                    "variant": variant.as_str(),
                    "status": res.status,
                    "iterations": res.iterations(),
                    "counters": res.counters,
                    "final_grad_norm": res.final_grad_norm,
                    "observed_rate": rate,
                })
            })
            .collect();
        let mut text = serde_json::to_string_pretty(&json!({ "comparison": entries }))?;
        text.push('\n');
        std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }

    Ok(worst)
}

fn cmd_validate(args: ValidateArgs) -> Result<i32> {
    let problem = load_problem(&args.problem)?;
    let n = problem.oracle.dimension();
    let mut rng = gradnewton::rng::SplitMix64::new(args.problem.seed);
    let mut all_pass = true;
    let check = |all_pass: &mut bool, name: &str, pass: bool, detail: String| {
        println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
        *all_pass &= pass;
    };

    // sample points appropriate to the problem family
    let radius = if problem.conformal.is_some() {
        0.2
    } else {
        0.75
    };
    let samples: Vec<Point> = (0..5)
        .map(|_| {
            let base = problem.default_start.coords();
            Point::new(
                base.iter()
                    .map(|b| b + rng.range(-radius, radius))
                    .collect(),
            )
            .unwrap()
        })
        .collect();

    if problem.has_energy {
        let mut worst = 0.0_f64;
        let mut ok = true;
        for u in &samples {
            match fdcheck::check_gradient(&problem.oracle, u) {
                Ok(rep) => {
                    worst = worst.max(rep.rel_err);
                    ok &= rep.pass();
                }
                Err(e) => {
                    ok = false;
                    eprintln!("gradient check failed to evaluate: {e}");
                }
            }
        }
        check(
            &mut all_pass,
            "gradient vs energy finite differences",
            ok,
            format!(
                "max rel err {worst:.3e} (tol {:.0e})",
                fdcheck::GRADIENT_TOL
            ),
        );
    }

    {
        let mut worst = 0.0_f64;
        let mut ok = true;
        for u in &samples {
            match fdcheck::check_hessian(&problem.oracle, u) {
                Ok(rep) => {
                    worst = worst.max(rep.rel_err);
                    ok &= rep.pass();
                }
                Err(e) => {
                    ok = false;
                    eprintln!("hessian check failed to evaluate: {e}");
                }
            }
        }
        check(
            &mut all_pass,
            "hessian vs gradient finite differences",
            ok,
            format!("max rel err {worst:.3e} (tol {:.0e})", fdcheck::HESSIAN_TOL),
        );
    }

    {
        let h = problem.oracle.hessian(&samples[0])?;
        let mut max_asym = 0.0_f64;
        for i in 0..n {
            for j in 0..i {
                max_asym = max_asym.max((h.get(i, j) - h.get(j, i)).abs());
            }
        }
        check(
            &mut all_pass,
            "hessian symmetry",
            max_asym == 0.0,
            format!("max asymmetry {max_asym:.3e}"),
        );
    }

    if let Some((mesh, target)) = &problem.conformal {
        let h = problem.oracle.hessian(&samples[0])?;
        let h1 = h.mul_vec(&vec![1.0; n]);
        let worst = h1.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
        let scale = h.frobenius_norm();
        check(
            &mut all_pass,
            "hessian nullspace (H*1 = 0)",
            worst <= 1e-12 * scale,
            format!("max |(H*1)_i| = {worst:.3e}"),
        );

        let (mu_min, mu_max) = linalg::eigen_bounds(&h, &ConstraintSpec::pin_first())?;
        check(
            &mut all_pass,
            "reduced hessian positive definite",
            mu_min > 0.0,
            format!("eigenvalues in [{mu_min:.6e}, {mu_max:.6e}]"),
        );

        let gb = check_gauss_bonnet(mesh, target);
        check(
            &mut all_pass,
            "Gauss-Bonnet feasibility",
            gb.feasible,
            format!(
                "sum of defects {:.12} vs 2*pi*chi = {:.12} (residual {:.3e})",
                gb.defect_sum, gb.expected, gb.residual
            ),
        );
    }

    Ok(if all_pass { 0 } else { 1 })
}

fn cmd_demo(args: DemoArgs) -> Result<i32> {
    if args.x0 >= 0.0 {
        eprintln!(
            "warning: the overshoot needs a start below the minimum (x0 < 0); \
             from x0 = {} the sign test accepts the full step immediately",
            args.x0
        );
    }
    let boundary = -1.0 / (3.0 * args.eps);
    if args.x0 <= boundary {
        bail!(
            "x0 = {} is outside the convex region x > {boundary}",
            args.x0
        );
    }

    let start = Point::new(vec![args.x0])?;
    let solver_args = SolverArgs {
        x0: None,
        alpha: args.alpha,
        epsilon: 1e-10,
        max_iter: 200,
        no_first_condition: false,
    };

    let cfg_first = build_config(&solver_args, Variant::EnergyFree, ConstraintSpec::none());
    let cfg_sign = SolverConfig {
        use_first_condition: false,
        ..cfg_first.clone()
    };

    let sign_oracle = CountingOracle::new(gradnewton::problems::make_cubic(args.eps)?);
    let sign = solve(&sign_oracle, &start, &cfg_sign)?;
    let first_oracle = CountingOracle::new(gradnewton::problems::make_cubic(args.eps)?);
    let first = solve(&first_oracle, &start, &cfg_first)?;

    println!(
        "cubic counterexample: f(x) = x^2 + {} x^3, x0 = {}, alpha = {}",
        args.eps, args.x0, args.alpha
    );
    println!(
        "full Newton steps from x < 0 overshoot past the minimum, so the sign-only \
         search settles on t = 1/2; the averaged-slope condition restores t = 1\n"
    );

    let sign_x: Vec<f64> = sign.iterates.iter().map(|p| p.coords()[0]).collect();
    let first_x: Vec<f64> = first.iterates.iter().map(|p| p.coords()[0]).collect();
    let onset = first.trace.iter().position(|r| r.step == 1.0);

    println!(
        "{:>4} | {:^31} | {:^31}",
        "", "sign-only line search", "with first condition"
    );
    println!(
        "{:>4} | {:>8} {:>12} {:>9} | {:>8} {:>12} {:>9}",
        "k", "step", "|x_k|", "ratio", "step", "|x_k|", "ratio"
    );
    let rows = sign.trace.len().max(first.trace.len());
    for k in 0..rows {
        let mut line = format!("{k:>4} | ");
        match sign.trace.get(k) {
            Some(r) => {
                let ratio = if sign_x[k].abs() > 0.0 {
                    format!("{:.4}", (sign_x[k + 1] / sign_x[k]).abs())
                } else {
                    "-".into()
                };
                let _ = write!(
                    line,
                    "{:>8} {:>12.4e} {:>9}",
                    r.step,
                    sign_x[k].abs(),
                    ratio
                );
            }
            None => {
                let _ = write!(line, "{:>8} {:>12} {:>9}", "", "", "");
            }
        }
        let _ = write!(line, " | ");
        if let Some(r) = first.trace.get(k) {
            let ratio = if first_x[k].abs() > 0.0 {
                format!("{:.4}", (first_x[k + 1] / first_x[k]).abs())
            } else {
                "-".into()
            };
            let _ = write!(
                line,
                "{:>8} {:>12.4e} {:>9}",
                r.step,
                first_x[k].abs(),
                ratio
            );
            if onset == Some(k) {
                let _ = write!(line, "  <- t = 1 from here");
            }
        }
        println!("{}", line.trim_end());
    }

    println!();
    println!(
        "sign-only:       {} in {} iterations, gradient evals {}",
        sign.status,
        sign.iterations(),
        sign.counters.gradient_evals
    );
    println!(
        "first condition: {} in {} iterations, gradient evals {}",
        first.status,
        first.iterations(),
        first.counters.gradient_evals
    );

    let worst = exit_code(sign.status).max(exit_code(first.status));
    Ok(worst)
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };

    let outcome = match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Validate(args) => cmd_validate(args),
        Command::DemoCounterexample(args) => cmd_demo(args),
    };

    match outcome {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(EXIT_USAGE);
        }
    }
}
