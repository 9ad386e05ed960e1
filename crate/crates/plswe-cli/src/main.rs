//! Batch command-line front end: instance generation, decoding, early
//! termination, bound computation and Monte-Carlo experiments.
//!
//! Every command is deterministic given its flags; randomized commands
//! require an explicit seed. Exit codes: 0 success, 1 usage error, 2 decode
//! failure.

use std::collections::BTreeSet;
use std::fs;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use plswe::bounds::{self, parse_rational, DegreeContext, ErrorBudget};
use plswe::earlyterm::{run_early_termination, CandidateStrategy, Mode, Outcome, TerminationConfig};
use plswe::errors::{inject_uniform, ErrorProcess, SimStream};
use plswe::harness::{
    self, BoundChoice, BudgetSpec, CorruptionKind, ExperimentKind, ExperimentSpec, ScheduleSpec,
    StructureSpec, SupportScoring, TerminationSpec,
};
use plswe::instance::{poly_to_coeffs, GroundTruth, InstanceFile, PLSInstance};
use plswe::keyeq::{find_solution, EvaluationTable, KeyEqParams};
use plswe::{Field, PolyMatrix, PolyVector, Polynomial};

#[derive(Parser)]
#[command(name = "plswe", version, about = "Polynomial linear system solving with errors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance file with certified ground truth.
    Gen(GenArgs),
    /// Solve an instance file from scratch (error-free reference decode).
    Solve(SolveArgs),
    /// Decode at a fixed evaluation count, optionally injecting errors.
    Decode(DecodeArgs),
    /// Run an early-termination driver over a simulated node stream.
    Earlyterm(EarlyTermArgs),
    /// Print evaluation counts and stopping predictions.
    Bounds(BoundsArgs),
    /// Run a Monte-Carlo experiment and write its report.
    Montecarlo(MonteCarloArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    q: u64,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    deg_a: Option<usize>,
    #[arg(long)]
    deg_b: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Explicit system matrix as JSON (n x n array of coefficient arrays,
    /// lowest degree first), bypassing random generation.
    #[arg(long)]
    a: Option<String>,
    /// Explicit right-hand side as JSON (n coefficient arrays).
    #[arg(long)]
    b: Option<String>,
    #[arg(long)]
    out: String,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    instance: String,
}

#[derive(Args)]
struct DecodeArgs {
    #[arg(long)]
    instance: String,
    /// Evaluation table file ({"points": [...], "columns": [[...]]}) to
    /// decode instead of simulating evaluations.
    #[arg(long)]
    evals: Option<String>,
    /// 1-based evaluation indices to corrupt uniformly.
    #[arg(long, value_delimiter = ',')]
    errors: Vec<usize>,
    #[arg(long)]
    error_seed: Option<u64>,
    #[arg(long, default_value_t = 0)]
    tau: i64,
    #[arg(long, value_enum, default_value_t = BoundFlag::Kpsw)]
    bound: BoundFlag,
    #[arg(long)]
    n_bound: Option<usize>,
    #[arg(long)]
    d_bound: Option<usize>,
    #[arg(long)]
    nu: Option<usize>,
    #[arg(long)]
    theta: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundFlag {
    Kpsw,
    Glz,
}

#[derive(Args)]
struct EarlyTermArgs {
    #[arg(long)]
    instance: String,
    #[arg(long, value_enum)]
    mode: ModeFlag,
    #[arg(long)]
    tau: Option<i64>,
    /// Error rate as an exact fraction, e.g. "1/4".
    #[arg(long)]
    rho: Option<String>,
    #[arg(long, value_enum, default_value_t = StrategyFlag::Exhaustive)]
    strategy: StrategyFlag,
    /// 1-based stream positions to corrupt.
    #[arg(long, value_delimiter = ',')]
    errors: Vec<usize>,
    #[arg(long, value_enum, default_value_t = CorruptionFlag::Uniform)]
    corruption: CorruptionFlag,
    /// Actual error rate of the simulated stream (defaults to honest).
    #[arg(long)]
    true_rate: Option<String>,
    #[arg(long)]
    error_seed: Option<u64>,
    #[arg(long)]
    n_bound: Option<usize>,
    #[arg(long)]
    d_bound: Option<usize>,
    #[arg(long, default_value_t = 512)]
    max_l: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeFlag {
    Alg1,
    Alg2,
    Alg3,
    Alg4,
}

impl From<ModeFlag> for Mode {
    fn from(m: ModeFlag) -> Mode {
        match m {
            ModeFlag::Alg1 => Mode::Alg1,
            ModeFlag::Alg2 => Mode::Alg2,
            ModeFlag::Alg3 => Mode::Alg3,
            ModeFlag::Alg4 => Mode::Alg4,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyFlag {
    Exhaustive,
    Two,
}

impl From<StrategyFlag> for CandidateStrategy {
    fn from(s: StrategyFlag) -> CandidateStrategy {
        match s {
            StrategyFlag::Exhaustive => CandidateStrategy::Exhaustive,
            StrategyFlag::Two => CandidateStrategy::TwoCandidates,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CorruptionFlag {
    Uniform,
    Case1,
    Case2,
}

impl From<CorruptionFlag> for CorruptionKind {
    fn from(c: CorruptionFlag) -> CorruptionKind {
        match c {
            CorruptionFlag::Uniform => CorruptionKind::Uniform,
            CorruptionFlag::Case1 => CorruptionKind::StructuredCase1,
            CorruptionFlag::Case2 => CorruptionKind::StructuredCase2,
        }
    }
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    n_bound: usize,
    #[arg(long)]
    d_bound: usize,
    #[arg(long)]
    deg_a: usize,
    #[arg(long)]
    deg_b: usize,
    #[arg(long, default_value_t = 0)]
    tau: i64,
    #[arg(long)]
    rho: Option<String>,
    #[arg(long)]
    deg_v: Option<i64>,
    #[arg(long)]
    deg_d: Option<i64>,
}

#[derive(Args)]
struct MonteCarloArgs {
    /// Experiment spec file (JSON); overrides all inline flags.
    #[arg(long)]
    spec: Option<String>,
    #[arg(long, value_enum)]
    experiment: Option<ExperimentFlag>,
    #[arg(long)]
    q: Option<u64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    deg_a: Option<usize>,
    #[arg(long)]
    deg_b: Option<usize>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = CorruptionFlag::Uniform)]
    corruption: CorruptionFlag,
    #[arg(long, default_value_t = 0)]
    support_size: usize,
    #[arg(long, default_value_t = 0)]
    tau: usize,
    #[arg(long, default_value_t = 0)]
    slack_n: usize,
    #[arg(long, default_value_t = 0)]
    slack_d: usize,
    /// kpsw, glz, or an explicit integer count.
    #[arg(long, default_value = "kpsw")]
    bound: String,
    #[arg(long)]
    nu: Option<usize>,
    #[arg(long)]
    theta: Option<usize>,
    #[arg(long, value_enum, default_value_t = ScoringFlag::Planted)]
    scoring: ScoringFlag,
    #[arg(long, default_value_t = false)]
    check_recovery: bool,
    #[arg(long, default_value_t = false)]
    random_points: bool,
    // termination-only flags
    #[arg(long, value_enum)]
    mode: Option<ModeFlag>,
    #[arg(long)]
    rho: Option<String>,
    #[arg(long, value_enum, default_value_t = StrategyFlag::Exhaustive)]
    strategy: StrategyFlag,
    /// 1-based fixed error positions for the stream schedule.
    #[arg(long, value_delimiter = ',')]
    schedule_errors: Vec<usize>,
    /// Random per-trial support: size within the first `spread` positions.
    #[arg(long)]
    schedule_random: Option<usize>,
    #[arg(long, default_value_t = 8)]
    spread: usize,
    #[arg(long)]
    true_rate: Option<String>,
    #[arg(long, default_value_t = 512)]
    max_l: usize,
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    rows: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExperimentFlag {
    Structure,
    Termination,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScoringFlag {
    Planted,
    Actual,
}

enum CliError {
    Usage(String),
    Decode(String),
}

impl CliError {
    fn usage<E: std::fmt::Display>(e: E) -> CliError {
        CliError::Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are not usage errors
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let result = match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Decode(args) => cmd_decode(args),
        Command::Earlyterm(args) => cmd_earlyterm(args),
        Command::Bounds(args) => cmd_bounds(args),
        Command::Montecarlo(args) => cmd_montecarlo(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Decode(msg)) => {
            eprintln!("decode failure: {msg}");
            ExitCode::from(2)
        }
    }
}

fn load_instance(path: &str) -> Result<(PLSInstance, Option<GroundTruth>), CliError> {
    let text = fs::read_to_string(path).map_err(CliError::usage)?;
    let file: InstanceFile = serde_json::from_str(&text).map_err(CliError::usage)?;
    file.to_instance().map_err(CliError::Usage)
}

fn require_truth(
    inst: &PLSInstance,
    truth: Option<GroundTruth>,
) -> Result<GroundTruth, CliError> {
    match truth {
        Some(t) => Ok(t),
        None => inst.reference_solve().map_err(CliError::usage),
    }
}

fn cmd_gen(args: GenArgs) -> Result<(), CliError> {
    let field = Field::new(args.q).map_err(CliError::usage)?;
    let inst = match (&args.a, &args.b) {
        (Some(a_json), Some(b_json)) => {
            let a: Vec<Vec<Vec<u64>>> = serde_json::from_str(a_json).map_err(CliError::usage)?;
            let b: Vec<Vec<u64>> = serde_json::from_str(b_json).map_err(CliError::usage)?;
            let n = a.len();
            if a.iter().any(|row| row.len() != n) || b.len() != n {
                return Err(CliError::Usage("explicit A must be square and match b".into()));
            }
            let entries = a
                .iter()
                .flatten()
                .map(|c| Polynomial::from_coeffs(field, c))
                .collect();
            let bvec = PolyVector::new(b.iter().map(|c| Polynomial::from_coeffs(field, c)).collect());
            PLSInstance::new(field, PolyMatrix::new(n, n, entries), bvec)
                .map_err(CliError::usage)?
        }
        (None, None) => {
            let (Some(n), Some(deg_a), Some(deg_b)) = (args.n, args.deg_a, args.deg_b) else {
                return Err(CliError::Usage(
                    "random generation needs --n, --deg-a and --deg-b".into(),
                ));
            };
            let Some(seed) = args.seed else {
                return Err(CliError::Usage(
                    "random generation needs an explicit --seed".into(),
                ));
            };
            PLSInstance::generate(field, n, deg_a, deg_b, seed).map_err(CliError::usage)?
        }
        _ => {
            return Err(CliError::Usage(
                "--a and --b must be given together".into(),
            ))
        }
    };
    let truth = inst.reference_solve().map_err(CliError::usage)?;
    let file = InstanceFile::from_instance(&inst, Some(&truth));
    let json = serde_json::to_string_pretty(&file).map_err(CliError::usage)?;
    fs::write(&args.out, json + "\n").map_err(CliError::usage)?;
    Ok(())
}

fn cmd_solve(args: SolveArgs) -> Result<(), CliError> {
    let (inst, _) = load_instance(&args.instance)?;
    let truth = inst.reference_solve().map_err(|e| CliError::Decode(e.to_string()))?;
    print_solution(&truth.solution, None);
    Ok(())
}

fn print_solution(solution: &plswe::RationalSolution, l: Option<usize>) {
    let v: Vec<Vec<u64>> = solution.v().entries().iter().map(poly_to_coeffs).collect();
    let d = poly_to_coeffs(solution.d());
    let mut doc = serde_json::json!({ "v": v, "d": d });
    if let Some(l) = l {
        doc["l"] = serde_json::json!(l);
    }
    println!("{doc}");
}

fn cmd_decode(args: DecodeArgs) -> Result<(), CliError> {
    if args.nu.is_some() != args.theta.is_some() {
        return Err(CliError::Usage("--nu and --theta must be given together".into()));
    }
    if args.tau < 0 {
        return Err(CliError::Usage("--tau must be nonnegative".into()));
    }
    let tau = args.tau as usize;
    let (inst, truth) = load_instance(&args.instance)?;
    let field = inst.field();

    let (num_bound, den_bound) = match (args.n_bound, args.d_bound) {
        (Some(n), Some(d)) => (n, d),
        (nb, db) => {
            let t = require_truth(&inst, truth.clone())?;
            (nb.unwrap_or(t.num_bound()), db.unwrap_or(t.den_bound()))
        }
    };
    let ctx = DegreeContext::new(inst.n(), num_bound, den_bound, inst.deg_a(), inst.deg_b())
        .map_err(CliError::usage)?;
    let (nu, theta) = match (args.nu, args.theta) {
        (Some(nu), Some(theta)) => (nu, theta),
        _ => (num_bound + tau, den_bound + tau),
    };
    let params = KeyEqParams::new(nu, theta).map_err(CliError::usage)?;

    let table = match &args.evals {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(CliError::usage)?;
            let doc: serde_json::Value = serde_json::from_str(&text).map_err(CliError::usage)?;
            parse_eval_table(field, inst.n(), &doc)?
        }
        None => {
            let extra = match args.bound {
                BoundFlag::Kpsw => tau,
                BoundFlag::Glz => bounds::ceil_div(tau, inst.n()),
            };
            let l = bounds::eval_count(&ctx, nu as i64, theta as i64) + extra as i64;
            let l = l.max(0) as usize;
            let t = require_truth(&inst, truth.clone())?;
            let points = inst.sequential_points(l).map_err(CliError::usage)?;
            let honest = inst.honest_evaluate(&t, &points).map_err(CliError::usage)?;
            if args.errors.is_empty() {
                honest
            } else {
                let Some(seed) = args.error_seed else {
                    return Err(CliError::Usage(
                        "--errors needs an explicit --error-seed".into(),
                    ));
                };
                let support = to_zero_based(&args.errors, l)?;
                inject_uniform(&honest, &support, seed).map_err(CliError::usage)?
            }
        }
    };

    let l = table.len();
    match find_solution(&table, params, Some(&inst)) {
        Ok(solution) => {
            print_solution(&solution, Some(l));
            Ok(())
        }
        Err(e) => Err(CliError::Decode(e.to_string())),
    }
}

fn parse_eval_table(
    field: Field,
    n: usize,
    doc: &serde_json::Value,
) -> Result<EvaluationTable, CliError> {
    let points: Vec<u64> =
        serde_json::from_value(doc["points"].clone()).map_err(CliError::usage)?;
    let columns: Vec<Vec<u64>> =
        serde_json::from_value(doc["columns"].clone()).map_err(CliError::usage)?;
    let points = points.iter().map(|&p| field.elem(p)).collect();
    let columns = columns
        .iter()
        .map(|c| c.iter().map(|&v| field.elem(v)).collect())
        .collect();
    EvaluationTable::new(field, n, points, columns).map_err(CliError::usage)
}

fn to_zero_based(indices: &[usize], l: usize) -> Result<BTreeSet<usize>, CliError> {
    let mut out = BTreeSet::new();
    for &i in indices {
        if i == 0 || i > l {
            return Err(CliError::Usage(format!(
                "error index {i} outside 1..={l}"
            )));
        }
        out.insert(i - 1);
    }
    Ok(out)
}

fn cmd_earlyterm(args: EarlyTermArgs) -> Result<(), CliError> {
    let (inst, truth) = load_instance(&args.instance)?;
    let file_truth = truth.clone();
    let truth = require_truth(&inst, truth)?;
    let mode: Mode = args.mode.into();

    let budget = match (mode.uses_fixed_budget(), args.tau, &args.rho) {
        (true, Some(tau), None) => {
            if tau < 0 {
                return Err(CliError::Usage("--tau must be nonnegative".into()));
            }
            ErrorBudget::Fixed(tau as usize)
        }
        (false, None, Some(rho)) => {
            let rate = parse_rational(rho).map_err(CliError::usage)?;
            ErrorBudget::linear_rate(rate).map_err(CliError::usage)?
        }
        (true, _, _) => return Err(CliError::Usage("this mode needs --tau (and no --rho)".into())),
        (false, _, _) => return Err(CliError::Usage("this mode needs --rho (and no --tau)".into())),
    };

    let process = if !args.errors.is_empty() {
        let support = to_zero_based(&args.errors, usize::MAX - 1)?;
        match CorruptionKind::from(args.corruption) {
            CorruptionKind::Uniform => {
                let Some(seed) = args.error_seed else {
                    return Err(CliError::Usage(
                        "uniform corruption needs an explicit --error-seed".into(),
                    ));
                };
                ErrorProcess::UniformOnSupport { support, seed }
            }
            CorruptionKind::StructuredCase1 => ErrorProcess::StructuredCase1 { support },
            CorruptionKind::StructuredCase2 => ErrorProcess::StructuredCase2 { support },
        }
    } else if let Some(rate) = &args.true_rate {
        let rate = parse_rational(rate).map_err(CliError::usage)?;
        let Some(seed) = args.error_seed else {
            return Err(CliError::Usage(
                "--true-rate needs an explicit --error-seed".into(),
            ));
        };
        ErrorProcess::RateBounded { rate, seed }
    } else {
        ErrorProcess::Honest
    };

    let num_bound = args.n_bound.unwrap_or(truth.num_bound());
    let den_bound = args.d_bound.unwrap_or(truth.den_bound());
    let ctx = DegreeContext::new(inst.n(), num_bound, den_bound, inst.deg_a(), inst.deg_b())
        .map_err(CliError::usage)?;
    let cfg = TerminationConfig {
        mode,
        ctx,
        budget,
        strategy: args.strategy.into(),
        max_l: args.max_l,
        truth_degrees: truth.deg_v.as_i64().zip(truth.deg_d.as_i64()),
    };
    let stream = SimStream::new(inst, truth.clone(), process);
    let report = run_early_termination(&cfg, stream).map_err(|e| CliError::Decode(e.to_string()))?;
    let record = report.to_record();
    println!(
        "{}",
        serde_json::to_string_pretty(&record).map_err(CliError::usage)?
    );
    match &report.outcome {
        Outcome::Solved(sol) => {
            // compare against the file's ground truth when it had one
            if file_truth.is_some() && *sol != truth.solution {
                Err(CliError::Decode("solution differs from ground truth".into()))
            } else {
                Ok(())
            }
        }
        Outcome::Failure(msg) => Err(CliError::Decode(msg.clone())),
    }
}

fn cmd_bounds(args: BoundsArgs) -> Result<(), CliError> {
    if args.tau < 0 {
        return Err(CliError::Usage("--tau must be nonnegative".into()));
    }
    let tau = args.tau as usize;
    let ctx = DegreeContext::new(args.n, args.n_bound, args.d_bound, args.deg_a, args.deg_b)
        .map_err(CliError::usage)?;
    let deg_v = args.deg_v.unwrap_or(args.n_bound as i64 - 1);
    let deg_d = args.deg_d.unwrap_or(args.d_bound as i64 - 1);

    println!(
        "L(N,D) = {}",
        bounds::eval_count(&ctx, args.n_bound as i64, args.d_bound as i64)
    );
    println!("L_KPSW = {}", bounds::l_kpsw(&ctx, tau));
    println!("L_GLZ = {}", bounds::l_glz(&ctx, tau));
    let stop_no_err = bounds::predict_stop_fixed(&ctx, tau as i64, deg_v, deg_d, |_| 0, None)
        .map_err(CliError::usage)?;
    let stop_max_err =
        bounds::predict_stop_fixed(&ctx, tau as i64, deg_v, deg_d, |_| tau as i64, None)
            .map_err(CliError::usage)?;
    println!("stop_fixed(0 errors) = {stop_no_err}");
    println!("stop_fixed({tau} errors) = {stop_max_err}");
    if let Some(rho) = &args.rho {
        let rate = parse_rational(rho).map_err(CliError::usage)?;
        let (l1, t1) = bounds::linear_counts(&ctx, rate, args.n_bound as i64, args.d_bound as i64, 1)
            .map_err(CliError::usage)?;
        let (ln, tn) = bounds::linear_counts(
            &ctx,
            rate,
            args.n_bound as i64,
            args.d_bound as i64,
            args.n,
        )
        .map_err(CliError::usage)?;
        println!("linear(N,D) worst-case: L = {l1}, tau = {t1}");
        println!("linear(N,D) random: L = {ln}, tau = {tn}");
        let s1 = bounds::stop_upper_bound_linear(&ctx, rate, deg_v, deg_d, 1)
            .map_err(CliError::usage)?;
        let sn = bounds::stop_upper_bound_linear(&ctx, rate, deg_v, deg_d, args.n)
            .map_err(CliError::usage)?;
        println!("stop_linear worst-case <= {s1}");
        println!("stop_linear random <= {sn}");
    }
    Ok(())
}

fn cmd_montecarlo(args: MonteCarloArgs) -> Result<(), CliError> {
    let spec: ExperimentSpec = match &args.spec {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(CliError::usage)?;
            serde_json::from_str(&text).map_err(CliError::usage)?
        }
        None => build_inline_spec(&args)?,
    };
    let report = harness::run_experiment(&spec).map_err(|e| CliError::Decode(e.to_string()))?;
    eprintln!("wall time: {:.3}s", report.wall_time_secs);
    let json = serde_json::to_string_pretty(&report).map_err(CliError::usage)?;
    match &args.out {
        Some(path) => fs::write(path, json + "\n").map_err(CliError::usage)?,
        None => println!("{json}"),
    }
    if let Some(path) = &args.rows {
        fs::write(path, report.render_rows()).map_err(CliError::usage)?;
    }
    Ok(())
}

fn build_inline_spec(args: &MonteCarloArgs) -> Result<ExperimentSpec, CliError> {
    let missing = |what: &str| CliError::Usage(format!("inline experiment needs --{what}"));
    let experiment = args.experiment.ok_or_else(|| missing("experiment"))?;
    let q = args.q.ok_or_else(|| missing("q"))?;
    let n = args.n.ok_or_else(|| missing("n"))?;
    let deg_a = args.deg_a.ok_or_else(|| missing("deg-a"))?;
    let deg_b = args.deg_b.ok_or_else(|| missing("deg-b"))?;
    let trials = args.trials.ok_or_else(|| missing("trials"))?;
    let master_seed = args.seed.ok_or_else(|| missing("seed"))?;
    let kind = match experiment {
        ExperimentFlag::Structure => {
            let bound = match args.bound.as_str() {
                "kpsw" => BoundChoice::Kpsw,
                "glz" => BoundChoice::Glz,
                other => match other.parse::<usize>() {
                    Ok(l) => BoundChoice::Explicit(l),
                    Err(_) => {
                        return Err(CliError::Usage(format!(
                            "--bound must be kpsw, glz or an integer, got {other}"
                        )))
                    }
                },
            };
            let params_override = match (args.nu, args.theta) {
                (Some(nu), Some(theta)) => Some((nu, theta)),
                (None, None) => None,
                _ => {
                    return Err(CliError::Usage(
                        "--nu and --theta must be given together".into(),
                    ))
                }
            };
            ExperimentKind::Structure(StructureSpec {
                corruption: args.corruption.into(),
                support_size: args.support_size,
                tau: args.tau,
                slack_n: args.slack_n,
                slack_d: args.slack_d,
                bound,
                params_override,
                scoring: match args.scoring {
                    ScoringFlag::Planted => SupportScoring::Planted,
                    ScoringFlag::Actual => SupportScoring::Actual,
                },
                check_recovery: args.check_recovery,
                random_points: args.random_points,
            })
        }
        ExperimentFlag::Termination => {
            let mode: Mode = args.mode.ok_or_else(|| missing("mode"))?.into();
            let budget = if mode.uses_fixed_budget() {
                BudgetSpec::Fixed { tau: args.tau }
            } else {
                BudgetSpec::Rate {
                    rho: args.rho.clone().ok_or_else(|| missing("rho"))?,
                }
            };
            let schedule = if let Some(rate) = &args.true_rate {
                ScheduleSpec::RateBounded {
                    rho_true: rate.clone(),
                }
            } else if let Some(size) = args.schedule_random {
                ScheduleSpec::RandomSupport {
                    size,
                    spread: args.spread,
                    corruption: args.corruption.into(),
                }
            } else {
                let indices = args
                    .schedule_errors
                    .iter()
                    .map(|&i| {
                        i.checked_sub(1)
                            .ok_or_else(|| CliError::Usage("error indices are 1-based".into()))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                ScheduleSpec::FixedSupport {
                    indices,
                    corruption: args.corruption.into(),
                }
            };
            ExperimentKind::Termination(TerminationSpec {
                mode,
                budget,
                strategy: args.strategy.into(),
                schedule,
                slack_n: args.slack_n,
                slack_d: args.slack_d,
                max_l: args.max_l,
            })
        }
    };
    Ok(ExperimentSpec {
        q,
        n,
        deg_a,
        deg_b,
        trials,
        master_seed,
        kind,
    })
}
