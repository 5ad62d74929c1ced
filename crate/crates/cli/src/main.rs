//! `hhc` — solve, sweep, compare, and generate caregiver-assignment
//! instances from the command line.
//!
//! Exit codes are a stable contract: 0 on success, 2 on any validation
//! error (bad flags, unreadable or malformed files, invalid parameters),
//! 3 when a solver stops at its limits without a feasible incumbent.

use clap::{Args, Parser, Subcommand, ValueEnum};
use hhc_core::{
    check_feasibility, evaluate_objective, generate, greedy_construct, load_instance,
    save_instance, save_solution, solve_exact, tabu_improve, GeneratorParams, Instance,
    PenaltyWeights, Rational, SolutionMetrics, SolveLimits, SolveStatus, TabuParams,
};
use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

#[derive(Parser)]
#[command(
    name = "hhc",
    version,
    about = "Home health care caregiver-to-patient assignment solver"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance and write a solution document
    Solve(SolveArgs),
    /// Sweep penalty-weight grids into a plot-ready CSV trade-off table
    Sweep(SweepArgs),
    /// Compare greedy, tabu, and (on small instances) the exact solver
    Compare(CompareArgs),
    /// Generate a seeded random instance file
    Gen(GenArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
enum Algorithm {
    Exact,
    Greedy,
    Tabu,
}

impl Algorithm {
    fn name(self) -> &'static str {
        match self {
            Algorithm::Exact => "exact",
            Algorithm::Greedy => "greedy",
            Algorithm::Tabu => "tabu",
        }
    }
}

fn parse_rational(text: &str) -> Result<Rational, String> {
    text.parse().map_err(|e| format!("{e}"))
}

fn parse_u64_range(text: &str) -> Result<(u64, u64), String> {
    let (lo, hi) = text
        .split_once(':')
        .ok_or_else(|| format!("expected LO:HI, got {text:?}"))?;
    let lo: u64 = lo.trim().parse().map_err(|e| format!("{e}"))?;
    let hi: u64 = hi.trim().parse().map_err(|e| format!("{e}"))?;
    Ok((lo, hi))
}

fn parse_rational_range(text: &str) -> Result<(Rational, Rational), String> {
    let (lo, hi) = text
        .split_once(':')
        .ok_or_else(|| format!("expected LO:HI, got {text:?}"))?;
    Ok((parse_rational(lo.trim())?, parse_rational(hi.trim())?))
}

#[derive(Args)]
struct SolveArgs {
    /// Instance document path
    instance: PathBuf,
    #[arg(long, value_enum, default_value_t = Algorithm::Greedy)]
    algorithm: Algorithm,
    /// Equity penalty weight
    #[arg(long, value_parser = parse_rational, default_value = "0")]
    theta: Rational,
    /// Efficacy penalty weight
    #[arg(long, value_parser = parse_rational, default_value = "0")]
    alpha: Rational,
    /// Greedy fill-rate target in (0, 1]
    #[arg(long, value_parser = parse_rational, default_value = "1")]
    beta_target: Rational,
    /// Seed for tabu tie-breaking
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Wall-clock limit in seconds for tabu and exact
    #[arg(long, default_value_t = 10.0)]
    time_limit: f64,
    /// Where to write the solution document
    #[arg(long, default_value = "solution.json")]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    /// Instance document path
    instance: PathBuf,
    /// Equity weight grid, e.g. --theta 0,1,10
    #[arg(long, value_parser = parse_rational, value_delimiter = ',', default_value = "0")]
    theta: Vec<Rational>,
    /// Efficacy weight grid
    #[arg(long, value_parser = parse_rational, value_delimiter = ',', default_value = "0")]
    alpha: Vec<Rational>,
    /// Algorithms to run at every grid point
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Algorithm::Greedy, Algorithm::Tabu])]
    algorithm: Vec<Algorithm>,
    #[arg(long, value_parser = parse_rational, default_value = "1")]
    beta_target: Rational,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10.0)]
    time_limit: f64,
    /// Write the CSV table here instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    /// Instance document path
    instance: PathBuf,
    #[arg(long, value_parser = parse_rational, default_value = "0")]
    theta: Rational,
    #[arg(long, value_parser = parse_rational, default_value = "0")]
    alpha: Rational,
    #[arg(long, value_parser = parse_rational, default_value = "1")]
    beta_target: Rational,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10.0)]
    time_limit: f64,
    /// Write the CSV table here instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 5)]
    caregivers: usize,
    #[arg(long, default_value_t = 10)]
    patients: usize,
    #[arg(long, default_value_t = 4)]
    services: usize,
    /// Demand hours per (patient, service), LO:HI inclusive
    #[arg(long, value_parser = parse_u64_range, default_value = "0:8")]
    demand: (u64, u64),
    /// Caregiver capacity hours, LO:HI inclusive
    #[arg(long, value_parser = parse_u64_range, default_value = "20:40")]
    capacity: (u64, u64),
    /// Unit cost range, LO:HI (sampled in hundredths)
    #[arg(long, value_parser = parse_rational_range, default_value = "0.5:4")]
    cost: (Rational, Rational),
    /// Patient utility range, LO:HI (sampled in hundredths)
    #[arg(long, value_parser = parse_rational_range, default_value = "1:10")]
    utility: (Rational, Rational),
    /// Probability that a caregiver has each skill
    #[arg(long, default_value_t = 0.6)]
    skill_density: f64,
    /// Budget as a multiple of the cheapest full-service cost
    #[arg(long, value_parser = parse_rational, default_value = "0.8")]
    budget_factor: Rational,
    /// Max caregivers per patient, LO:HI inclusive
    #[arg(long, value_parser = parse_u64_range, default_value = "1:3")]
    patient_cap: (u64, u64),
    /// Max patients per caregiver, LO:HI inclusive
    #[arg(long, value_parser = parse_u64_range, default_value = "1:5")]
    caregiver_cap: (u64, u64),
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Where to write the instance document
    #[arg(long, default_value = "instance.json")]
    out: PathBuf,
}

#[derive(Debug)]
enum AppError {
    /// Anything wrong with inputs: flags, files, parameters. Exit code 2.
    Validation(String),
    /// A solver hit its limits without producing a feasible incumbent.
    /// Exit code 3.
    NoIncumbent(String),
}

impl fmt::Display for AppError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AppError::Validation(msg) => write!(f, "{msg}"),
            AppError::NoIncumbent(msg) => write!(f, "{msg}"),
        }
    }
}

impl AppError {
    fn exit_code(&self) -> u8 {
        match self {
            AppError::Validation(_) => 2,
            AppError::NoIncumbent(_) => 3,
        }
    }
}

fn validation<E: fmt::Display>(err: E) -> AppError {
    AppError::Validation(err.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Gen(args) => cmd_gen(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

fn time_limit_duration(seconds: f64) -> Result<Duration, AppError> {
    if seconds.is_nan() || seconds <= 0.0 {
        return Err(AppError::Validation(format!(
            "time limit must be positive, got {seconds}"
        )));
    }
    Ok(Duration::from_secs_f64(seconds))
}

struct SolveOutcome {
    assignment: hhc_core::Assignment,
    status: &'static str,
    runtime_ms: u128,
}

fn run_algorithm(
    instance: &Instance,
    weights: &PenaltyWeights,
    algorithm: Algorithm,
    beta_target: &Rational,
    seed: u64,
    time_limit: Duration,
) -> Result<SolveOutcome, AppError> {
    let started = Instant::now();
    let (assignment, status) = match algorithm {
        Algorithm::Greedy => {
            let (x, _) = greedy_construct(instance, beta_target.clone()).map_err(validation)?;
            (x, "constructed")
        }
        Algorithm::Tabu => {
            let (initial, _) =
                greedy_construct(instance, beta_target.clone()).map_err(validation)?;
            let params = TabuParams {
                time_limit,
                seed,
                ..TabuParams::defaults_for(instance)
            };
            let x = tabu_improve(instance, weights, &initial, &params).map_err(validation)?;
            (x, "improved")
        }
        Algorithm::Exact => {
            let limits = SolveLimits {
                time_limit,
                ..SolveLimits::default()
            };
            let solution = solve_exact(instance, weights, &limits).map_err(validation)?;
            let status = match solution.status {
                SolveStatus::ProvenOptimal => "proven-optimal",
                SolveStatus::NodeLimit => "node-limit",
                SolveStatus::TimeLimit => "time-limit",
            };
            (solution.assignment, status)
        }
    };
    let runtime_ms = started.elapsed().as_millis();

    // Gate every solver's output: a solver that stops at its limits without
    // a feasible incumbent must not report success.
    let report = check_feasibility(instance, &assignment).map_err(validation)?;
    if !report.is_feasible() {
        return Err(AppError::NoIncumbent(format!(
            "{} produced no feasible incumbent: {report}",
            algorithm.name()
        )));
    }
    Ok(SolveOutcome {
        assignment,
        status,
        runtime_ms,
    })
}

/// Spread and aggregate statistics over equity-included patients and
/// efficacy-included caregivers.
struct RateStats {
    total_utility: Rational,
    equity_spread: Rational,
    mean_fill: Rational,
    min_fill: Rational,
    efficacy_spread: Rational,
    mean_util: Rational,
    min_util: Rational,
}

fn rate_stats(instance: &Instance, metrics: &SolutionMetrics) -> RateStats {
    let total_utility: Rational = (0..instance.m())
        .map(|j| instance.utility(j) * &metrics.fill_rate[j])
        .sum();

    let included_fills: Vec<&Rational> = (0..instance.m())
        .filter(|&j| instance.patient_included(j))
        .map(|j| &metrics.fill_rate[j])
        .collect();
    let (equity_spread, mean_fill, min_fill) = if included_fills.is_empty() {
        (Rational::zero(), Rational::zero(), Rational::zero())
    } else {
        let min = (*included_fills.iter().min().unwrap()).clone();
        let sum: Rational = included_fills.iter().copied().sum();
        (
            &metrics.max_fill - &min,
            sum / Rational::from(included_fills.len()),
            min,
        )
    };

    let included_utils: Vec<&Rational> = (0..instance.n())
        .filter(|&i| instance.caregiver_included(i))
        .map(|i| &metrics.utilization[i])
        .collect();
    let (efficacy_spread, mean_util, min_util) = if included_utils.is_empty() {
        (Rational::zero(), Rational::zero(), Rational::zero())
    } else {
        let min = (*included_utils.iter().min().unwrap()).clone();
        let sum: Rational = included_utils.iter().copied().sum();
        (
            &metrics.max_util - &min,
            sum / Rational::from(included_utils.len()),
            min,
        )
    };

    RateStats {
        total_utility,
        equity_spread,
        mean_fill,
        min_fill,
        efficacy_spread,
        mean_util,
        min_util,
    }
}

fn dec(value: &Rational) -> String {
    value.to_decimal_string(9)
}

fn cmd_solve(args: SolveArgs) -> Result<(), AppError> {
    let instance = load_instance(&args.instance).map_err(validation)?;
    let weights = PenaltyWeights::new(args.theta.clone(), args.alpha.clone()).map_err(validation)?;
    let time_limit = time_limit_duration(args.time_limit)?;
    let outcome = run_algorithm(
        &instance,
        &weights,
        args.algorithm,
        &args.beta_target,
        args.seed,
        time_limit,
    )?;
    let metrics =
        SolutionMetrics::compute(&instance, &weights, &outcome.assignment).map_err(validation)?;
    save_solution(&instance, &weights, &outcome.assignment, &metrics, &args.out)
        .map_err(validation)?;

    let stats = rate_stats(&instance, &metrics);
    println!("algorithm: {}", args.algorithm.name());
    println!("status: {}", outcome.status);
    println!("objective: {}", dec(&metrics.objective));
    println!("total_utility: {}", dec(&stats.total_utility));
    println!("equity_spread: {}", dec(&stats.equity_spread));
    println!("efficacy_spread: {}", dec(&stats.efficacy_spread));
    println!("total_cost: {}", dec(&metrics.total_cost));
    println!("runtime_ms: {}", outcome.runtime_ms);
    println!("solution: {}", args.out.display());
    Ok(())
}

const SWEEP_HEADER: &str = "theta,alpha,budget,algorithm,objective,total_utility,\
equity_spread,mean_fill_rate,min_fill_rate,efficacy_spread,mean_utilization,\
min_utilization,total_cost,runtime_ms,status";

fn cmd_sweep(args: SweepArgs) -> Result<(), AppError> {
    let instance = load_instance(&args.instance).map_err(validation)?;
    if args.theta.is_empty() || args.alpha.is_empty() || args.algorithm.is_empty() {
        return Err(AppError::Validation(
            "sweep needs non-empty theta, alpha, and algorithm lists".into(),
        ));
    }
    let time_limit = time_limit_duration(args.time_limit)?;
    let mut algorithms = args.algorithm.clone();
    algorithms.sort();
    algorithms.dedup();

    let mut table = String::from(SWEEP_HEADER);
    table.push('\n');
    for theta in &args.theta {
        for alpha in &args.alpha {
            let weights =
                PenaltyWeights::new(theta.clone(), alpha.clone()).map_err(validation)?;
            for &algorithm in &algorithms {
                let outcome = run_algorithm(
                    &instance,
                    &weights,
                    algorithm,
                    &args.beta_target,
                    args.seed,
                    time_limit,
                )?;
                let metrics = SolutionMetrics::compute(&instance, &weights, &outcome.assignment)
                    .map_err(validation)?;
                let stats = rate_stats(&instance, &metrics);
                table.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                    dec(theta),
                    dec(alpha),
                    dec(instance.budget()),
                    algorithm.name(),
                    dec(&metrics.objective),
                    dec(&stats.total_utility),
                    dec(&stats.equity_spread),
                    dec(&stats.mean_fill),
                    dec(&stats.min_fill),
                    dec(&stats.efficacy_spread),
                    dec(&stats.mean_util),
                    dec(&stats.min_util),
                    dec(&metrics.total_cost),
                    outcome.runtime_ms,
                    outcome.status,
                ));
            }
        }
    }
    emit_table(&table, args.out.as_deref())
}

/// Exact search is only attempted when total demand is small enough for the
/// solver to have a realistic shot at proving optimality.
fn micro_scale(instance: &Instance) -> bool {
    let total: u64 = (0..instance.m()).map(|j| instance.total_demand(j)).sum();
    total <= 20
}

fn cmd_compare(args: CompareArgs) -> Result<(), AppError> {
    let instance = load_instance(&args.instance).map_err(validation)?;
    let weights = PenaltyWeights::new(args.theta.clone(), args.alpha.clone()).map_err(validation)?;
    let time_limit = time_limit_duration(args.time_limit)?;

    let mut rows: Vec<(Algorithm, SolveOutcome, Rational)> = Vec::new();
    for algorithm in [Algorithm::Greedy, Algorithm::Tabu] {
        let outcome = run_algorithm(
            &instance,
            &weights,
            algorithm,
            &args.beta_target,
            args.seed,
            time_limit,
        )?;
        let objective =
            evaluate_objective(&instance, &weights, &outcome.assignment).map_err(validation)?;
        rows.push((algorithm, outcome, objective));
    }
    let exact = if micro_scale(&instance) {
        let outcome = run_algorithm(
            &instance,
            &weights,
            Algorithm::Exact,
            &args.beta_target,
            args.seed,
            time_limit,
        )?;
        let objective =
            evaluate_objective(&instance, &weights, &outcome.assignment).map_err(validation)?;
        Some((outcome, objective))
    } else {
        None
    };

    // gap = (exact - heuristic) / max(1, exact)
    let gap_of = |objective: &Rational| -> Option<Rational> {
        exact.as_ref().map(|(_, exact_obj)| {
            let denom = exact_obj.clone().max(Rational::one());
            (exact_obj - objective) / denom
        })
    };

    let mut table = String::from("algorithm,objective,gap,runtime_ms,status\n");
    for (algorithm, outcome, objective) in &rows {
        let gap = gap_of(objective).map(|g| dec(&g)).unwrap_or_default();
        table.push_str(&format!(
            "{},{},{},{},{}\n",
            algorithm.name(),
            dec(objective),
            gap,
            outcome.runtime_ms,
            outcome.status,
        ));
    }
    if let Some((outcome, objective)) = &exact {
        table.push_str(&format!(
            "exact,{},{},{},{}\n",
            dec(objective),
            dec(&Rational::zero()),
            outcome.runtime_ms,
            outcome.status,
        ));
    }
    emit_table(&table, args.out.as_deref())
}

fn cmd_gen(args: GenArgs) -> Result<(), AppError> {
    let params = GeneratorParams {
        caregivers: args.caregivers,
        patients: args.patients,
        services: args.services,
        demand_range: args.demand,
        capacity_range: args.capacity,
        cost_range: args.cost,
        utility_range: args.utility,
        skill_density: args.skill_density,
        budget_factor: args.budget_factor,
        patient_cap_range: args.patient_cap,
        caregiver_cap_range: args.caregiver_cap,
        seed: args.seed,
    };
    let instance = generate(&params).map_err(validation)?;
    save_instance(&instance, &args.out).map_err(validation)?;
    println!(
        "generated {} caregivers x {} patients x {} services, budget {}",
        instance.n(),
        instance.m(),
        instance.s(),
        dec(instance.budget())
    );
    println!("instance: {}", args.out.display());
    Ok(())
}

fn emit_table(table: &str, out: Option<&Path>) -> Result<(), AppError> {
    match out {
        Some(path) => {
            std::fs::write(path, table)
                .map_err(|e| AppError::Validation(format!("{}: {e}", path.display())))?;
            println!("table: {}", path.display());
            Ok(())
        }
        None => {
            print!("{table}");
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use hhc_core::{Assignment, InstanceBuilder};

    #[test]
    fn spreads_vanish_when_rates_are_equal() {
        let instance = InstanceBuilder::new(2, 2, 1)
            .demand(&[2, 2])
            .capacity(&[2, 2])
            .budget("100".parse().unwrap())
            .utilities(vec!["3".parse().unwrap(), "7".parse().unwrap()])
            .build()
            .unwrap();
        let mut x = Assignment::zeros(2, 2, 1);
        x.set_hours(0, 0, 0, 1);
        x.set_hours(1, 1, 0, 1);
        let metrics = SolutionMetrics::compute(&instance, &PenaltyWeights::zero(), &x).unwrap();
        let stats = rate_stats(&instance, &metrics);
        assert!(stats.equity_spread.is_zero());
        assert!(stats.efficacy_spread.is_zero());
    }

    #[test]
    fn spreads_ignore_excluded_entities() {
        // Patient 1 demands nothing, caregiver 1 has no capacity; both are
        // excluded and must not widen the spreads.
        let instance = InstanceBuilder::new(2, 2, 1)
            .demand(&[2, 0])
            .capacity(&[2, 0])
            .budget("100".parse().unwrap())
            .build()
            .unwrap();
        let mut x = Assignment::zeros(2, 2, 1);
        x.set_hours(0, 0, 0, 2);
        let metrics = SolutionMetrics::compute(&instance, &PenaltyWeights::zero(), &x).unwrap();
        let stats = rate_stats(&instance, &metrics);
        assert!(stats.equity_spread.is_zero());
        assert!(stats.efficacy_spread.is_zero());
        assert_eq!(stats.min_fill, Rational::one());
    }
}
