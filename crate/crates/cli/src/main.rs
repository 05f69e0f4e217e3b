//! `gridrom` — experiment driver for data-driven quadratic model reduction
//! of power-network swing dynamics.
//!
//! Exit codes: 0 success, 1 configuration error, 2 numerical failure,
//! 3 oracle failure.

mod config;
mod oracle;
mod pipeline;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use gridrom_core::error::Error;

use config::{DerivativeMode, ExperimentConfig, InitialCondition};
use pipeline::StagedError;

#[derive(Parser)]
#[command(
    name = "gridrom",
    version,
    about = "Learn reduced quadratic models of power-network swing dynamics from simulation data",
    after_help = "Time quantities are in seconds, angles in radians. \
                  Defaults: dt = 1e-3 s, T = [0, 3] s, mu = 1e-3, tol = 1.5e-4, \
                  initial condition random:0.1 (seeded)."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the full nonlinear network and export the snapshots.
    Simulate(RunArgs),
    /// Run the full learning pipeline: simulate, lift, reduce, infer, evaluate.
    Learn(RunArgs),
    /// Project the exact lifted operators onto the data basis (reference model).
    ReduceIntrusive(RunArgs),
    /// Re-simulate a stored reduced model and compare against the full model.
    Evaluate(EvaluateArgs),
    /// Run the built-in correctness oracles on the configured network.
    Oracle(RunArgs),
    /// Repeat the learning pipeline over a list of regularization weights.
    SweepMu(SweepArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Configuration file (key = value); command-line flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Network parameter file.
    #[arg(long)]
    network: Option<PathBuf>,
    /// Start of the simulation horizon (s).
    #[arg(long)]
    t_start: Option<f64>,
    /// End of the simulation horizon (s).
    #[arg(long)]
    t_end: Option<f64>,
    /// Fixed integration step (s).
    #[arg(long)]
    dt: Option<f64>,
    /// Initial condition: `zero` or `random[:MAGNITUDE_RAD]`.
    #[arg(long)]
    ic: Option<String>,
    /// POD truncation tolerance, relative to the leading singular value.
    #[arg(long)]
    tol: Option<f64>,
    /// Fixed reduced order (overrides the tolerance rule).
    #[arg(long)]
    r: Option<usize>,
    /// Tikhonov regularization weight.
    #[arg(long)]
    mu: Option<f64>,
    /// Derivative snapshots: `forward`, `central` or `exact-rhs`.
    #[arg(long)]
    derivative_mode: Option<String>,
    /// Output directory for artifacts.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for the randomized initial perturbation.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Stored reduced model to simulate.
    #[arg(long)]
    model: PathBuf,
    /// Stored reduction basis matching the model.
    #[arg(long)]
    basis: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Comma-separated regularization weights.
    #[arg(long, default_value = "0,1e-6,1e-3,1")]
    mus: String,
}

fn resolve_config(args: &RunArgs) -> Result<ExperimentConfig, Error> {
    let mut config = ExperimentConfig::default();
    if let Some(path) = &args.config {
        config.apply_file(path)?;
    }
    if let Some(v) = &args.network {
        config.network_path = v.clone();
    }
    if let Some(v) = args.t_start {
        config.t_span.0 = v;
    }
    if let Some(v) = args.t_end {
        config.t_span.1 = v;
    }
    if let Some(v) = args.dt {
        config.dt = v;
    }
    if let Some(spec) = &args.ic {
        config.initial_condition = InitialCondition::parse(spec)?;
    }
    if let Some(v) = args.tol {
        config.tol = v;
    }
    if args.r.is_some() {
        config.r_override = args.r;
    }
    if let Some(v) = args.mu {
        config.mu = v;
    }
    if let Some(mode) = &args.derivative_mode {
        config.derivative_mode = DerivativeMode::parse(mode)?;
    }
    if let Some(v) = &args.out {
        config.output_dir = v.clone();
    }
    if let Some(v) = args.seed {
        config.seed = v;
    }
    config.validate()?;
    Ok(config)
}

fn exit_code_for(error: &Error) -> u8 {
    match error {
        Error::Parse { .. }
        | Error::Io { .. }
        | Error::InvalidArgument(_)
        | Error::InvalidNetwork(_)
        | Error::DimensionMismatch { .. } => 1,
        Error::IntegrationDiverged { .. }
        | Error::DegenerateData(_)
        | Error::ZeroReferenceNorm => 2,
    }
}

fn fail(staged: StagedError) -> ExitCode {
    eprintln!("error: {staged}");
    ExitCode::from(exit_code_for(&staged.error))
}

fn fail_config(error: Error) -> ExitCode {
    eprintln!("error: {error}");
    ExitCode::from(exit_code_for(&error))
}

fn main() -> ExitCode {
    // deterministic output files take precedence over matmul parallelism
    faer::set_global_parallelism(faer::Par::Seq);
    let cli = Cli::parse();

    match cli.command {
        Command::Simulate(args) => {
            let config = match resolve_config(&args) {
                Ok(c) => c,
                Err(e) => return fail_config(e),
            };
            let started = Instant::now();
            match pipeline::run_simulate(&config) {
                Ok((n, samples)) => {
                    println!(
                        "simulated n = {n} oscillators, {samples} samples -> {}",
                        config.output_dir.display()
                    );
                    println!("wall time: {:.2?}", started.elapsed());
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Command::Learn(args) => {
            let config = match resolve_config(&args) {
                Ok(c) => c,
                Err(e) => return fail_config(e),
            };
            let started = Instant::now();
            match pipeline::run_learn(&config) {
                Ok(outcome) => {
                    println!(
                        "r = {} (of {} lifted dims), rank(A) = {}/{}",
                        outcome.r,
                        4 * outcome.n,
                        outcome.rank.unwrap_or(0),
                        outcome.columns.unwrap_or(0)
                    );
                    println!("max relative L-inf output error: {:.6e}", outcome.report.max_rel_error);
                    println!("artifacts: {}", config.output_dir.display());
                    println!("wall time: {:.2?}", started.elapsed());
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Command::ReduceIntrusive(args) => {
            let config = match resolve_config(&args) {
                Ok(c) => c,
                Err(e) => return fail_config(e),
            };
            let started = Instant::now();
            match pipeline::run_reduce_intrusive(&config) {
                Ok(outcome) => {
                    println!("r = {} (of {} lifted dims)", outcome.r, 4 * outcome.n);
                    println!("max relative L-inf output error: {:.6e}", outcome.report.max_rel_error);
                    println!("artifacts: {}", config.output_dir.display());
                    println!("wall time: {:.2?}", started.elapsed());
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Command::Evaluate(args) => {
            let config = match resolve_config(&args.run) {
                Ok(c) => c,
                Err(e) => return fail_config(e),
            };
            let started = Instant::now();
            match pipeline::run_evaluate(&config, &args.model, &args.basis) {
                Ok(outcome) => {
                    println!("r = {}", outcome.r);
                    println!("max relative L-inf output error: {:.6e}", outcome.report.max_rel_error);
                    println!("artifacts: {}", config.output_dir.display());
                    println!("wall time: {:.2?}", started.elapsed());
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Command::Oracle(args) => {
            let config = match resolve_config(&args) {
                Ok(c) => c,
                Err(e) => return fail_config(e),
            };
            match oracle::run_oracle_suite(&config) {
                Ok(checks) => {
                    let mut report = String::new();
                    let mut all_passed = true;
                    for check in &checks {
                        let line = check.line();
                        println!("{line}");
                        report.push_str(&line);
                        report.push('\n');
                        all_passed &= check.passed;
                    }
                    if std::fs::create_dir_all(&config.output_dir).is_ok() {
                        let _ = std::fs::write(config.output_dir.join("oracle_report.txt"), report);
                    }
                    if all_passed {
                        println!("all {} oracles passed", checks.len());
                        ExitCode::SUCCESS
                    } else {
                        eprintln!("error: oracle failures detected");
                        ExitCode::from(3)
                    }
                }
                Err(e) => fail(e),
            }
        }
        Command::SweepMu(args) => {
            let config = match resolve_config(&args.run) {
                Ok(c) => c,
                Err(e) => return fail_config(e),
            };
            let mus: Result<Vec<f64>, _> = args
                .mus
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect();
            let mus = match mus {
                Ok(v) if !v.is_empty() => v,
                _ => {
                    return fail_config(Error::InvalidArgument(format!(
                        "bad mu list {:?}",
                        args.mus
                    )))
                }
            };
            let started = Instant::now();
            match pipeline::run_mu_sweep(&config, &mus) {
                Ok(rows) => {
                    println!("mu           r   rank/cols   max_rel_error   ||X||_F");
                    for row in &rows {
                        println!(
                            "{:<12.3e} {:<3} {:>4}/{:<6} {:<15.6e} {:.6e}",
                            row.mu, row.r, row.rank, row.columns, row.max_rel_error,
                            row.coefficient_norm
                        );
                    }
                    println!("report: {}", config.output_dir.join("mu_sweep.csv").display());
                    println!("wall time: {:.2?}", started.elapsed());
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
    }
}
