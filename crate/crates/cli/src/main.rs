use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fdelab::{load, run_check, run_solve, run_sweep, run_verify, CliError, Outcome, Overrides};

#[derive(Debug, Parser)]
#[command(name = "fdelab", version, about = "Semi-bounded solutions of retarded FDEs from scenario files")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Scenario file (TOML).
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,

    /// Directory for trajectories and reports.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    /// Worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Override the check and verify window length.
    #[arg(long, global = true)]
    window: Option<f64>,

    /// Override the solver step.
    #[arg(long, global = true)]
    step: Option<f64>,

    /// Write every knot instead of thinning to 100k rows.
    #[arg(long, global = true)]
    full_density: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate theorem hypotheses.
    Check,
    /// Run the limit scheme, write the trajectory and a report.
    Solve,
    /// Re-verify an existing trajectory file.
    Verify {
        /// Trajectory to read instead of the scenario's output.
        #[arg(long)]
        trajectory: Option<PathBuf>,
    },
    /// Run check and solve for each value of the `[sweep]` section.
    Sweep,
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    let path = cli
        .scenario
        .clone()
        .ok_or_else(|| CliError::Config("--scenario is required".into()))?;
    let mut ov = Overrides {
        out_dir: cli.out_dir.clone(),
        window: cli.window,
        step: cli.step,
        full_density: cli.full_density,
        trajectory: None,
    };
    if let Command::Verify { trajectory } = &cli.command {
        ov.trajectory = trajectory.clone();
    }
    let loaded = load(&path, &ov)?;
    match cli.command {
        Command::Check => run_check(&loaded, &ov),
        Command::Solve => run_solve(&loaded, &ov),
        Command::Verify { .. } => run_verify(&loaded, &ov),
        Command::Sweep => run_sweep(&loaded, &ov),
    }
}

#[cfg(feature = "parallel")]
fn with_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    match jobs {
        Some(0) => Err(CliError::Config("--jobs must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| CliError::Config(format!("thread pool: {e}"))),
        None => Ok(f()),
    }
}

#[cfg(not(feature = "parallel"))]
fn with_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    if jobs == Some(0) {
        return Err(CliError::Config("--jobs must be at least 1".into()));
    }
    Ok(f())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let jobs = cli.jobs;
    let code = match with_pool(jobs, || run(cli)).and_then(|r| r) {
        Ok(outcome) => outcome.exit_code(),
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
