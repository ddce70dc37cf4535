use clap::{Args, Parser, Subcommand};
use fasuav_cli::validate::{render_report, run_all, ValidationOptions};
use fasuav_cli::{load_config, run_to_csv, CliError, Command, ExperimentSpec};
use std::path::PathBuf;
use std::process::ExitCode;

/// Ergodic rate and energy efficiency of a fluid-antenna UAV serving a wireless-powered node.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Ergodic rate against UAV transmit power (exact, Monte Carlo, asymptote).
    RateVsPower(RunArgs),
    /// Ergodic rate against the time-switching ratio, one curve per (N, d, m).
    RateVsAlpha(RunArgs),
    /// Energy efficiency at the optimal time split against the number of ports.
    EeVsPorts(RunArgs),
    /// Run the validation suite and print a pass/fail table.
    Validate(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML configuration file; baseline values are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output path; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo trials (figure runs default to 1e6, validate to 1e5).
    #[arg(long)]
    trials: Option<usize>,
}

impl RunArgs {
    fn spec(&self) -> Result<ExperimentSpec, CliError> {
        let mut spec = match &self.config {
            Some(path) => load_config(path)?,
            None => ExperimentSpec::baseline(),
        };
        if let Some(seed) = self.seed {
            spec.seed = seed;
        }
        if let Some(trials) = self.trials {
            spec.trials = trials;
        }
        spec.validate()?;
        Ok(spec)
    }

    fn emit(&self, text: &str) -> Result<(), CliError> {
        match &self.out {
            Some(path) => std::fs::write(path, text)?,
            None => print!("{text}"),
        }
        Ok(())
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (command, args) = match &cli.command {
        Cmd::RateVsPower(a) => (Command::RateVsPower, a),
        Cmd::RateVsAlpha(a) => (Command::RateVsAlpha, a),
        Cmd::EeVsPorts(a) => (Command::EeVsPorts, a),
        Cmd::Validate(a) => return validate(a),
    };
    let spec = args.spec()?;
    args.emit(&run_to_csv(command, &spec)?)
}

fn validate(args: &RunArgs) -> Result<(), CliError> {
    if args.config.is_some() {
        return Err(CliError::Config("validate runs fixed scenarios and takes no --config".into()));
    }
    let mut opts = ValidationOptions::with_trials(args.trials.unwrap_or(100_000));
    if let Some(seed) = args.seed {
        opts.seed = seed;
    }
    let reports = run_all(&opts)?;
    args.emit(&render_report(&reports))?;
    let failed: Vec<String> = reports.iter().filter(|r| !r.passed()).map(|r| r.id.to_string()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Validation(format!("criteria failed: {}", failed.join(","))))
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.report());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
