use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use harness::sweep::SweepConfig;
use harness::{check, run_experiment, run_sweep, ExperimentConfig, Overrides, Suite};
use ttgda::problems::ProblemSpec;

#[derive(Parser)]
#[command(name = "ttgda", version, about = "Two-timescale GDA experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write trace.csv and summary.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// LIBSVM dataset for logistic-regression problems.
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Run a stepsize/batch grid and write sweep.csv plus one directory per cell.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Evaluate a check suite (lemmas, rates, oracles) and print a JSON report.
    Check {
        #[arg(long)]
        problem: String,
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match dispatch(Cli::parse().command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(command: Command) -> Result<ExitCode> {
    match command {
        Command::Run {
            config,
            seed,
            out,
            data,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            cfg.apply(&Overrides { seed, out, data });
            let summary = run_experiment(&cfg)?;
            println!("{}", serde_json::to_string_pretty(&summary)?);
            Ok(if summary.error.is_some() {
                ExitCode::FAILURE
            } else {
                ExitCode::SUCCESS
            })
        }
        Command::Sweep {
            config,
            seed,
            out,
            data,
        } => {
            let mut sweep: SweepConfig = harness::output::read_json(&config)?;
            sweep.base.apply(&Overrides { seed, out, data });
            let results = run_sweep(&sweep, true)?;
            let table = harness::sweep::sweep_csv(&results)?;
            print!("{}", String::from_utf8_lossy(&table));
            Ok(ExitCode::SUCCESS)
        }
        Command::Check {
            problem,
            suite,
            seed,
        } => {
            let spec = ProblemSpec::named(&problem)
                .with_context(|| format!("unknown problem '{problem}'"))?;
            let suite: Suite = suite.parse()?;
            let report = check(&spec, suite, seed)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(ExitCode::SUCCESS)
        }
    }
}
