//! `evobench` command-line interface.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use evobench_core::commands::evolve::format_table;
use evobench_core::commands::{
    cmd_analyze, cmd_evolve, cmd_inject_bugs, cmd_profile, cmd_report, load_profile, CliError, RunConfig,
};

#[derive(Parser)]
#[command(name = "evobench", version, about = "Evolve benchmark programs into harder, equivalent variants")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Derive a reference profile from a corpus.
    Profile {
        dir: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Date recorded in the provenance block (defaults to today, UTC).
        #[arg(long)]
        date: Option<String>,
    },
    /// Measure every unit of a corpus against a profile.
    Analyze {
        dir: PathBuf,
        #[arg(short, long)]
        profile: Option<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Evolve every unit of a corpus.
    Evolve {
        dir: PathBuf,
        #[arg(short, long)]
        profile: Option<PathBuf>,
        /// JSON run configuration; flags override its fields.
        #[arg(short, long)]
        config: Option<PathBuf>,
        /// Wall-clock budget per unit in seconds.
        #[arg(long)]
        budget: Option<f64>,
        /// Fraction of the population selected for breeding.
        #[arg(long)]
        breed: Option<f64>,
        #[arg(long)]
        max_iterations: Option<u32>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Inject identical higher-order bugs into an evolved unit and its original.
    InjectBugs {
        unit_dir: PathBuf,
        #[arg(long, default_value_t = 1)]
        order: usize,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        config: Option<PathBuf>,
    },
    /// Diversity and trajectory report over one or more evolve outputs.
    Report {
        #[arg(required = true)]
        runs: Vec<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn load_config(path: Option<&Path>) -> Result<RunConfig, CliError> {
    path.map(RunConfig::load).unwrap_or_else(|| Ok(RunConfig::default()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Profile { dir, output, date } => {
            let out = cmd_profile(&dir, &output, date.as_deref())?;
            println!("profiled {} units into {}", out.profile.provenance.units, output.display());
        }
        Command::Analyze { dir, profile, output } => {
            let profile = load_profile(profile.as_deref())?;
            let report = cmd_analyze(&dir, &profile, &output)?;
            println!("{} units analyzed, {} errors", report.units.len(), report.errors.len());
        }
        Command::Evolve {
            dir,
            profile,
            config,
            budget,
            breed,
            max_iterations,
            seed,
            jobs,
            output,
        } => {
            let mut cfg = load_config(config.as_deref())?;
            if profile.is_some() {
                cfg.profile = profile;
            }
            if let Some(b) = budget {
                cfg.evolution.budget_s = b;
            }
            if let Some(b) = breed {
                cfg.evolution.breed_fraction = b;
            }
            if max_iterations.is_some() {
                cfg.evolution.max_iterations = max_iterations;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(j) = jobs {
                cfg.jobs = j;
            }
            let out = output
                .or_else(|| cfg.output.clone())
                .ok_or_else(|| CliError::Config("no output directory given".into()))?;
            let summary = cmd_evolve(&dir, &out, &cfg)?;
            println!("{}", format_table(&summary));
        }
        Command::InjectBugs {
            unit_dir,
            order,
            count,
            seed,
            config,
        } => {
            let cfg = load_config(config.as_deref())?;
            let report = cmd_inject_bugs(&unit_dir, order, count, seed, &cfg.sandbox)?;
            println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
        }
        Command::Report { runs, output } => {
            let report = cmd_report(&runs, output.as_deref())?;
            println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
