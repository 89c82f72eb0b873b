use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use threem::config::{defaults_reference, parse_config, parse_value, scenario_summaries, ExperimentConfig};
use threem::experiment::run_experiment;

#[derive(Parser)]
#[command(name = "threem", version, about = "Multi-horizon multi-objective MPPI experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML file.
    Run {
        config: PathBuf,
        /// Replace the configured seed list with a single seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Threads used to execute runs in parallel.
        #[arg(long)]
        workers: Option<usize>,
        /// Set a scenario parameter, e.g. `--override controller.samples=500`.
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// List the built-in scenarios.
    ListScenarios,
    /// Print every scenario parameter with its default value.
    PrintDefaults,
}

fn prepare(
    config: PathBuf,
    seed: Option<u64>,
    out_dir: Option<PathBuf>,
    workers: Option<usize>,
    overrides: Vec<String>,
) -> threem::Result<ExperimentConfig> {
    let mut cfg = parse_config(&config)?;
    if let Some(seed) = seed {
        cfg.seeds = vec![seed];
    }
    if let Some(dir) = out_dir {
        cfg.out_dir = dir;
    }
    if workers == Some(0) {
        return Err(threem::Error::Config("--workers must be >= 1".into()));
    }
    cfg.workers = workers;
    let parsed = overrides
        .iter()
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), parse_value(v.trim())))
                .ok_or_else(|| threem::Error::Config(format!("override {kv:?} is not KEY=VALUE")))
        })
        .collect::<threem::Result<Vec<_>>>()?;
    cfg.with_overrides(&parsed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::ListScenarios => {
            for (name, summary) in scenario_summaries() {
                println!("{name:<15} {summary}");
            }
            ExitCode::SUCCESS
        }
        Command::PrintDefaults => {
            print!("{}", defaults_reference());
            ExitCode::SUCCESS
        }
        Command::Run { config, seed, out_dir, workers, overrides } => {
            let cfg = match prepare(config, seed, out_dir, workers, overrides) {
                Ok(cfg) => cfg,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            let report = match run_experiment(&cfg) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::FAILURE;
                }
            };
            for run in &report.runs {
                match &run.result {
                    Ok(t) => println!("{} seed={} {t} -> {}", run.label, run.seed, run.file.display()),
                    Err(e) => eprintln!("{} seed={} failed: {e}", run.label, run.seed),
                }
            }
            println!("stats -> {}", report.stats_path.display());
            if report.failures() > 0 {
                ExitCode::FAILURE
            } else {
                ExitCode::SUCCESS
            }
        }
    }
}
