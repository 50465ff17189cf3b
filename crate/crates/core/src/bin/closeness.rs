use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use closeness::runner::{self, ExperimentConfig, Format, RunSummary};

#[derive(Parser)]
#[command(
    version,
    about = "Distance preservation and closeness-principle tests on coupled systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment config (TOML).
    #[arg(long, global = true, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in config: henon-henon, rossler-lorenz, rossler-rossler, linear-example1.
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    Simulate,
    Embed,
    Isometry,
    Heuristics,
    Sweep,
    LinearVerify,
}

fn run(cli: &Cli) -> closeness::Result<RunSummary> {
    let mut cfg = match (&cli.config, &cli.preset) {
        (Some(path), _) => ExperimentConfig::load(path).map_err(|e| match e {
            closeness::Error::Io { .. } => closeness::Error::Config {
                path: "--config".into(),
                message: e.to_string(),
            },
            e => e,
        })?,
        (None, Some(name)) => ExperimentConfig::preset(name)?,
        (None, None) => {
            return Err(closeness::Error::Config {
                path: "--config".into(),
                message: "one of --config or --preset is required".into(),
            })
        }
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(f) = cli.format {
        cfg.output.format = f;
    }
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let jobs = cli
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    match cli.command {
        Command::Simulate => runner::run_simulate(&cfg, &out),
        Command::Embed => runner::run_embed(&cfg, &out),
        Command::Isometry => runner::run_isometry(&cfg, &out),
        Command::Heuristics => runner::run_heuristics(&cfg, &out),
        Command::Sweep => runner::run_sweep(&cfg, &out, jobs),
        Command::LinearVerify => runner::run_linear_verify(&cfg, &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(summary) => {
            for p in &summary.outputs {
                println!("{}", p.display());
            }
            if summary.failed_cells > 0 {
                eprintln!(
                    "error: {} grid cell(s) failed; see manifest.json",
                    summary.failed_cells
                );
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config_error() { 2 } else { 1 })
        }
    }
}
