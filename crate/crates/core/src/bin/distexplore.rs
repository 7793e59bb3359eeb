use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use distexplore::harness::{
    render_heatmaps, run_comparison, summary_table, write_report, ExperimentConfig,
};
use distexplore::Error;

/// Reinforcement-learning guided exploration of protocol state spaces.
#[derive(Debug, Parser)]
#[command(name = "distexplore", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a single-agent experiment.
    Run {
        config: PathBuf,
        /// Output directory (default: runs/<config name>).
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Run every configured agent and test them against the baseline.
    Compare {
        config: PathBuf,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Re-render cube heatmaps from a run directory.
    Heatmap { run_dir: PathBuf },
    /// Parse a config and print it with all defaults filled in.
    Validate { config: PathBuf },
}

fn default_out(config: &Path) -> PathBuf {
    let stem = config.file_stem().and_then(|s| s.to_str()).unwrap_or("run");
    Path::new("runs").join(stem)
}

fn experiment(config_path: &Path, out: Option<PathBuf>, single: bool) -> Result<(), Error> {
    let config = ExperimentConfig::load(config_path)?;
    if single && config.agent.len() != 1 {
        return Err(Error::Config(format!(
            "`run` takes exactly one [agent.<name>] section, found {}; use `compare`",
            config.agent.len()
        )));
    }
    let out = out.unwrap_or_else(|| default_out(config_path));
    let report = run_comparison(&config)?;
    write_report(&out, &config, &report)?;
    print!("{}", summary_table(&report));
    println!("wrote {}", out.display());
    Ok(())
}

fn dispatch(command: Command) -> Result<(), Error> {
    match command {
        Command::Run { config, out } => experiment(&config, out, true),
        Command::Compare { config, out } => experiment(&config, out, false),
        Command::Heatmap { run_dir } => {
            for dir in render_heatmaps(&run_dir)? {
                println!("{}", dir.display());
            }
            Ok(())
        }
        Command::Validate { config } => {
            print!("{}", ExperimentConfig::load(&config)?.to_toml());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::Predicate(_) | Error::InvalidRun(_) => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}
