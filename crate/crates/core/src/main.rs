use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dlcz_multiplex::cli::{self, CliError, McKind};
use dlcz_multiplex::config::RunConfig;

/// Rate and error analytics for temporally multiplexed ensemble-based
/// repeater links, with Monte Carlo verification.
#[derive(Parser)]
#[command(name = "dlcz-multiplex", version, about)]
struct Args {
    /// JSON run configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed (overrides the config file).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Monte Carlo trials (overrides the config file).
    #[arg(long, global = true)]
    trials: Option<u64>,

    /// Output CSV path (overrides the config file; stdout when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Mode-count grid for budget and sweep, e.g. 1,10,100,500.
    #[arg(long, global = true, value_delimiter = ',')]
    n_grid: Option<Vec<u64>>,

    /// Suppress progress messages.
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the dephasing / rephasing time series of the microscopic model.
    Dephase,
    /// Tabulate the error budget and rate scaling over the N grid.
    Budget,
    /// Run a Monte Carlo estimator.
    Mc {
        #[command(subcommand)]
        estimator: McCommand,
    },
}

#[derive(Subcommand)]
enum McCommand {
    /// Conditional readout error rate vs the closed-form budget.
    Error,
    /// Elementary-link generation time vs the geometric mean.
    Link,
    /// Nested swap-chain completion time.
    Chain,
    /// Rate scaling over the N grid vs the analytic factor.
    Sweep,
}

fn load_config(args: &Args) -> Result<RunConfig, CliError> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.display().to_string(),
                source,
            })?;
            RunConfig::from_json(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = args.trials {
        cfg.trials = trials;
    }
    if let Some(out) = &args.out {
        cfg.out = Some(out.display().to_string());
    }
    if let Some(grid) = &args.n_grid {
        cfg.n_grid = grid.clone();
    }
    let cfg = cfg.resolved();
    cfg.validate()
        .map_err(|e| CliError::Config(e.to_string()))?;
    Ok(cfg)
}

fn run(args: &Args) -> Result<(), CliError> {
    let cfg = load_config(args)?;
    let rendered = match &args.command {
        Command::Dephase => cli::render_dephase(&cfg)?,
        Command::Budget => cli::render_budget(&cfg)?,
        Command::Mc { estimator } => {
            let kind = match estimator {
                McCommand::Error => McKind::Error,
                McCommand::Link => McKind::Link,
                McCommand::Chain => McKind::Chain,
                McCommand::Sweep => McKind::Sweep,
            };
            cli::render_mc(&cfg, kind)?
        }
    };

    match &cfg.out {
        Some(path) => {
            fs::write(path, &rendered).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            if !args.quiet {
                let rows = rendered.lines().filter(|l| !l.starts_with('#')).count();
                println!("wrote {path} ({} data rows)", rows.saturating_sub(1));
            }
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(rendered.as_bytes())
                .map_err(|source| CliError::Io {
                    path: "<stdout>".into(),
                    source,
                })?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{}", err.to_json_record());
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
