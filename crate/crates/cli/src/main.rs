use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use ttrace_cli::bench::cmd_bench;
use ttrace_cli::diagnose::cmd_diagnose;
use ttrace_cli::oracle::cmd_oracle;
use ttrace_cli::run::cmd_run;
use ttrace_cli::{CliError, ExperimentConfig};

/// Estimate Tr f(H) for spin-chain Hamiltonians with tensor-train global Lanczos.
#[derive(Parser)]
#[command(name = "ttrace", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// TOML experiment file; defaults apply when omitted.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set run.mode=vanilla`. Repeatable; later wins.
    #[arg(short = 's', long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl ConfigArgs {
    fn load(&self) -> Result<ExperimentConfig, CliError> {
        ExperimentConfig::load(self.config.as_deref(), &self.overrides)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the recurrence once and write the per-iteration CSV and summary.
    Run(ConfigArgs),
    /// Time fixed-length runs over the [bench] grid.
    Bench {
        #[command(flatten)]
        config: ConfigArgs,
        /// Comma-separated modes, replacing bench.modes.
        #[arg(long, value_delimiter = ',')]
        modes: Vec<String>,
        /// Replaces bench.repetitions.
        #[arg(long)]
        repetitions: Option<usize>,
        /// Run grid points concurrently (timings then interfere).
        #[arg(long)]
        parallel: bool,
    },
    /// Audit checkpointed basis operators against the configured Hamiltonian.
    Diagnose {
        #[command(flatten)]
        config: ConfigArgs,
        /// Directory holding u_XXXXX.ttop files.
        #[arg(long)]
        checkpoint: PathBuf,
    },
    /// Exact Tr f(H) by dense diagonalization.
    Oracle(ConfigArgs),
    /// Print the resolved configuration.
    Config(ConfigArgs),
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(args) => {
            let out = cmd_run(&args.load()?)?;
            print!("{}", out.summary);
            println!("csv             {}", out.csv_path.display());
        }
        Command::Bench {
            config,
            modes,
            repetitions,
            parallel,
        } => {
            let mut overrides = config.overrides.clone();
            if !modes.is_empty() {
                let list: Vec<String> = modes.iter().map(|m| format!("\"{}\"", m.trim())).collect();
                overrides.push(format!("bench.modes=[{}]", list.join(",")));
            }
            if let Some(r) = repetitions {
                overrides.push(format!("bench.repetitions={r}"));
            }
            if parallel {
                overrides.push("bench.parallel=true".into());
            }
            let cfg = ExperimentConfig::load(config.config.as_deref(), &overrides)?;
            let out = cmd_bench(&cfg)?;
            println!(
                "{:<12} {:>5} {:>6} {:>5} {:>12} {:>12}",
                "mode", "L", "D_max", "reps", "mean ms", "min ms"
            );
            for r in &out.summary {
                println!(
                    "{:<12} {:>5} {:>6} {:>5} {:>12.3} {:>12.3}",
                    r.mode, r.length, r.max_bond, r.repetitions, r.mean_ms, r.min_ms
                );
            }
            println!("csv {}", out.csv_path.display());
            println!("summary csv {}", out.summary_path.display());
        }
        Command::Diagnose { config, checkpoint } => {
            let report = cmd_diagnose(&config.load()?, &checkpoint)?;
            print!("{}", report.table());
        }
        Command::Oracle(args) => {
            print!("{}", cmd_oracle(&args.load()?)?.summary());
        }
        Command::Config(args) => {
            print!("{}", args.load()?.to_toml());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
