use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use modfrac_cli::commands::{dispatch, Command, Globals};
use modfrac_cli::config::RunConfig;
use modfrac_cli::{exit_code, UsageError, EXIT_CHECK_FAILED};

#[derive(Debug, Parser)]
#[command(name = "modfrac", version, about = "Fractional integrals of modular forms")]
struct Cli {
    /// JSON run configuration; flags take precedence
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// refuse any network access
    #[arg(long, global = true)]
    offline: bool,
    #[command(subcommand)]
    command: Command,
}

fn setup_threads(n: Option<usize>) -> anyhow::Result<()> {
    let Some(n) = n else { return Ok(()) };
    if n == 0 {
        return Err(UsageError("--threads must be positive".into()).into());
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| anyhow::anyhow!("thread pool: {e}"))?;
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let config = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    setup_threads(cli.threads.or(config.threads))?;
    let offline = cli.offline || config.offline.unwrap_or(false);
    dispatch(cli.command, &Globals { config, offline })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_CHECK_FAILED as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
