//! `mmlab`: command-line front end for the metric-measure laboratory.

mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;

use commands::Command;
use output::CliError;

#[derive(Parser)]
#[command(name = "mmlab", version, about = "Experiments on finite metric-measure spaces")]
struct Cli {
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            return report(&CliError::internal(format!("cannot configure thread pool: {e}")));
        }
    }
    match output::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(&e),
    }
}

fn report(e: &CliError) -> ExitCode {
    eprintln!("{}", e.to_json());
    ExitCode::from(e.exit_code())
}
