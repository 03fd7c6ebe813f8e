use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pawlab_cli::config::Format;
use pawlab_cli::{experiments, run, RunArgs};

#[derive(Parser)]
#[command(name = "pawlab", version, about = "Run pawlab experiments and write result tables")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment
    Run {
        experiment: String,
        /// Keyed-text config file
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output file; stdout when absent
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Parameter overrides as key=value
        overrides: Vec<String>,
    },
    /// List experiments and their parameters
    List,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::List => {
            for e in experiments::REGISTRY {
                println!("{}: {}", e.name, e.about);
                for p in e.params {
                    println!("    {} = {}    {}", p.name, p.default, p.help);
                }
            }
            ExitCode::SUCCESS
        }
        Command::Run { experiment, config, seed, out, format, overrides } => {
            match run(&RunArgs { experiment, config, seed, out, format, overrides }) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("pawlab: {e}");
                    ExitCode::from(e.exit_code())
                }
            }
        }
    }
}
