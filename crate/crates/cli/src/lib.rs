//! Config-driven experiment runner for pawlab.

pub mod config;
pub mod experiments;
pub mod output;

use std::collections::BTreeMap;
use std::path::PathBuf;

use config::{FileConfig, Format, Params, RunConfig};
use output::Report;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("unknown experiment {0:?}")]
    UnknownExperiment(String),
    #[error("numeric contract violated: {0}")]
    Contract(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::UnknownExperiment(_) => 3,
            CliError::Contract(_) => 4,
            CliError::Io(_) => 5,
        }
    }
}

/// Command-line inputs for `pawlab run`, before merging with a config file.
#[derive(Debug, Default, Clone)]
pub struct RunArgs {
    pub experiment: String,
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub overrides: Vec<String>,
}

/// Merges file keys, flags and overrides. Flags and overrides win over the file.
pub fn resolve(args: &RunArgs) -> Result<RunConfig, CliError> {
    let file = match &args.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    if let Some(name) = &file.experiment {
        if name != &args.experiment {
            return Err(CliError::Config(format!(
                "config names experiment {name:?} but {:?} was requested",
                args.experiment
            )));
        }
    }
    let exp = experiments::find(&args.experiment).ok_or_else(|| CliError::UnknownExperiment(args.experiment.clone()))?;
    let mut given: BTreeMap<String, String> = file.params;
    for o in &args.overrides {
        let (k, v) = config::parse_override(o)?;
        given.insert(k, v);
    }
    Ok(RunConfig {
        experiment: exp.name.to_string(),
        seed: args.seed.or(file.seed).unwrap_or(0),
        out: args.out.clone().or(file.out),
        format: args.format.or(file.format).unwrap_or(Format::Csv),
        params: Params::resolve(exp.params, &given)?,
    })
}

fn thread_count() -> Result<Option<usize>, CliError> {
    match std::env::var("PAWLAB_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Config(format!("PAWLAB_THREADS must be a positive integer, got {v:?}"))),
        },
    }
}

/// Runs the experiment and returns the rendered output with the report.
pub fn execute(cfg: &RunConfig) -> Result<(String, Report), CliError> {
    let exp = experiments::find(&cfg.experiment).ok_or_else(|| CliError::UnknownExperiment(cfg.experiment.clone()))?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_count()? {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let report = pool.install(|| (exp.run)(&cfg.params, cfg.seed))?;
    Ok((output::render(cfg, &report), report))
}

/// Full `run` flow: resolve, execute, write, then report contract failures.
pub fn run(args: &RunArgs) -> Result<(), CliError> {
    let cfg = resolve(args)?;
    let (text, report) = execute(&cfg)?;
    match &cfg.out {
        Some(path) => std::fs::write(path, &text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?,
        None => {
            use std::io::Write;
            std::io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::Io(format!("stdout: {e}")))?
        }
    }
    let failed = report.failed_checks();
    if failed.is_empty() {
        Ok(())
    } else {
        let names: Vec<&str> = failed.iter().map(|c| c.name.as_str()).collect();
        Err(CliError::Contract(names.join(", ")))
    }
}
