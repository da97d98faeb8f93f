//! The `fld-transfer` command-line frontend.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

mod aggregate;
mod eval;
mod simulate;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, Parser, Subcommand};
use serde::de::DeserializeOwned;

use crate::fld::CovarianceModel;
use crate::transfer::AlphaGrid;

pub use aggregate::AggregateArgs;
pub use eval::EvalArgs;
pub use simulate::SimulateArgs;

#[derive(Debug, Parser)]
#[command(name = "fld-transfer", version, about = "Transfer learning for Fisher's linear discriminant")]
pub struct Cli {
    #[command(flatten)]
    pub shared: SharedArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct SharedArgs {
    /// Master seed for every random stream
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads (default: logical cores)
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Output directory
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// JSON file with command parameters; flags take precedence
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Write the main result to standard output instead of a file
    #[arg(long, global = true)]
    pub stdout: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a simulation study (validation, kappa or dimension sweep)
    Simulate(SimulateArgs),
    /// Evaluate transfer on windowed session files
    Eval(EvalArgs),
    /// Reduce source vectors to the shareable mean direction and spread
    AggregateSources(AggregateArgs),
}

#[derive(Debug)]
pub(crate) enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

pub(crate) type CliResult<T> = std::result::Result<T, CliError>;

pub(crate) fn usage(msg: impl std::fmt::Display) -> CliError {
    CliError::Usage(msg.to_string())
}

pub(crate) fn runtime(msg: impl std::fmt::Display) -> CliError {
    CliError::Runtime(msg.to_string())
}

/// Settings shared by all commands after merging flags and config file.
#[derive(Debug, Clone)]
pub(crate) struct Common {
    pub seed: u64,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub stdout: bool,
}

impl Common {
    fn merge(flags: &SharedArgs, seed: Option<u64>, threads: Option<usize>, out: Option<PathBuf>) -> Self {
        Self {
            seed: flags.seed.or(seed).unwrap_or(0),
            threads: flags.threads.or(threads),
            out: flags.out.clone().or(out),
            stdout: flags.stdout,
        }
    }

    fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("."))
    }

    /// Writes the command's main result to stdout or `<out>/<name>`.
    fn emit_primary(&self, name: &str, content: &str) -> CliResult<()> {
        if self.stdout {
            let mut so = std::io::stdout().lock();
            so.write_all(content.as_bytes())
                .and_then(|_| so.flush())
                .map_err(|e| runtime(format!("writing to stdout: {e}")))
        } else {
            self.write_file(name, content)
        }
    }

    /// Secondary outputs go to `<out>/<name>`; with `--stdout` only when
    /// `--out` was given.
    fn emit_secondary(&self, name: &str, content: &str) -> CliResult<()> {
        if self.stdout && self.out.is_none() {
            return Ok(());
        }
        self.write_file(name, content)
    }

    fn write_file(&self, name: &str, content: &str) -> CliResult<()> {
        let dir = self.out_dir();
        fs::create_dir_all(&dir).map_err(|e| runtime(format!("{}: {e}", dir.display())))?;
        let path = dir.join(name);
        fs::write(&path, content).map_err(|e| runtime(format!("{}: {e}", path.display())))?;
        eprintln!("wrote {}", path.display());
        Ok(())
    }
}

pub(crate) fn load_config<T: DeserializeOwned + Default>(path: Option<&Path>) -> CliResult<T> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = fs::read_to_string(path).map_err(|e| usage(format!("config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("config {}: {e}", path.display())))
}

pub(crate) fn parse_model(s: Option<&str>) -> CliResult<CovarianceModel> {
    match s {
        None => Ok(CovarianceModel::default()),
        Some(s) => CovarianceModel::parse(s)
            .ok_or_else(|| usage(format!("unknown covariance model `{s}` (published, delta-method)"))),
    }
}

pub(crate) fn build_grid(alphas: Option<Vec<f64>>, step: Option<f64>) -> CliResult<AlphaGrid> {
    match (alphas, step) {
        (Some(_), Some(_)) => Err(usage("give either an explicit alpha grid or a step, not both")),
        (Some(a), None) => AlphaGrid::new(a).map_err(usage),
        (None, Some(s)) => AlphaGrid::with_step(s).map_err(usage),
        (None, None) => Ok(AlphaGrid::default()),
    }
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> CliResult<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| runtime(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let (name, result) = match &cli.command {
        Command::Simulate(a) => ("simulate", simulate::run(&cli.shared, a)),
        Command::Eval(a) => ("eval", eval::run(&cli.shared, a)),
        Command::AggregateSources(a) => ("aggregate-sources", aggregate::run(&cli.shared, a)),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            match &e {
                CliError::Usage(m) => {
                    eprintln!("error: {m}\n");
                    let mut cmd = Cli::command();
                    cmd.build();
                    if let Some(sub) = cmd.find_subcommand_mut(name) {
                        eprintln!("{}", sub.render_usage());
                    }
                    eprintln!("\nFor more information, try '--help'.");
                }
                CliError::Runtime(m) => eprintln!("error: {m}"),
            }
            e.code()
        }
    }
}
