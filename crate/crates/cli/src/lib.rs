//! Command-line surface of patchkpp: JSON configs in, JSON summaries and
//! CSV plot data out.

pub mod commands;
pub mod config;
pub mod initial;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;

pub use commands::{cmd_eigen, cmd_persistence_map, cmd_selftest, cmd_simulate, cmd_speed, cmd_steady};
pub use config::RunConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NOT_PERSISTENT: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("cannot write {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] patchkpp::Error),
    #[error("check failed: {0}")]
    CheckFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use patchkpp::Error as E;
        match self {
            CliError::Config(_) | CliError::Io { .. } => EXIT_CONFIG,
            CliError::Core(E::NotPersistent(_)) => EXIT_NOT_PERSISTENT,
            CliError::Core(
                E::NonPositiveParameter { .. }
                | E::AlphaOutOfRange(_)
                | E::InvalidReaction(_)
                | E::NotSourceSink { .. }
                | E::ResolutionTooCoarse(_)
                | E::NegativeInitialData { .. }
                | E::WindowTooSmall(_),
            ) => EXIT_CONFIG,
            CliError::Core(_) | CliError::CheckFailed(_) => EXIT_NUMERICAL,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

/// Files written by one command, relative to its output directory, plus a
/// JSON summary of the headline numbers.
#[derive(Debug, Clone, Serialize)]
pub struct Artifacts {
    pub dir: PathBuf,
    pub files: Vec<String>,
    pub summary: serde_json::Value,
}

/// Output directory that records every file it hands out.
pub struct Out {
    dir: PathBuf,
    files: Vec<String>,
}

impl Out {
    pub fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
        let path = self.dir.join(name);
        let io = |source| CliError::Io { path: path.clone(), source };
        let mut w = BufWriter::new(File::create(&path).map_err(io)?);
        body(&mut w).and_then(|_| w.flush()).map_err(io)?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        self.write(name, |w| {
            serde_json::to_writer_pretty(&mut *w, value)?;
            writeln!(w)
        })
    }

    pub fn finish(self, summary: serde_json::Value) -> Artifacts {
        Artifacts {
            dir: self.dir,
            files: self.files,
            summary,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "patchkpp", version, about = "Reaction-diffusion in periodic two-patch landscapes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct RunArgs {
    /// JSON run configuration, or a manifest.json from an earlier run.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides output.directory in the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed for randomized initial data; overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Principal eigenvalues by every method, the Dirichlet ladder and thresholds.
    Eigen(RunArgs),
    /// Spreading speed from the variational formula.
    Speed(RunArgs),
    /// Time evolution from the configured initial data.
    Simulate(RunArgs),
    /// Periodic steady state and its uniqueness.
    Steady(RunArgs),
    /// Sign of lambda1 over a parameter grid.
    PersistenceMap(RunArgs),
    /// Built-in consistency checks; the config is optional.
    Selftest(RunArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Eigen(_) => "eigen",
            Command::Speed(_) => "speed",
            Command::Simulate(_) => "simulate",
            Command::Steady(_) => "steady",
            Command::PersistenceMap(_) => "persistence-map",
            Command::Selftest(_) => "selftest",
        }
    }

    pub fn args(&self) -> &RunArgs {
        match self {
            Command::Eigen(a)
            | Command::Speed(a)
            | Command::Simulate(a)
            | Command::Steady(a)
            | Command::PersistenceMap(a)
            | Command::Selftest(a) => a,
        }
    }
}

pub const DEFAULT_OUT: &str = "patchkpp-out";
pub const DEFAULT_SEED: u64 = 0;

/// Caps the global worker pool at `PATCHKPP_THREADS` when set.
pub fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("PATCHKPP_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("PATCHKPP_THREADS must be a positive integer, got {raw:?}")))?;
    // A pool built earlier in the process wins; that is fine for tests.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

#[derive(Serialize)]
struct Manifest<'a> {
    manifest_version: u32,
    command: &'a str,
    config: Option<&'a RunConfig>,
    seed: u64,
    versions: Versions,
    outputs: &'a [String],
    status: Status,
}

#[derive(Serialize)]
struct Versions {
    patchkpp_cli: &'static str,
    patchkpp_core: &'static str,
}

#[derive(Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
enum Status {
    Ok,
    Failed { error: String, exit_code: i32 },
}

/// Loads the config, runs the command and writes `manifest.json` whether
/// or not the command succeeded.
pub fn run(command: &Command) -> Result<Artifacts> {
    let args = command.args();
    let mut config = match (&args.config, command) {
        (Some(path), _) => Some(RunConfig::from_path(path)?),
        (None, Command::Selftest(_)) => None,
        (None, _) => return Err(CliError::Config("--config is required".into())),
    };
    let seed = args
        .seed
        .or(config.as_ref().and_then(|c| c.seed))
        .unwrap_or(DEFAULT_SEED);
    if let Some(c) = config.as_mut() {
        c.seed = Some(seed);
    }
    let out = args
        .out
        .clone()
        .or(config.as_ref().and_then(|c| c.output.directory.clone()))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    if let Some(c) = config.as_mut() {
        c.output.directory = Some(out.clone());
    }
    let result = match (command, &config) {
        (Command::Selftest(_), _) => cmd_selftest(&out),
        (_, None) => unreachable!("config checked above"),
        (Command::Eigen(_), Some(c)) => cmd_eigen(c, &out),
        (Command::Speed(_), Some(c)) => cmd_speed(c, &out),
        (Command::Simulate(_), Some(c)) => cmd_simulate(c, &out),
        (Command::Steady(_), Some(c)) => cmd_steady(c, &out),
        (Command::PersistenceMap(_), Some(c)) => cmd_persistence_map(c, &out),
    };
    let (outputs, status) = match &result {
        Ok(a) => (a.files.clone(), Status::Ok),
        Err(e) => (
            Vec::new(),
            Status::Failed {
                error: e.to_string(),
                exit_code: e.exit_code(),
            },
        ),
    };
    let manifest = Manifest {
        manifest_version: 1,
        command: command.name(),
        config: config.as_ref(),
        seed,
        versions: Versions {
            patchkpp_cli: env!("CARGO_PKG_VERSION"),
            patchkpp_core: patchkpp::VERSION,
        },
        outputs: &outputs,
        status,
    };
    Out::new(&out)?.json("manifest.json", &manifest)?;
    result
}
