//! Command-line runner: `analyze`, `optimize`, `simulate` and `reproduce`.

pub mod commands;
pub mod config;
pub mod output;
pub mod reproduce;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::error::SapError;
pub use config::{ExperimentConfig, OutageArg, SensingArg, VariantArg};
pub use output::OutDir;
pub use reproduce::{figure_config, Figure};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_NUMERICS: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },
    #[error(transparent)]
    Sap(#[from] SapError),
}

impl From<crate::error::ParamError> for CliError {
    fn from(e: crate::error::ParamError) -> Self {
        CliError::Sap(e.into())
    }
}

impl CliError {
    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } | CliError::Csv { .. } => EXIT_CONFIG,
            CliError::Sap(e) => match e {
                SapError::InfeasibleProtection { .. } => EXIT_INFEASIBLE,
                SapError::Numerics(_) => EXIT_NUMERICS,
                SapError::Param(_)
                | SapError::InvalidInput(_)
                | SapError::NonPositiveInterference(_)
                | SapError::InsufficientBinOccupancy { .. } => EXIT_CONFIG,
            },
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "sap-lab", version, about = "Sense-and-predict access analysis and simulation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Access-probability curves over θ and over measured interference.
    Analyze(Common),
    /// Grid search for (θ*, β*) under primary protection.
    Optimize(Common),
    /// Monte Carlo estimates per protocol.
    Simulate(Common),
    /// Regenerate the data behind one figure from built-in settings.
    Reproduce {
        figure: Figure,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// TOML config file; omitted keys take their defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `out` in the config).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long, value_enum)]
    pub variant: Option<VariantArg>,
    #[arg(long, value_enum)]
    pub sensing: Option<SensingArg>,
    #[arg(long, value_enum)]
    pub outage: Option<OutageArg>,
}

impl Common {
    /// Load the config (or `base`) and apply the flag overrides.
    fn resolve(&self, base: ExperimentConfig) -> Result<ExperimentConfig, CliError> {
        let mut c = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
                ExperimentConfig::from_toml(&text)?
            }
            None => base,
        };
        if let Some(out) = &self.out {
            c.out = out.to_string_lossy().into_owned();
        }
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(t) = self.trials {
            c.trials = t;
        }
        if let Some(v) = self.variant {
            c.variant = v;
        }
        if let Some(s) = self.sensing {
            c.sensing = s;
        }
        if let Some(o) = self.outage {
            c.outage = o;
        }
        Ok(c)
    }
}

/// Parse `args`, run the command and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(&cli.command) {
        Ok(out) => {
            for path in out.written() {
                println!("{}", path.display());
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cmd: &Command) -> Result<OutDir, CliError> {
    let (common, base) = match cmd {
        Command::Analyze(c) | Command::Optimize(c) | Command::Simulate(c) => (c, ExperimentConfig::default()),
        Command::Reproduce { figure, common } => (common, figure_config(*figure)),
    };
    let cfg = common.resolve(base)?;
    cfg.validate()?;
    let mut out = OutDir::create(cfg.out.as_ref(), &cfg.sha256(), cfg.seed)?;
    match cmd {
        Command::Analyze(_) => commands::analyze(&cfg, &mut out)?,
        Command::Optimize(_) => commands::optimize_cmd(&cfg, &mut out)?,
        Command::Simulate(_) => commands::simulate(&cfg, &mut out)?,
        Command::Reproduce { figure, .. } => reproduce::reproduce(*figure, &cfg, &mut out)?,
    }
    Ok(out)
}
