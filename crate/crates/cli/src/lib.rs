//! `tiedown` command-line front end: parses flags and JSON configs, runs one
//! experiment and writes its reports, CSV tables and a hashed manifest.

pub mod config;
pub mod experiments;
pub mod output;

use clap::{Parser, Subcommand};
use std::ffi::OsString;

pub use config::ExperimentConfig;
pub use experiments::{parse_functional, Experiment};

/// Exit status when every report passed.
pub const EXIT_PASS: i32 = 0;
/// At least one report failed its comparison or a check.
pub const EXIT_FAIL: i32 = 1;
/// Bad flags, config, or inputs outside an operation's domain.
pub const EXIT_USAGE: i32 = 2;
/// Numerical failure, memory bound, degenerate input or I/O failure.
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "tiedown", version, about = "Tied-down occupation-time experiments")]
pub struct Cli {
    #[command(flatten)]
    pub config: ExperimentConfig,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a named experiment (or the one named in --config).
    Run { experiment: Option<Experiment> },
    /// Exact renewal-sequence computations.
    Renewal {
        #[command(subcommand)]
        which: RenewalCommand,
    },
    /// Intermittent interval map simulations.
    Lsv {
        #[command(subcommand)]
        which: LsvCommand,
    },
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum RenewalCommand {
    /// u, a and tail tables as CSV.
    Tables,
    /// Renewal-theorem ratios over decades.
    Srt,
    /// Local limit theorem on a kappa window.
    Llt,
    /// Exact tied-down expectation at --big-n.
    Tieddown,
    /// Cesàro average of tied-down expectations against the sampler.
    Cesaro,
    /// Cesàro statistic for a single factor over N/4, N/2, N.
    Cor7,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum LsvCommand {
    /// Ulam invariant density.
    Density,
    /// Empirical return sequence from orbits started in [1/2, 1].
    Returns,
    /// Umbrella statistic against the tied-down sampler.
    Umbrella,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(tiedown_core::Error),
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use tiedown_core::Error as E;
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Core(E::Domain(_) | E::Config(_) | E::Parse(_)) => EXIT_USAGE,
            CliError::Core(E::Numeric { .. } | E::MemoryBound { .. } | E::Degenerate(_)) => EXIT_NUMERIC,
            CliError::Io(_) => EXIT_NUMERIC,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl Command {
    fn experiment(&self, cfg: &ExperimentConfig) -> Result<Experiment, CliError> {
        Ok(match self {
            Command::Run { experiment: Some(e) } => *e,
            Command::Run { experiment: None } => match &cfg.experiment {
                Some(name) => Experiment::parse(name).map_err(CliError::Usage)?,
                None => return Err(CliError::Usage("no experiment given on the command line or in the config".into())),
            },
            Command::Renewal { which } => match which {
                RenewalCommand::Tables => Experiment::RenewalTables,
                RenewalCommand::Srt => Experiment::Srt,
                RenewalCommand::Llt => Experiment::Llt,
                RenewalCommand::Tieddown => Experiment::RenewalTieddown,
                RenewalCommand::Cesaro => Experiment::UmbrellaRenewal,
                RenewalCommand::Cor7 => Experiment::Cor7,
            },
            Command::Lsv { which } => match which {
                LsvCommand::Density => Experiment::LsvDensity,
                LsvCommand::Returns => Experiment::LsvReturns,
                LsvCommand::Umbrella => Experiment::UmbrellaLsv,
            },
        })
    }
}

/// Summary of a finished run.
#[derive(Debug)]
pub struct Outcome {
    pub experiment: Experiment,
    pub pass: bool,
    pub files: Vec<String>,
    pub summaries: Vec<String>,
}

/// Runs the parsed command; errors leave no artifacts behind.
pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let mut cfg = ExperimentConfig::resolve(&cli.config).map_err(CliError::Usage)?;
    let exp = cli.command.experiment(&cfg)?;
    cfg.experiment = Some(exp.name());
    if let Some(t) = cfg.threads {
        tiedown_core::exec::init_threads(t);
    }
    let art = experiments::run(exp, &cfg).map_err(CliError::Core)?;
    let dir = cfg.out_dir();
    // the manifest records what determines the results, not where they went
    let recorded = ExperimentConfig { out: None, threads: None, ..cfg.clone() };
    let files = output::write_all(&dir, &exp.name(), &recorded, &art).map_err(CliError::Io)?;
    Ok(Outcome {
        experiment: exp,
        pass: art.all_pass(),
        files: files.iter().map(|f| dir.join(f).display().to_string()).collect(),
        summaries: art.reports.iter().map(|(_, r)| r.summary()).collect(),
    })
}

/// Parses `args`, runs, prints a summary and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(out) => {
            for s in &out.summaries {
                println!("{s}");
            }
            for f in &out.files {
                println!("wrote {f}");
            }
            if out.pass {
                EXIT_PASS
            } else {
                EXIT_FAIL
            }
        }
        Err(e) => {
            eprintln!("tiedown: {e}");
            e.exit_code()
        }
    }
}
