//! `hidcvx`: property sweeps, eigensolvers and Hardy constants from the command line.

mod config;
mod eigen;
mod hardy;
mod report;
mod verify;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use config::ConfigFile;
use report::Outcome;

const AFTER_HELP: &str = "\
Configuration: every flag can also be set as `key = value` in the file given by
--config (keys are flag names; `-` and `_` are interchangeable, case is ignored).
Flags override the file, the file overrides the defaults shown above.

Reports: JSON with a `schema_version` field, the resolved configuration and a
list of checks. Identical configuration and seed give byte-identical output.

CSV columns:
  verify  principle,p,q,trials,min_gap,max_rel_error,violation,pass
  eigen   x0[,x1],u          (interior nodes, axis 0 fastest)
  hardy   beta,C_beta,error_estimate   (fractional mode)

Exit status: 0 all checks pass, 1 some check fails, 2 invalid parameters or I/O error.";

#[derive(Parser, Debug)]
#[command(name = "hidcvx", version, about, after_help = AFTER_HELP)]
struct Cli {
    /// key = value configuration file
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Seed of all random streams [default: 0]
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the report here instead of stdout
    #[arg(long, global = true, value_name = "PATH")]
    output: Option<PathBuf>,
    /// Report format [default: json]
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Worker threads; 0 lets the runtime decide
    #[arg(long, global = true, env = "HIDCVX_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        <Format as ValueEnum>::from_str(s, true)
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Seeded sweeps of the convexity and Picone gaps, or a sharpness counterexample
    Verify(verify::VerifyArgs),
    /// First eigenvalue of a local or nonlocal homogeneous energy on a grid
    Eigen(eigen::EigenArgs),
    /// Sharp local and fractional Hardy constants
    Hardy(hardy::HardyArgs),
}

fn run(cli: Cli) -> Result<bool> {
    let file = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let seed = file.get("seed", cli.seed, 0)?;
    let format = file.get("format", cli.format, Format::Json)?;
    let output = file.opt("output", cli.output.map(|p| p.display().to_string()))?;
    let threads = file.get("threads", cli.threads, 0)?;
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let outcome: Outcome = match cli.command {
        Command::Verify(args) => verify::run(args, &file, seed)?,
        Command::Eigen(args) => eigen::run(args, &file, seed)?,
        Command::Hardy(args) => hardy::run(args, &file, seed)?,
    };
    let body = match format {
        Format::Json => outcome.json,
        Format::Csv => match outcome.csv {
            Some(c) => c,
            None => bail!("this command has no CSV output"),
        },
    };
    match output {
        Some(path) => std::fs::write(&path, body).with_context(|| format!("writing {path}"))?,
        None => std::io::stdout().write_all(body.as_bytes())?,
    }
    Ok(outcome.pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
