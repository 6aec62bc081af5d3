//! `qqlab`: command-line front end for the set equality workbench.

mod commands;
mod config;
mod report;

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use config::FileConfig;

#[derive(Debug, Parser)]
#[command(name = "qqlab", version, about = "Set equality query lower bound workbench")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON file of default flag values, keyed by long flag name.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// RNG seed; falls back to the config file, then QQLAB_SEED, then 0.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for trial loops.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OriginArg {
    Complementary,
    Equivalent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Grover,
    Comesfrom,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Alg {
    Grover,
    Sqrtn,
    Cuberoot,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Dist {
    /// Read both tables and compare the value sets.
    Exact,
    Sqrtn,
    /// Majority of five runs of the sqrt-n algorithm.
    SqrtnMajority,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GridArg {
    Pow2,
    Divisors,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample function pairs from random sources, one JSON record per line.
    Reduce {
        #[arg(long)]
        n: Option<u64>,
        /// Source is r-to-one; omit for a one-to-one source.
        #[arg(long)]
        r: Option<u64>,
        /// Range size (default n).
        #[arg(long = "N")]
        range_size: Option<u64>,
        #[arg(long, value_enum)]
        origin: Option<OriginArg>,
        /// Number of pairs (default 1).
        #[arg(long)]
        count: Option<u64>,
    },
    /// Profile sweep: INV(a) of complementary or equivalent reductions.
    Inv {
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        r: Option<u64>,
        #[arg(long = "N")]
        range_size: Option<u64>,
        #[arg(long, value_enum)]
        origin: Option<OriginArg>,
        /// Rows (default 100).
        #[arg(long)]
        trials: Option<u64>,
        /// BAD constant as an exact rational such as 15 or 1/2.
        #[arg(long)]
        constant: Option<String>,
    },
    /// Exact and Monte Carlo BAD probability.
    Badprob {
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        r: Option<u64>,
        /// Monte Carlo trials (default 10000).
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        constant: Option<String>,
    },
    /// Adversary bound from an input relation.
    Adversary {
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        r: Option<u64>,
        /// Image multiplicities, comma separated.
        #[arg(long)]
        profile: Option<String>,
        /// JSON file {"x": [[..]], "y": [[..]], "pairs": [[i, j], ..]} with
        /// 0-based indices into x and y.
        #[arg(long)]
        relation: Option<PathBuf>,
    },
    /// Query simulator runs.
    Simulate {
        #[arg(long, value_enum)]
        alg: Option<Alg>,
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        r: Option<u64>,
        /// Runs (default 1000).
        #[arg(long)]
        trials: Option<u64>,
        /// Marked items for grover (default 1).
        #[arg(long)]
        m: Option<u64>,
        /// Grover iterations, or the cube-root sample size.
        #[arg(long)]
        k: Option<u64>,
        /// Distinguisher for the acceptance table (default exact).
        #[arg(long, value_enum)]
        dist: Option<Dist>,
    },
    /// Collision and distinction terms and the optimal r.
    Bounds {
        #[arg(long)]
        n: Option<u64>,
        #[arg(long, value_enum)]
        grid: Option<GridArg>,
        /// Sweep n1..n2 over n1, 2·n1, 4·n1, ... up to n2, as CSV.
        #[arg(long)]
        sweep: Option<String>,
    },
}

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    /// Already rendered by clap, printed verbatim.
    Clap(String),
    Core(qqlab::Error),
    Io(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Core(e) if e.is_invariant_violation() => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(s) | Failure::Clap(s) | Failure::Io(s) => f.write_str(s),
            Failure::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<qqlab::Error> for Failure {
    fn from(e: qqlab::Error) -> Self {
        Failure::Core(e)
    }
}

/// Value of `--config` in raw arguments, if any.
fn config_path(args: &[OsString]) -> Option<PathBuf> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(PathBuf::from(p));
        }
    }
    None
}

fn parse(args: Vec<OsString>) -> Result<Cli, Failure> {
    let err = match Cli::try_parse_from(&args) {
        Ok(cli) => return Ok(cli),
        Err(e) => e,
    };
    match err.kind() {
        ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
            let _ = err.print();
            std::process::exit(0);
        }
        ErrorKind::MissingSubcommand | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
            // A config file may name the command.
            if let Some(path) = config_path(&args) {
                if let Some(command) = FileConfig::load(&path)?.string("command")? {
                    let mut args = args;
                    args.push(command.into());
                    return Cli::try_parse_from(args).map_err(|e| Failure::Clap(e.render().to_string()));
                }
            }
            Err(Failure::Clap(err.render().to_string()))
        }
        _ => Err(Failure::Clap(err.render().to_string())),
    }
}

fn main() -> ExitCode {
    let result = parse(std::env::args_os().collect()).and_then(commands::dispatch);
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Clap(text)) => {
            eprint!("{text}");
            ExitCode::from(1)
        }
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(Failure::Core(qqlab::Error::OddDomain).code(), 1);
        assert_eq!(Failure::Core(qqlab::Error::Invariant("x".into())).code(), 2);
        assert_eq!(Failure::Usage("x".into()).code(), 1);
        assert_eq!(Failure::Io("x".into()).code(), 1);
    }

    #[test]
    fn config_path_forms() {
        let args: Vec<OsString> = ["qqlab", "--config", "a.json"].iter().map(OsString::from).collect();
        assert_eq!(config_path(&args), Some(PathBuf::from("a.json")));
        let args: Vec<OsString> = ["qqlab", "--config=b.json"].iter().map(OsString::from).collect();
        assert_eq!(config_path(&args), Some(PathBuf::from("b.json")));
    }

    #[test]
    fn clap_definition_is_valid() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
