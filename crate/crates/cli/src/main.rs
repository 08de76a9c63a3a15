use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use dynkin_cli::harness::{converge_artifacts, oracle_artifacts, price_artifacts, region_artifacts, table_artifacts};
use dynkin_cli::{Artifacts, CliError, Comparator, RunConfig};

#[derive(Parser)]
#[command(name = "dynkin", version, about = "Robust game option pricing on a trinomial lattice")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "./out")]
    out: PathBuf,
    /// Worker threads for sweeps (0 = one per core).
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum ComparatorArg {
    Robust,
    Bs,
}

#[derive(Subcommand)]
enum Command {
    /// Price every spot × n cell.
    Price(Common),
    /// Spots × n table, optionally with the binomial comparator panel.
    Table {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "robust")]
        comparator: ComparatorArg,
    },
    /// Convergence study against the largest n.
    Converge(Common),
    /// Seller stopping regions (robust and binomial) for one spot.
    Region(Common),
    /// Compare the solver with the brute-force oracles.
    #[command(hide = true, name = "oracle-check")]
    OracleCheck {
        #[command(flatten)]
        common: Common,
        /// Also run this many randomized instances.
        #[arg(long)]
        random: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn write_all(dir: &Path, artifacts: &Artifacts) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    for (name, bytes) in &artifacts.files {
        fs::write(dir.join(name), bytes)?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (common, artifacts) = match cli.command {
        Command::Price(c) => {
            let cfg = RunConfig::load(&c.config)?;
            let a = price_artifacts(&cfg, c.threads)?;
            (c, a)
        }
        Command::Table { common, comparator } => {
            let cfg = RunConfig::load(&common.config)?;
            let comparator = match comparator {
                ComparatorArg::Robust => Comparator::Robust,
                ComparatorArg::Bs => Comparator::BlackScholes,
            };
            let a = table_artifacts(&cfg, comparator, common.threads)?;
            (common, a)
        }
        Command::Converge(c) => {
            let cfg = RunConfig::load(&c.config)?;
            let a = converge_artifacts(&cfg, c.threads)?;
            (c, a)
        }
        Command::Region(c) => {
            let cfg = RunConfig::load(&c.config)?;
            let a = region_artifacts(&cfg, c.threads)?;
            (c, a)
        }
        Command::OracleCheck { common, random, seed } => {
            let cfg = RunConfig::load(&common.config)?;
            let a = oracle_artifacts(&cfg, random, seed)?;
            (common, a)
        }
    };
    write_all(&common.out, &artifacts)?;
    print!("{}", artifacts.summary);
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
