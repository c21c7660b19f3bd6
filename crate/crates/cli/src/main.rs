//! `opelab`: batch runner for the free-field, renormalization, quadrature and
//! combinatorics experiments.
//!
//! Each subcommand reads an optional TOML config (`--config`), applies
//! command-line overrides, writes the resolved config and its reports to the
//! output directory and exits with `0` (pass), `1` (a checked bound or
//! criterion failed), `2` (configuration error) or `3` (numerical error).

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use commands::*;
use config::{config_hash, resolve_global, resolve_section, ConfigFile, Global, GlobalArgs, Resolved};
use error::CliError;
use output::{output_dir, Artifacts};

#[derive(Parser, Debug)]
#[command(name = "opelab", version, about = "Renormalized-product experiments", long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Options every subcommand accepts.
#[derive(Args, Debug, Clone)]
struct Common {
    /// TOML config with a `[global]` table and a table per subcommand.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (default: $OPELAB_OUT_DIR, then ./opelab-out).
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    global: GlobalArgs,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Dump sampled fields.
    Sample {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        args: SampleArgs,
    },
    /// Fit the sampled two-point function to a power law.
    Covariance {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        args: CovarianceArgs,
    },
    /// Report which closed form of the two-point prefactor the lattice matches.
    KappaCalibrate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        args: KappaArgs,
    },
    /// Wick-square statistics.
    Wick2 {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        args: Wick2Args,
    },
    /// Telescoping convergence study with the predicted rate.
    RenormConverge {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        args: ConvergeArgs,
    },
    /// True moment against the integral of pointwise correlations.
    MomentCheck {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        args: MomentArgs,
    },
    /// Elementary integral lemmas against their closed-form constants.
    LemmaCheck {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        args: LemmaArgs,
    },
    /// Endofunction counts, certificates and integration schedules.
    Pinsum {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        args: PinsumArgs,
    },
    /// Exhaustive exact power counting.
    PowerCount {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        args: PowerArgs,
    },
}

type Runner<T> = fn(&Global, &T, &mut Artifacts) -> Result<bool, CliError>;

fn execute<T>(name: &str, common: Common, flags: T, run: Runner<T>) -> Result<bool, CliError>
where
    T: Serialize + for<'de> Deserialize<'de>,
{
    let file = match &common.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let global = resolve_global(&file, common.global);
    let params: T = resolve_section(file.section(name), &flags, name)?;
    let resolved = Resolved {
        subcommand: name,
        global: &global,
        params: &params,
    }
    .to_toml()?;
    if let Some(w) = global.workers {
        // Results do not depend on the worker count; reductions run in a fixed order.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(w.max(1)).build_global();
    }
    let dir = output_dir(common.out);
    let mut out = Artifacts::new(&dir, name, config_hash(&resolved))?;
    let pass = run(&global, &params, &mut out)?;
    out.config(&resolved)?;
    for p in &out.written {
        eprintln!("wrote {}", p.display());
    }
    Ok(pass)
}

fn dispatch(cmd: Command) -> Result<bool, CliError> {
    match cmd {
        Command::Sample { common, args } => execute("sample", common, args, sample),
        Command::Covariance { common, args } => execute("covariance", common, args, covariance),
        Command::KappaCalibrate { common, args } => execute("kappa-calibrate", common, args, kappa_calibrate),
        Command::Wick2 { common, args } => execute("wick2", common, args, wick2),
        Command::RenormConverge { common, args } => execute("renorm-converge", common, args, renorm_converge),
        Command::MomentCheck { common, args } => execute("moment-check", common, args, moment_check),
        Command::LemmaCheck { common, args } => execute("lemma-check", common, args, lemma_check),
        Command::Pinsum { common, args } => execute("pinsum", common, args, pinsum),
        Command::PowerCount { common, args } => execute("power-count", common, args, power_count),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("check failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("opelab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
