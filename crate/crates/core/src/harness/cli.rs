//! `kbandit` command line.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use super::config::{ExperimentConfig, ExperimentKind};
use super::coverage::BoundFamily;
use super::output::{
    summary_path, write_coverage_records, write_coverage_summaries, write_file, write_infogain_rows,
    write_run_records,
};
use super::{run_coverage_experiment, run_info_gain_sweep, run_regret_experiment, Execution};
use crate::error::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERIC: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "kbandit", version, about = "Bernoulli kernelized bandit experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Cumulative-regret curves for every (policy, seed) pair.
    Regret(CommonArgs),
    /// Per-round confidence-bound coverage at every arm.
    Coverage(CommonArgs),
    /// Greedy maximum information gain against the observed gain.
    Infogain(CommonArgs),
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output CSV; overrides the config's `output`. Defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Added to every seed in the config.
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    seed_offset: i64,
    /// Suppress the progress summary on stderr.
    #[arg(long)]
    quiet: bool,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Numeric(_) => EXIT_NUMERIC,
        _ => EXIT_CONFIG,
    }
}

/// Parses `argv` (including the program name), runs the experiment and
/// returns the process exit code. Diagnostics go to stderr.
pub fn cli_main<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match run(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let (kind, args) = match cli.command {
        Command::Regret(a) => (ExperimentKind::Regret, a),
        Command::Coverage(a) => (ExperimentKind::Coverage, a),
        Command::Infogain(a) => (ExperimentKind::Infogain, a),
    };
    let config = ExperimentConfig::load(&args.config)?;
    if config.kind != kind {
        return Err(Error::Config(format!(
            "{}: config kind is `{}` but subcommand is `{}`",
            args.config.display(),
            config.kind.as_str(),
            kind.as_str()
        )));
    }
    let seeds = config.shifted_seeds(args.seed_offset);
    let out = args.out.clone().or_else(|| config.output.as_ref().map(PathBuf::from));
    let exec = Execution::Parallel;

    match kind {
        ExperimentKind::Regret => {
            let records = run_regret_experiment(&config, &seeds, exec)?;
            emit(out.as_deref(), |w| write_run_records(w, &records))?;
            if !args.quiet {
                eprintln!(
                    "regret: {} policies x {} seeds x {} rounds, {} rows",
                    config.policies.len(),
                    seeds.len(),
                    config.horizon,
                    records.len()
                );
            }
        }
        ExperimentKind::Coverage => {
            let result = run_coverage_experiment(&config, &seeds, exec)?;
            emit(out.as_deref(), |w| write_coverage_records(w, &result.records))?;
            if let Some(path) = &out {
                write_file(&summary_path(path), |w| write_coverage_summaries(w, &result.summaries))?;
            }
            if !args.quiet {
                for family in BoundFamily::ALL {
                    eprintln!(
                        "coverage: {:<26} runs with any violation {:.4} (upper only {:.4})",
                        family.as_str(),
                        result.violation_fraction(family, None, false),
                        result.violation_fraction(family, None, true)
                    );
                }
            }
        }
        ExperimentKind::Infogain => {
            let rows = run_info_gain_sweep(&config, &seeds, exec)?;
            emit(out.as_deref(), |w| write_infogain_rows(w, &rows))?;
            if !args.quiet {
                let inverted = rows.iter().filter(|r| r.inverted).count();
                eprintln!("infogain: {} rows, {} inverted", rows.len(), inverted);
            }
        }
    }
    Ok(())
}

fn emit(path: Option<&Path>, f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
    match path {
        Some(p) => write_file(p, f),
        None => {
            let mut buf = Vec::new();
            f(&mut buf)?;
            std::io::stdout().lock().write_all(&buf).map_err(|source| Error::Io {
                path: "<stdout>".into(),
                source,
            })
        }
    }
}
