//! Command-line front end.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::config::{ConfigFile, ExperimentConfig, SweepVariable};
use super::output::{write_realizations, write_results, write_summary};
use super::sweep::{cell_seed, run_sweep};
use super::validate::run_checks;
use crate::channel::{ChannelSet, Point};
use crate::solver::{run_bcd, IterationTrace, Mode};
use crate::system::ReflectionState;
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "active-ris", version, about = "Active-RIS beamforming simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sum-rate versus BS transmit budget.
    SweepPower(SweepArgs),
    /// Sum-rate versus x-coordinate of the user cluster.
    SweepPosition(SweepArgs),
    /// Sum-rate versus number of RIS elements.
    SweepElements(SweepArgs),
    /// One realization with the full iteration trace as JSON.
    SingleRun(SingleArgs),
    /// Run the built-in invariant checks.
    Validate(CommonArgs),
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// TOML configuration file; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Summary CSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated modes (practical_active, ideal_active, passive).
    #[arg(long, value_delimiter = ',')]
    mode: Option<Vec<Mode>>,
    /// Realizations per sweep point.
    #[arg(long)]
    realizations: Option<usize>,
    /// Also write the per-realization table to this path.
    #[arg(long)]
    per_realization: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SingleArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// JSON trace path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    mode: Option<Vec<Mode>>,
}

fn load(args: &CommonArgs) -> Result<ConfigFile> {
    let mut cfg = match &args.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    if let Some(seed) = args.seed {
        cfg.experiment.seed = seed;
    }
    Ok(cfg)
}

fn emit(out: Option<&Path>, write: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match out {
        Some(path) => {
            let file = std::fs::File::create(path).map_err(|source| Error::Io {
                path: path.to_path_buf(),
                source,
            })?;
            let mut w = std::io::BufWriter::new(file);
            write(&mut w)?;
            w.flush().map_err(|source| Error::Io {
                path: path.to_path_buf(),
                source,
            })
        }
        None => write(&mut std::io::stdout().lock()),
    }
}

fn stdout_err(e: impl std::fmt::Display) -> Error {
    Error::Domain(format!("writing to stdout: {e}"))
}

fn sweep(args: &SweepArgs, variable: SweepVariable) -> Result<()> {
    let cfg = load(&args.common)?;
    let mut exp: ExperimentConfig = cfg.experiment(variable)?;
    if let Some(modes) = &args.mode {
        exp.modes = modes.clone();
    }
    if let Some(n) = args.realizations {
        exp.realizations = n;
    }
    exp.output = args.out.clone();
    let result = run_sweep(&exp)?;
    match &exp.output {
        Some(path) => write_results(&result, path)?,
        None => write_summary(&result, std::io::stdout().lock()).map_err(stdout_err)?,
    }
    if let Some(path) = &args.per_realization {
        write_realizations(&result, path)?;
    }
    let failed: usize = result.summaries.iter().map(|s| s.n_failed).sum();
    if failed > 0 {
        eprintln!("warning: {failed} runs failed; see the per-realization table for reasons");
    }
    Ok(())
}

#[derive(Serialize)]
struct ModeTrace {
    mode: Mode,
    sum_rate: f64,
    design_sum_rate: f64,
    converged: bool,
    iterations: usize,
    hardware_capped_steps: usize,
    interval_feasible: bool,
    reflection: ReflectionState,
    trace: IterationTrace,
}

#[derive(Serialize)]
struct SingleRunReport {
    seed: u64,
    user_positions: Vec<Point>,
    runs: Vec<ModeTrace>,
}

fn single_run(args: &SingleArgs) -> Result<()> {
    let cfg = load(&args.common)?;
    let system = cfg.system_config()?;
    let modes = args.mode.clone().unwrap_or_else(|| cfg.experiment.modes.clone());
    let seed = cell_seed(cfg.experiment.seed, 0, 0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut geometry = cfg.geometry();
    geometry.draw_users(system.k, &mut rng);
    let channels = ChannelSet::generate(
        &geometry,
        &cfg.path_loss(),
        cfg.channel.rician_factor,
        system.m,
        system.l,
        &mut rng,
    )?;
    let runs = modes
        .iter()
        .map(|&mode| {
            let out = run_bcd(&channels, &system, &cfg.solver.options(mode))?;
            Ok(ModeTrace {
                mode,
                sum_rate: out.sum_rate,
                design_sum_rate: out.design_sum_rate,
                converged: out.converged,
                iterations: out.iterations,
                hardware_capped_steps: out.hardware_capped_steps,
                interval_feasible: out.interval_feasible(),
                reflection: out.reflection.clone(),
                trace: out.trace,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let report = SingleRunReport {
        seed,
        user_positions: geometry.user_positions.clone(),
        runs,
    };
    emit(args.out.as_deref(), |w| {
        serde_json::to_writer_pretty(&mut *w, &report).map_err(stdout_err)?;
        writeln!(w).map_err(stdout_err)
    })
}

fn validate(args: &CommonArgs) -> Result<bool> {
    let cfg = load(args)?;
    let exp = cfg.experiment(SweepVariable::PBsDbm)?;
    let checks = run_checks(&exp);
    for c in &checks {
        println!("[{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    Ok(checks.iter().all(|c| c.passed))
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::SweepPower(a) => sweep(a, SweepVariable::PBsDbm).map(|_| true),
        Command::SweepPosition(a) => sweep(a, SweepVariable::UserCenterXM).map(|_| true),
        Command::SweepElements(a) => sweep(a, SweepVariable::NumElements).map(|_| true),
        Command::SingleRun(a) => single_run(a).map(|_| true),
        Command::Validate(a) => validate(a),
    };
    match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
