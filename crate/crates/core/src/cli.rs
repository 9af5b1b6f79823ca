//! Command-line front-end.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid arguments, 3 numerical failure.
//! Output is fully computed before anything is written, and files are replaced atomically,
//! so a failing run never leaves a partial file behind.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::figures::{self, FIGURES};
use crate::optimizer::AnnealConfig;
use crate::output::{write_atomic, Format, Table};
use crate::scan::{
    anneal_tables, qfi_table, read_amplitudes, read_povm, tradeoff_table, validity_table, Method, PovmChoice, ScanSpec,
    StateSpec,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "qest", version, about = "Phase and phase-diffusion Fisher information toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Quantum Fisher information matrix over a (K, Δ) grid.
    Qfi {
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Trade-off Tr[F H⁻¹] of a projective measurement.
    Tradeoff {
        #[command(flatten)]
        grid: GridArgs,
        /// canonical, canonical-raw, large-optimal, or a JSON file of outcome vectors.
        #[arg(long, default_value = "canonical")]
        povm: String,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Simulated-annealing search for the best projective measurement.
    Anneal {
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        anneal: AnnealArgs,
        /// Also write the improvement history to this file.
        #[arg(long)]
        history: Option<PathBuf>,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Validity thresholds of the closed-form regimes.
    Validity {
        #[command(flatten)]
        grid: GridArgs,
        /// Also locate thresholds numerically against the exact QFI.
        #[arg(long)]
        numeric: bool,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Data series behind a figure; with --out, a directory receiving one file per series and a manifest.
    Figure {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(FIGURES))]
        name: String,
        #[command(flatten)]
        io: IoArgs,
    },
}

#[derive(Args, Debug)]
struct GridArgs {
    /// hb, or fpn together with --amplitudes.
    #[arg(long, default_value = "hb")]
    state: String,
    /// JSON list of [re, im] amplitude pairs for n = 0..2K.
    #[arg(long)]
    amplitudes: Option<PathBuf>,
    /// Half particle number; a comma-separated list is accepted.
    #[arg(long = "K", value_delimiter = ',')]
    k: Vec<usize>,
    /// Inclusive range `start:stop` or `start:stop:step`.
    #[arg(long = "K-range")]
    k_range: Option<String>,
    /// Diffusion width; a comma-separated list is accepted.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    delta: Vec<f64>,
    /// Evenly spaced grid `start:stop:count`, endpoints included.
    #[arg(long = "delta-grid")]
    delta_grid: Option<String>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    phi: f64,
    #[arg(long, default_value = "exact")]
    method: Method,
    /// Relative error budget for validity flags and thresholds.
    #[arg(long = "f", default_value_t = 0.05)]
    f: f64,
}

#[derive(Args, Debug)]
struct IoArgs {
    /// Output file (directory for `figure`); stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: Format,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct AnnealArgs {
    #[arg(long, default_value_t = AnnealConfig::default().initial_temperature)]
    t0: f64,
    #[arg(long, default_value_t = AnnealConfig::default().cooling_factor)]
    cooling: f64,
    #[arg(long, default_value_t = AnnealConfig::default().steps_per_temperature)]
    steps: usize,
    #[arg(long, default_value_t = AnnealConfig::default().temperature_levels)]
    levels: usize,
    #[arg(long = "step-size", default_value_t = AnnealConfig::default().initial_step_size)]
    step_size: f64,
    #[arg(long = "step-decay", default_value_t = AnnealConfig::default().step_decay)]
    step_decay: f64,
    #[arg(long, default_value_t = AnnealConfig::default().restarts)]
    restarts: usize,
}

impl AnnealArgs {
    fn config(&self, seed: u64) -> AnnealConfig {
        AnnealConfig {
            initial_temperature: self.t0,
            cooling_factor: self.cooling,
            steps_per_temperature: self.steps,
            temperature_levels: self.levels,
            initial_step_size: self.step_size,
            step_decay: self.step_decay,
            restarts: self.restarts,
            seed,
        }
    }
}

fn usage(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

fn parse_k_range(s: &str) -> Result<Vec<usize>> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |p: &str| p.trim().parse::<usize>().map_err(|_| usage(format!("bad --K-range '{s}'")));
    let (a, b, step) = match parts.as_slice() {
        [a, b] => (num(a)?, num(b)?, 1),
        [a, b, c] => (num(a)?, num(b)?, num(c)?),
        _ => return Err(usage(format!("--K-range expects start:stop[:step], got '{s}'"))),
    };
    if a > b {
        return Err(usage(format!("--K-range '{s}' is not ordered")));
    }
    if step == 0 {
        return Err(usage("--K-range step must be positive"));
    }
    Ok((a..=b).step_by(step).collect())
}

fn parse_delta_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, n] = parts.as_slice() else {
        return Err(usage(format!("--delta-grid expects start:stop:count, got '{s}'")));
    };
    let bad = || usage(format!("bad --delta-grid '{s}'"));
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    let n: usize = n.trim().parse().map_err(|_| bad())?;
    if n == 0 {
        return Err(usage("--delta-grid count must be positive"));
    }
    if !(a <= b) {
        return Err(usage(format!("--delta-grid '{s}' is not ordered")));
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    Ok((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect())
}

fn build_spec(grid: &GridArgs, io: &IoArgs, need_delta: bool) -> Result<ScanSpec> {
    let state = match (grid.state.as_str(), &grid.amplitudes) {
        ("hb", None) => StateSpec::Hb,
        ("hb", Some(_)) => return Err(usage("--amplitudes requires --state fpn")),
        ("fpn", Some(p)) => StateSpec::Amplitudes(read_amplitudes(p)?),
        ("fpn", None) => return Err(usage("--state fpn requires --amplitudes FILE")),
        (other, _) => return Err(usage(format!("unknown state '{other}' (expected hb or fpn)"))),
    };
    let mut ks = grid.k.clone();
    if let Some(r) = &grid.k_range {
        ks.extend(parse_k_range(r)?);
    }
    if let StateSpec::Amplitudes(a) = &state {
        let k_file = a.len().saturating_sub(1) / 2;
        if ks.iter().any(|&k| k != k_file) {
            return Err(usage(format!("--K disagrees with the amplitude file (K = {k_file})")));
        }
        ks = vec![k_file];
    }
    if ks.is_empty() {
        return Err(usage("no K given (use --K or --K-range)"));
    }
    let mut deltas = grid.delta.clone();
    if let Some(g) = &grid.delta_grid {
        deltas.extend(parse_delta_grid(g)?);
    }
    if !need_delta {
        deltas = vec![0.0];
    } else if deltas.is_empty() {
        return Err(usage("no delta given (use --delta or --delta-grid)"));
    }
    let spec = ScanSpec {
        state,
        ks,
        deltas,
        phi: grid.phi,
        method: grid.method,
        f: grid.f,
        jobs: io.jobs,
        seed: io.seed,
    };
    spec.validate()?;
    Ok(spec)
}

fn parse_povm(s: &str) -> Result<PovmChoice> {
    Ok(match s {
        "canonical" => PovmChoice::Canonical,
        "canonical-raw" => PovmChoice::CanonicalRaw,
        "large-optimal" => PovmChoice::LargeOptimal,
        path => PovmChoice::Explicit(read_povm(Path::new(path))?),
    })
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            use std::io::Write;
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes())?;
            so.flush()?;
            Ok(())
        }
    }
}

fn emit_table(t: &Table, io: &IoArgs) -> Result<()> {
    emit(&t.render(io.format), io.out.as_deref())
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Qfi { grid, io } => emit_table(&qfi_table(&build_spec(&grid, &io, true)?)?, &io),
        Command::Tradeoff { grid, povm, io } => {
            let spec = build_spec(&grid, &io, true)?;
            let choice = parse_povm(&povm)?;
            emit_table(&tradeoff_table(&spec, &choice)?, &io)
        }
        Command::Anneal { grid, anneal, history, io } => {
            let spec = build_spec(&grid, &io, true)?;
            let cfg = anneal.config(io.seed);
            cfg.validate()?;
            let tables = anneal_tables(&spec, &cfg)?;
            let summary = tables.summary.render(io.format);
            let hist = tables.history.render(io.format);
            if let Some(h) = &history {
                write_atomic(h, hist.as_bytes())?;
            }
            emit(&summary, io.out.as_deref())
        }
        Command::Validity { grid, numeric, io } => {
            let spec = build_spec(&grid, &io, false)?;
            emit_table(&validity_table(&spec, numeric)?, &io)
        }
        Command::Figure { name, io } => {
            if io.jobs == Some(0) {
                return Err(usage("--jobs must be at least 1"));
            }
            let bundle = figures::build(&name, io.seed, io.jobs)?;
            let ext = match io.format {
                Format::Csv => "csv",
                Format::Json => "json",
            };
            match &io.out {
                None => {
                    let all: String = bundle.tables.iter().map(|t| t.render(io.format)).collect();
                    emit(&all, None)
                }
                Some(dir) => {
                    std::fs::create_dir_all(dir)?;
                    let names: Vec<String> = bundle.tables.iter().map(|t| format!("{}.{ext}", t.command)).collect();
                    let rendered: Vec<String> = bundle.tables.iter().map(|t| t.render(io.format)).collect();
                    for (n, r) in names.iter().zip(&rendered) {
                        write_atomic(&dir.join(n), r.as_bytes())?;
                    }
                    let manifest = serde_json::to_string_pretty(&bundle.manifest(&names))? + "\n";
                    write_atomic(&dir.join("manifest.json"), manifest.as_bytes())
                }
            }
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidArgument(_) | Error::DimensionMismatch { .. } | Error::Json(_) => EXIT_USAGE,
        Error::NumericalFailure { .. } => EXIT_NUMERICAL,
        Error::Io(_) => EXIT_IO,
    }
}

/// Parses `args` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("qest: {e}");
            exit_code(&e)
        }
    }
}
