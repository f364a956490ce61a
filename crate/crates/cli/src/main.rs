use std::fmt;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cra_core::analysis::{FadingModel, PfaVariant};
use cra_core::harness::{
    alpha_grid, bounds_rows, log_grid, sweep_alpha, sweep_roc, throughput_rows, trial_history, validate,
    write_bounds_csv, write_history_csv, write_link_csv, write_roc_csv, write_throughput_csv, BoundsGrid, Faults,
};
use cra_core::{Error, Profile, Scenario, Solver, SystemConfig};

/// Compressive random access simulator.
#[derive(Parser, Debug)]
#[command(name = "cra", version, about)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// `key = value` file applied on top of the profile.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output CSV path; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value = "desk")]
    profile: Profile,
    #[arg(long, global = true, default_value = "cosamp")]
    solver: Solver,
    #[arg(long, global = true)]
    trials: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 0 picks one per core.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// SER and detection rates over a pilot power grid.
    LinkSim {
        /// Comma-separated pilot fractions; default 0.01, 0.11, ..., 0.91, 1.
        #[arg(long, value_delimiter = ',')]
        alphas: Option<Vec<f64>>,
        /// Write the solver iterate log of `--dump-trial` to this path.
        #[arg(long)]
        dump: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        dump_trial: u64,
    },
    /// Missed-detection and false-alarm rates over a threshold grid.
    Roc {
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, default_value_t = 1e-3)]
        xi_min: f64,
        #[arg(long, default_value_t = 10.0)]
        xi_max: f64,
        #[arg(long, default_value_t = 41)]
        xi_points: usize,
    },
    /// Detection and rate bounds.
    Bounds {
        /// Restricted isometry constant of order 2k.
        #[arg(long, default_value_t = 0.2)]
        delta: f64,
        #[arg(long, value_delimiter = ',')]
        alphas: Option<Vec<f64>>,
        /// Comma-separated energy thresholds; default is the profile threshold.
        #[arg(long, value_delimiter = ',')]
        xis: Option<Vec<f64>>,
        #[arg(long, value_enum, default_value_t = Variant::DerivationConsistent)]
        pfa_variant: Variant,
    },
    /// Slotted-ALOHA throughput over an offered-load grid.
    Throughput {
        /// Largest load as a multiple of the slot count.
        #[arg(long, default_value_t = 3.0)]
        lambda_max: f64,
        #[arg(long, default_value_t = 60)]
        lambda_points: usize,
        #[arg(long, default_value_t = 1.0)]
        pr_rate: f64,
        #[arg(long, default_value_t = 1.0)]
        rate: f64,
    },
    /// Oracle-equivalence checks; exit code 2 on any failure.
    Validate {
        /// Fault injection: negate the adjoint.
        #[arg(long, hide = true)]
        flip_adjoint_sign: bool,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Variant {
    AsPrinted,
    DerivationConsistent,
}

impl From<Variant> for PfaVariant {
    fn from(v: Variant) -> Self {
        match v {
            Variant::AsPrinted => PfaVariant::AsPrinted,
            Variant::DerivationConsistent => PfaVariant::DerivationConsistent,
        }
    }
}

enum Failure {
    Config(String),
    Validation(usize),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Validation(_) => 2,
            Failure::Io(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(msg) => write!(f, "config error: {msg}"),
            Failure::Validation(n) => write!(f, "{n} validation check(s) failed"),
            Failure::Io(msg) => write!(f, "i/o error: {msg}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(e) => Failure::Io(e.to_string()),
            other => Failure::Config(other.to_string()),
        }
    }
}

fn load_config(common: &Common) -> Result<SystemConfig, Failure> {
    let mut cfg = SystemConfig::profile(common.profile);
    if let Some(path) = &common.config {
        let text = fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
        cfg.apply_kv(&text)?;
    }
    if let Some(t) = common.trials {
        cfg.trials = t;
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Renders into memory first so a failed run leaves no partial file.
fn emit(path: Option<&PathBuf>, render: impl FnOnce(&mut Vec<u8>) -> cra_core::Result<()>) -> Result<(), Failure> {
    let mut buf = Vec::new();
    render(&mut buf)?;
    let written = match path {
        Some(p) => File::create(p)
            .and_then(|f| {
                let mut w = BufWriter::new(f);
                w.write_all(&buf)?;
                w.flush()
            })
            .map_err(|e| format!("{}: {e}", p.display())),
        None => io::stdout().write_all(&buf).map_err(|e| e.to_string()),
    };
    written.map_err(Failure::Io)
}

fn run(cli: Cli) -> Result<(), Failure> {
    let common = &cli.common;
    let out = common.out.as_ref();
    match cli.command {
        Command::LinkSim {
            alphas,
            dump,
            dump_trial,
        } => {
            let cfg = load_config(common)?;
            if let Some(path) = &dump {
                let log = trial_history(&Scenario::new(&cfg)?, dump_trial, common.solver)?;
                emit(Some(path), |w| write_history_csv(dump_trial, &log, w))?;
            }
            let grid = alphas.unwrap_or_else(alpha_grid);
            let points = sweep_alpha(&cfg, &grid, common.solver, common.threads)?;
            emit(out, |w| write_link_csv(&points, w))
        }
        Command::Roc {
            alpha,
            xi_min,
            xi_max,
            xi_points,
        } => {
            let mut cfg = load_config(common)?;
            if let Some(a) = alpha {
                cfg.alpha = a;
                cfg.validate()?;
            }
            if !(xi_min > 0.0 && xi_max > xi_min) || xi_points == 0 {
                return Err(Failure::Config("need 0 < xi-min < xi-max and xi-points >= 1".into()));
            }
            let roc = sweep_roc(
                &cfg,
                &log_grid(xi_min, xi_max, xi_points),
                common.solver,
                common.threads,
            )?;
            emit(out, |w| write_roc_csv(&roc, w))
        }
        Command::Bounds {
            delta,
            alphas,
            xis,
            pfa_variant,
        } => {
            let cfg = load_config(common)?;
            let grid = BoundsGrid {
                alphas: alphas.unwrap_or_else(|| vec![cfg.alpha]),
                delta_2k: delta,
                xis: xis.unwrap_or_else(|| vec![cfg.xi_thr]),
                pfa_variant: pfa_variant.into(),
            };
            let rows = bounds_rows(&cfg, &grid, &FadingModel::for_config(&cfg))?;
            emit(out, |w| write_bounds_csv(&rows, w))
        }
        Command::Throughput {
            lambda_max,
            lambda_points,
            pr_rate,
            rate,
        } => {
            let cfg = load_config(common)?;
            if lambda_max.is_nan() || lambda_max <= 0.0 || lambda_points == 0 {
                return Err(Failure::Config("need lambda-max > 0 and lambda-points >= 1".into()));
            }
            let top = lambda_max * cfg.b_slots as f64;
            let lambdas: Vec<f64> = (1..=lambda_points)
                .map(|i| top * i as f64 / lambda_points as f64)
                .collect();
            let rows = throughput_rows(&cfg, &lambdas, pr_rate, rate)?;
            emit(out, |w| write_throughput_csv(&rows, w))
        }
        Command::Validate { flip_adjoint_sign } => {
            let report = validate(Faults { flip_adjoint_sign })?;
            emit(out, |w| {
                for c in &report.checks {
                    writeln!(w, "{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail)?;
                }
                Ok(())
            })?;
            let failed = report.checks.iter().filter(|c| !c.passed).count();
            if failed > 0 {
                return Err(Failure::Validation(failed));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("cra: {f}");
            ExitCode::from(f.code())
        }
    }
}
