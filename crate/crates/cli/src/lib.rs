//! Command-line front end: simulation, studies, closed forms and estimation.
//!
//! Exit codes: 0 on success, 1 on a usage error, 2 on a runtime error.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use stopped_clock::clock::{simulate, BaseProcess};
use stopped_clock::estimators::{
    empirical_tdc, estimate_change_probs, estimate_kappa, estimate_run_pattern_prob,
    estimate_theta_x_from_y, extremal_index_intervals, extremal_index_runs, Equality,
    EstimateSummary,
};
use stopped_clock::harness::io::{read_series_csv, to_json, write_series_csv, write_study_csv};
use stopped_clock::harness::{
    run_table1_study, run_tdc_validation, run_theta_validation, ModelConfig, Workers, THREADS_ENV,
};
use stopped_clock::processes::{ArmaxParams, SeedStream, WindowRuleParams};
use stopped_clock::theory::{theory_report, TheoryInputs};
use stopped_clock::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "stopped-clock",
    version,
    about = "Stopped clock failures model toolkit"
)]
struct Cli {
    /// Master seed; every random draw derives from it.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,

    /// Worker threads (falls back to STOPPED_CLOCK_THREADS, then all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output file (default: stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one path and write it as `t,x,u,y` CSV.
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        /// Number of observations.
        #[arg(long)]
        n: usize,
    },
    /// Replicated Monte Carlo studies.
    Study {
        #[command(subcommand)]
        kind: StudyKind,
    },
    /// Closed-form extremal index and tail dependence coefficients as JSON.
    Theory {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 4)]
        max_lag: usize,
    },
    /// Run one estimator on a series CSV and print a JSON summary.
    Estimate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        estimator: EstimatorKind,
        /// Quantile level of the threshold.
        #[arg(long, default_value_t = 0.995)]
        q: f64,
        /// Pattern length for `run-pattern` and `theta-x`.
        #[arg(long, default_value_t = 1)]
        s: usize,
        #[arg(long, default_value_t = 1)]
        lag: usize,
        /// Run length for `runs` (default: estimated kappa).
        #[arg(long)]
        r: Option<usize>,
        /// Absolute tolerance for treating consecutive values as a repeat.
        #[arg(long)]
        tolerance: Option<f64>,
    },
}

#[derive(Debug, Subcommand)]
enum StudyKind {
    /// Bias and RMSE of the pattern and kappa estimators (CSV).
    Table1 {
        #[arg(long, default_value_t = 1000)]
        replicas: usize,
        #[arg(long, value_delimiter = ',', default_values_t = [100usize, 1000, 5000])]
        sizes: Vec<usize>,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Extremal index estimates against the closed forms (JSON).
    Theta {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 1_000_000)]
        m: usize,
        #[arg(long, value_delimiter = ',', default_values_t = [0.99, 0.995])]
        q_grid: Vec<f64>,
    },
    /// Lag-m tail dependence estimates against the closed form (JSON).
    Tdc {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 1_000_000)]
        m: usize,
        #[arg(long, value_delimiter = ',', default_values_t = [1usize, 2, 3, 4])]
        lags: Vec<usize>,
        #[arg(long, default_value_t = 0.998)]
        q: f64,
    },
}

#[derive(Debug, Clone, Copy, Args)]
struct ModelArgs {
    /// ARMAX coefficient; omit for an i.i.d. Fréchet base.
    #[arg(long)]
    armax_phi: Option<f64>,
    #[arg(long, default_value_t = 3)]
    kappa: usize,
    /// Event probability of the window rule (default 1 - e^{-1/2}).
    #[arg(long)]
    p: Option<f64>,
}

impl ModelArgs {
    fn base(&self) -> Result<BaseProcess, Error> {
        Ok(match self.armax_phi {
            Some(phi) => BaseProcess::Armax(ArmaxParams::new(phi)?),
            None => BaseProcess::IidFrechet,
        })
    }

    fn rule(&self) -> Result<WindowRuleParams, Error> {
        let p = self
            .p
            .unwrap_or_else(|| WindowRuleParams::table1_default().p());
        WindowRuleParams::new(p, self.kappa)
    }

    fn config(&self, length: usize, seed: u64, replicas: usize) -> Result<ModelConfig, Error> {
        Ok(ModelConfig {
            base: self.base()?,
            indicator: self.rule()?,
            length,
            seed,
            replicas,
        })
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EstimatorKind {
    ChangeProbs,
    RunPattern,
    Kappa,
    Runs,
    Intervals,
    Tdc,
    ThetaX,
}

fn resolve_threads(flag: Option<usize>) -> Result<Option<usize>, Error> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var(THREADS_ENV) {
        Ok(text) => {
            text.trim().parse().map(Some).map_err(|_| {
                Error::InvalidParameter(format!("{THREADS_ENV}={text:?} is not a count"))
            })
        }
        Err(_) => Ok(None),
    }
}

fn emit(out: Option<&Path>, stdout: &mut dyn Write, body: &[u8]) -> Result<(), Error> {
    match out {
        Some(path) => {
            let mut file = BufWriter::new(File::create(path)?);
            file.write_all(body)?;
            file.flush()?;
        }
        None => stdout.write_all(body)?,
    }
    Ok(())
}

fn estimate(
    path: &Path,
    kind: EstimatorKind,
    q: f64,
    s: usize,
    lag: usize,
    r: Option<usize>,
    tolerance: Option<f64>,
) -> Result<EstimateSummary, Error> {
    let data = read_series_csv(File::open(path)?)?;
    let y = data.y();
    let eq = tolerance.map_or(Equality::Exact, Equality::Tolerance);
    let m = y.len();
    let plain = |name: &str, value: f64| EstimateSummary {
        estimator: name.to_owned(),
        value,
        m,
        q: None,
        auxiliary: Default::default(),
    };
    Ok(match kind {
        EstimatorKind::ChangeProbs => {
            let cp = estimate_change_probs(y, eq)?;
            let mut summary = plain("change_probs", cp.p0);
            summary.auxiliary.insert("p0".into(), cp.p0);
            summary.auxiliary.insert("p1".into(), cp.p1);
            summary
        }
        EstimatorKind::RunPattern => {
            let mut summary = plain("run_pattern", estimate_run_pattern_prob(y, s, eq)?);
            summary.auxiliary.insert("s".into(), s as f64);
            summary
        }
        EstimatorKind::Kappa => plain("kappa", estimate_kappa(y, eq)? as f64),
        EstimatorKind::Runs => {
            let r = match r {
                Some(r) => r,
                None => estimate_kappa(y, eq)?,
            };
            extremal_index_runs(y, q, r)?
        }
        EstimatorKind::Intervals => extremal_index_intervals(y, q)?,
        EstimatorKind::Tdc => empirical_tdc(y, lag, q)?,
        EstimatorKind::ThetaX => estimate_theta_x_from_y(y, s, q, eq)?,
    })
}

fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<(), Error> {
    let out = cli.out.as_deref();
    match cli.command {
        Command::Simulate { model, n } => {
            let path = simulate(
                model.base()?,
                model.rule()?,
                n,
                &SeedStream::new(cli.seed),
                0,
            )?;
            let mut buf = Vec::new();
            write_series_csv(&path, &mut buf)?;
            emit(out, stdout, &buf)
        }
        Command::Study { kind } => match kind {
            StudyKind::Table1 {
                replicas,
                sizes,
                model,
            } => {
                let workers = Workers::new(resolve_threads(cli.threads)?)?;
                let config =
                    model.config(sizes.iter().copied().max().unwrap_or(0), cli.seed, replicas)?;
                let report = run_table1_study(&config, &sizes, &workers)?;
                let mut buf = Vec::new();
                write_study_csv(&report, &mut buf)?;
                emit(out, stdout, &buf)
            }
            StudyKind::Theta { model, m, q_grid } => {
                let base = model.base()?;
                let base = match base {
                    BaseProcess::IidFrechet => BaseProcess::Armax(ArmaxParams::new(0.0)?),
                    armax => armax,
                };
                let config = ModelConfig {
                    base,
                    ..model.config(m, cli.seed, 1)?
                };
                let report = run_theta_validation(&config, &q_grid)?;
                emit(out, stdout, to_json(&report)?.as_bytes())
            }
            StudyKind::Tdc { model, m, lags, q } => {
                let report = run_tdc_validation(&model.config(m, cli.seed, 1)?, &lags, q)?;
                emit(out, stdout, to_json(&report)?.as_bytes())
            }
        },
        Command::Theory { model, max_lag } => {
            let phi = model.armax_phi.unwrap_or(0.0);
            let inputs = TheoryInputs::armax(phi, model.rule()?, max_lag)?;
            let report = theory_report(&inputs, max_lag)?;
            emit(out, stdout, to_json(&report)?.as_bytes())
        }
        Command::Estimate {
            input,
            estimator,
            q,
            s,
            lag,
            r,
            tolerance,
        } => {
            let summary = estimate(&input, estimator, q, s, lag, r, tolerance)?;
            emit(out, stdout, to_json(&summary)?.as_bytes())
        }
    }
}

/// Parses `argv` (including the program name) and runs the command.
pub fn cli_main<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            let _ = write!(stderr, "{err}");
            return if err.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_OK
            };
        }
    };
    match execute(cli, stdout) {
        Ok(()) => EXIT_OK,
        Err(err) => {
            let _ = writeln!(stderr, "error: {err}");
            EXIT_RUNTIME
        }
    }
}

/// Entry point used by the binary.
pub fn run_from_env() -> i32 {
    let stdout = io::stdout();
    let mut lock = stdout.lock();
    cli_main(std::env::args_os(), &mut lock, &mut io::stderr())
}
