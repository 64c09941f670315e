//! `optstrat`: tables, curves, optimal strategies, estimation and
//! verification from the command line.

use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

use optstrat::data::{read_input, write_pairs, Input};
use optstrat::estimate::{estimate_model, momentum_indicator, reduce_indicators, EstimateOptions, MIN_RELIABLE_N};
use optstrat::figures::{self, CurveName, Grid, Precision, TableName};
use optstrat::mc::{simulate_dataset, McConfig};
use optstrat::verify::{self, Suite, VerifyOptions};
use optstrat::{Error, SecurityModel};

mod report;

const DEFAULT_SEED: u64 = 42;

#[derive(Parser)]
#[command(
    name = "optstrat",
    version,
    about = "Optimal notional functions for indicator-driven strategies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print one of the reference tables (fig3, fig7, table1).
    Tables {
        which: String,
        /// Return volatility for table1.
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        sigma: f64,
        /// Correlation for table1.
        #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
        rho: f64,
        #[command(flatten)]
        out: Output,
    },
    /// Sample a curve on a uniform grid (fig1, fig2, fig4 ... fig9).
    Curves {
        which: String,
        #[arg(long, allow_hyphen_values = true)]
        from: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        to: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
        #[command(flatten)]
        out: Output,
    },
    /// Report the optimal notional and its statistics for a model.
    Optimal {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum, default_value_t = Objective::Er)]
        objective: Objective,
        #[arg(long, value_parser = parse_precision, default_value = "paper")]
        precision: Precision,
    },
    /// Estimate the model from a pairs, multi-indicator or prices CSV.
    Estimate {
        input: PathBuf,
        /// Momentum lookback in periods (prices input only).
        #[arg(long)]
        lookback: Option<usize>,
        /// Also report the maximum-information-ratio notional.
        #[arg(long, value_enum, default_value_t = Objective::Er)]
        objective: Objective,
        #[arg(long, env = "OPTSTRAT_SEED", default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Bootstrap resamples for the standard errors.
        #[arg(long, default_value_t = 1000)]
        resamples: usize,
        /// Estimate even with fewer than 30 observations.
        #[arg(long)]
        force: bool,
        #[arg(long, value_parser = parse_precision, default_value = "paper")]
        precision: Precision,
    },
    /// Run the verification suites and print a JSON report.
    Verify {
        #[arg(default_value = "all", value_parser = parse_suite)]
        suite: Suite,
        /// Monte Carlo draws per check (accepts 1e7).
        #[arg(long, value_parser = parse_count, default_value = "1e7")]
        n: u64,
        #[arg(long, env = "OPTSTRAT_SEED", default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, value_parser = parse_precision, default_value = "full")]
        precision: Precision,
    },
    /// Write simulated `h,r` pairs from the model as CSV.
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_parser = parse_count)]
        n: u64,
        #[arg(long, env = "OPTSTRAT_SEED", default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        stream: u64,
        /// Output file; stdout when absent.
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Overwrite an existing output file.
        #[arg(long)]
        force: bool,
    },
}

#[derive(Args)]
struct Output {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long, value_parser = parse_precision, default_value = "paper")]
    precision: Precision,
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long, allow_hyphen_values = true)]
    mu: f64,
    #[arg(long, allow_hyphen_values = true)]
    sigma: f64,
    #[arg(long, allow_hyphen_values = true)]
    rho: f64,
    #[arg(long = "mu-h", default_value_t = 0.0, allow_hyphen_values = true)]
    mu_h: f64,
    #[arg(long = "sigma-h", default_value_t = 1.0, allow_hyphen_values = true)]
    sigma_h: f64,
}

impl ModelArgs {
    fn model(&self) -> Result<SecurityModel, Error> {
        SecurityModel::new(self.mu_h, self.sigma_h, self.mu, self.sigma, self.rho)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub(crate) enum Objective {
    Er,
    Ir,
}

fn parse_precision(s: &str) -> Result<Precision, String> {
    s.parse()
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse()
}

/// Non-negative integer, also written like `1e7`.
fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(n) = s.parse::<u64>() {
        return Ok(n);
    }
    let x: f64 = s.parse().map_err(|_| format!("`{s}` is not a count"))?;
    if x >= 0.0 && x.fract() == 0.0 && x < 2f64.powi(63) {
        Ok(x as u64)
    } else {
        Err(format!("`{s}` is not a non-negative integer"))
    }
}

/// Process exit codes.
mod exit {
    pub const INVALID_ARGS: u8 = 2;
    pub const DATA: u8 = 3;
    pub const VERIFY: u8 = 4;
    pub const NONCONVERGENCE: u8 = 5;
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NonFinite { .. }
            | Error::InvalidParameter { .. }
            | Error::InvalidGrid(_)
            | Error::NoKnowledge
            | Error::DegenerateCorrelation => exit::INVALID_ARGS,
            Error::QuadratureNonConvergence { .. } | Error::NonUnimodal { .. } => exit::NONCONVERGENCE,
            Error::Empty(_)
            | Error::ZeroVariance(_)
            | Error::TooFewObservations { .. }
            | Error::RankDeficient { .. }
            | Error::Data { .. }
            | Error::Io(_) => exit::DATA,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure {
        code: exit::INVALID_ARGS,
        message: message.into(),
    }
}

fn data_error(message: impl Into<String>) -> Failure {
    Failure {
        code: exit::DATA,
        message: message.into(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn emit(text: &str) -> Result<(), Failure> {
    let mut out = io::stdout().lock();
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| data_error(format!("writing output: {e}")))
}

fn emit_json(mut value: Value, precision: Precision) -> Result<(), Failure> {
    report::round_numbers(&mut value, precision);
    let text = serde_json::to_string_pretty(&value).expect("JSON values serialize");
    emit(&format!("{text}\n"))
}

fn emit_table(table: &figures::Table, out: &Output) -> Result<(), Failure> {
    match out.format {
        Format::Csv => emit(&table.to_csv(out.precision)),
        Format::Json => emit_json(table.to_json(out.precision), out.precision),
    }
}

fn run(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Tables { which, sigma, rho, out } => {
            let table = match which.parse::<TableName>().map_err(invalid)? {
                TableName::Fig3 => figures::fig3_table()?,
                TableName::Fig7 => figures::fig7_table()?,
                TableName::Table1 => figures::table1(sigma, rho)?,
            };
            emit_table(&table, &out)
        }
        Command::Curves {
            which,
            from,
            to,
            points,
            out,
        } => {
            let name: CurveName = which.parse().map_err(invalid)?;
            let d = name.default_grid();
            let grid = Grid {
                from: from.unwrap_or(d.from),
                to: to.unwrap_or(d.to),
                points: points.unwrap_or(d.points),
            };
            emit_table(&figures::curve(name, &grid)?, &out)
        }
        Command::Optimal {
            model,
            objective,
            precision,
        } => {
            let value = report::optimal(&model.model()?, objective)?;
            emit_json(value, precision)
        }
        Command::Estimate {
            input,
            lookback,
            objective,
            seed,
            resamples,
            force,
            precision,
        } => {
            let file = File::open(&input).map_err(|e| data_error(format!("{}: {e}", input.display())))?;
            let parsed = read_input(BufReader::new(file))?;
            let (kind, data, reduction) = match parsed {
                Input::Pairs(d) => {
                    if lookback.is_some() {
                        return Err(invalid("--lookback applies only to a date,price input"));
                    }
                    ("pairs", d, None)
                }
                Input::Multi(m) => {
                    let red = reduce_indicators(&m)?;
                    ("multi", red.dataset.clone(), Some(red))
                }
                Input::Prices(p) => {
                    let lookback = lookback.ok_or_else(|| invalid("a date,price input needs --lookback"))?;
                    ("prices", momentum_indicator(&p, lookback)?, None)
                }
            };
            if data.len() < MIN_RELIABLE_N && !force {
                return Err(data_error(format!(
                    "only {} observation(s); at least {MIN_RELIABLE_N} are needed (use --force to estimate anyway)",
                    data.len()
                )));
            }
            let est = estimate_model(&data, &EstimateOptions { resamples, seed })?;
            let value = report::estimate(kind, &data, &est, reduction.as_ref(), objective)?;
            emit_json(value, precision)
        }
        Command::Verify {
            suite,
            n,
            seed,
            precision,
        } => {
            if n == 0 {
                return Err(invalid("--n must be at least 1"));
            }
            let rep = verify::run(suite, &VerifyOptions { n, seed })?;
            let value = serde_json::to_value(&rep).expect("report serializes");
            emit_json(value, precision)?;
            if rep.ok {
                Ok(())
            } else {
                let names: Vec<&str> = rep.failures().map(|c| c.name.as_str()).collect();
                Err(Failure {
                    code: exit::VERIFY,
                    message: format!("{} check(s) failed: {}", names.len(), names.join(", ")),
                })
            }
        }
        Command::Simulate {
            model,
            n,
            seed,
            stream,
            output,
            force,
        } => {
            let cfg = McConfig::new(seed, stream, n)?;
            let data = simulate_dataset(&model.model()?, &cfg)?;
            match output {
                Some(path) => {
                    if path.exists() && !force {
                        return Err(invalid(format!("{} exists (use --force to overwrite)", path.display())));
                    }
                    let file = File::create(&path).map_err(|e| data_error(format!("{}: {e}", path.display())))?;
                    write_pairs(io::BufWriter::new(file), &data)?;
                    Ok(())
                }
                None => write_pairs(io::stdout().lock(), &data).map_err(Failure::from),
            }
        }
    }
}
