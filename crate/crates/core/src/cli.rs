//! Command-line front end.
//!
//! Every command reads a JSON network config and writes CSV (or JSON for
//! `equivalent`) to stdout or `--output`. Tiers are numbered from 1 on the
//! command line and in every output file.
//!
//! Exit codes: 0 on success, 1 for a domain error (invalid network, argument
//! outside a routine's domain), 2 for a usage error (bad flags, unreadable or
//! malformed config).

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::analytic::{self, Analysis, LoadModel};
use crate::model::{self, Network, Violation};
use crate::montecarlo::{self, Quantities, SimConfig, SimMode};

pub const THREADS_ENV: &str = "HETNET_RATE_THREADS";

/// Significant digits of every number written to CSV.
pub const CSV_DIGITS: usize = 12;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: io::Error,
    },
    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{}", format_invalid(.0))]
    Invalid(Vec<Violation>),
    #[error(transparent)]
    Domain(#[from] crate::Error),
    #[error("cannot write output: {0}")]
    Output(#[from] io::Error),
}

fn format_invalid(v: &[Violation]) -> String {
    let mut s = String::from("invalid network config:");
    for v in v {
        s.push_str("\n  ");
        s.push_str(&v.to_string());
    }
    s
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } | CliError::Parse { .. } => 2,
            CliError::Invalid(_) | CliError::Domain(_) | CliError::Output(_) => 1,
        }
    }
}

/// Reads and validates a network config.
pub fn load_config(path: &Path) -> Result<Network, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let n: Network = serde_json::from_str(&text).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    n.validate().map_err(CliError::Invalid)?;
    Ok(n)
}

/// `%g`-style formatting with `digits` significant digits.
pub fn format_g(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let p = digits.max(1);
    let sci = format!("{:.*e}", p - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent");
    if exp < -4 || exp >= p as i32 {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (p as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// A CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => format_g(*x, CSV_DIGITS),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

/// Writes a header and rows as CSV.
pub fn emit_csv<W: Write>(out: W, header: &[&str], rows: &[Vec<Cell>]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        w.write_record(row.iter().map(Cell::render)).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Output(io::Error::other(e))
}

#[derive(Debug, Parser)]
#[command(
    name = "hetnet-rate",
    version,
    about = "Rate distribution of K-tier cellular networks with shadowing-aware cell selection"
)]
pub struct Cli {
    /// Worker threads for sweeps and simulation (default: all cores).
    #[arg(long, global = true, env = THREADS_ENV)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Network config (JSON).
    #[arg(long, short)]
    pub config: PathBuf,
    /// Output file (default: stdout).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RateGrid {
    /// Smallest rate threshold, bits/s.
    #[arg(long, default_value_t = 1e4)]
    pub tmin: f64,
    /// Largest rate threshold, bits/s.
    #[arg(long, default_value_t = 1e7)]
    pub tmax: f64,
    /// Number of log-spaced thresholds.
    #[arg(long, default_value_t = 50)]
    pub points: usize,
    /// Explicit thresholds; overrides the grid.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub thresholds: Option<Vec<f64>>,
}

impl RateGrid {
    fn values(&self) -> Result<Vec<f64>, CliError> {
        if let Some(t) = &self.thresholds {
            return Ok(t.clone());
        }
        log_grid(self.tmin, self.tmax, self.points)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Estimator {
    Selection,
    Sir,
    Load,
    Rate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Physical,
    Equivalent,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rate coverage P(rate > T) over a threshold grid.
    Ratecov {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: RateGrid,
        /// Also evaluate the mean-load approximation.
        #[arg(long)]
        mean_load: bool,
    },
    /// Conditional SIR CCDF per serving tier.
    Sirccdf {
        #[command(flatten)]
        common: Common,
        /// Serving tier (1-based; default: all).
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        tier: Option<u32>,
        #[arg(long, default_value_t = -10.0, allow_hyphen_values = true)]
        tmin_db: f64,
        #[arg(long, default_value_t = 20.0, allow_hyphen_values = true)]
        tmax_db: f64,
        #[arg(long, default_value_t = 31)]
        points: usize,
    },
    /// Tagged-cell load PMF per tier.
    Loadpmf {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        tier: Option<u32>,
        /// Largest load listed (default: until the tail mass is negligible).
        #[arg(long)]
        max_load: Option<usize>,
    },
    /// Selection probability, effective density and mean load per tier.
    Selection {
        #[command(flatten)]
        common: Common,
    },
    /// Rate exceeded by a fraction 1 - p of users.
    Percentile {
        #[command(flatten)]
        common: Common,
        #[arg(long, short, default_value_t = 0.05)]
        p: f64,
        #[arg(long)]
        mean_load: bool,
    },
    /// Bias of one tier maximising the p-percentile rate.
    Optbias {
        #[command(flatten)]
        common: Common,
        /// Tier whose bias is searched (1-based).
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..), default_value_t = 2)]
        tier: u32,
        #[arg(long, short, default_value_t = 0.05)]
        p: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        bmin: f64,
        #[arg(long, default_value_t = 20.0, allow_hyphen_values = true)]
        bmax: f64,
        #[arg(long)]
        mean_load: bool,
        /// Also write the 1 dB sweep to this file.
        #[arg(long)]
        sweep_output: Option<PathBuf>,
    },
    /// Monte Carlo estimate of any analytic quantity.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        estimator: Estimator,
        #[arg(long, value_enum, default_value_t = ModeArg::Physical)]
        mode: ModeArg,
        #[arg(long, default_value_t = 10_000)]
        realizations: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Window radius in meters (default: sized for 200 stations per tier).
        #[arg(long)]
        window_radius: Option<f64>,
        #[arg(long, default_value_t = montecarlo::DEFAULT_MARGIN_QUANTILE)]
        margin_quantile: f64,
        /// SIR thresholds in dB for `--estimator sir`.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "-5,0,5,10")]
        sir_db: Vec<f64>,
        #[command(flatten)]
        grid: RateGrid,
    },
    /// Print the shadowing-free network with scaled powers.
    Equivalent {
        #[command(flatten)]
        common: Common,
    },
    /// Check a config and report every violation.
    Validate {
        #[arg(long, short)]
        config: PathBuf,
    },
}

/// Log-spaced grid of `points` values from `min` to `max`.
pub fn log_grid(min: f64, max: f64, points: usize) -> Result<Vec<f64>, CliError> {
    if !(min > 0.0 && max >= min && max.is_finite()) {
        return Err(CliError::Usage(format!(
            "log grid needs 0 < min <= max, got [{min}, {max}]"
        )));
    }
    let mut g: Vec<f64> = lin_grid(min.ln(), max.ln(), points)?
        .into_iter()
        .map(f64::exp)
        .collect();
    g[0] = min;
    let last = g.len() - 1;
    g[last] = max;
    Ok(g)
}

pub fn lin_grid(min: f64, max: f64, points: usize) -> Result<Vec<f64>, CliError> {
    if points == 0 || !(max >= min) || !min.is_finite() || !max.is_finite() {
        return Err(CliError::Usage(format!(
            "grid needs min <= max and at least one point, got [{min}, {max}] x {points}"
        )));
    }
    if points == 1 {
        return Ok(vec![min]);
    }
    let step = (max - min) / (points - 1) as f64;
    Ok((0..points)
        .map(|i| if i + 1 == points { max } else { min + i as f64 * step })
        .collect())
}

fn tier_index(n: &Network, tier: Option<u32>) -> Result<Vec<usize>, CliError> {
    match tier {
        None => Ok((0..n.num_tiers()).collect()),
        Some(t) if (t as usize) <= n.num_tiers() => Ok(vec![t as usize - 1]),
        Some(t) => Err(CliError::Usage(format!(
            "--tier {t} out of range for a {}-tier network",
            n.num_tiers()
        ))),
    }
}

fn open_output(path: &Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(fs::File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn load_model(mean: bool) -> LoadModel {
    if mean {
        LoadModel::Mean
    } else {
        LoadModel::Distribution
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.threads {
        Some(0) => return Err(CliError::Usage("--threads must be at least 1".into())),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| CliError::Usage(e.to_string()))?;
            pool.install(|| dispatch(cli.command))
        }
        None => dispatch(cli.command),
    }
}

fn dispatch(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Ratecov {
            common,
            grid,
            mean_load,
        } => {
            let n = load_config(&common.config)?;
            let a = Analysis::new(&n)?;
            let mut rows = Vec::new();
            for t in grid.values()? {
                let r = a.rate_coverage(t)?;
                let mean = if mean_load {
                    Cell::Num(a.rate_coverage_mean_load(t)?)
                } else {
                    Cell::Empty
                };
                let parts = r
                    .per_tier_contribution
                    .iter()
                    .map(|c| format_g(*c, CSV_DIGITS))
                    .collect::<Vec<_>>()
                    .join(";");
                rows.push(vec![
                    Cell::Num(t),
                    Cell::Num(r.coverage),
                    mean,
                    Cell::Text(parts),
                    Cell::Num(r.truncation_bound),
                ]);
            }
            emit_csv(
                open_output(&common.output)?,
                &[
                    "rate_bps",
                    "coverage",
                    "coverage_mean_load",
                    "tier_contributions",
                    "truncation_bound",
                ],
                &rows,
            )
        }
        Command::Sirccdf {
            common,
            tier,
            tmin_db,
            tmax_db,
            points,
        } => {
            let n = load_config(&common.config)?;
            let a = Analysis::new(&n)?;
            let grid = lin_grid(tmin_db, tmax_db, points)?;
            let mut rows = Vec::new();
            for k in tier_index(&n, tier)? {
                for &db in &grid {
                    let c = a.conditional_sir_ccdf(k, model::db_to_linear(db))?;
                    rows.push(vec![Cell::Int(k as u64 + 1), Cell::Num(db), Cell::Num(c)]);
                }
            }
            emit_csv(
                open_output(&common.output)?,
                &["tier", "threshold_db", "ccdf"],
                &rows,
            )
        }
        Command::Loadpmf {
            common,
            tier,
            max_load,
        } => {
            let n = load_config(&common.config)?;
            let a = Analysis::new(&n)?;
            let mut rows = Vec::new();
            for k in tier_index(&n, tier)? {
                let pmf = match max_load {
                    Some(0) => return Err(CliError::Usage("--max-load must be at least 1".into())),
                    Some(m) => a.load_pmf(k, m)?,
                    None => a.load_pmf_auto(k)?,
                };
                for (i, (p, c)) in pmf.probabilities.iter().zip(pmf.cdf()).enumerate() {
                    rows.push(vec![
                        Cell::Int(k as u64 + 1),
                        Cell::Int(i as u64 + 1),
                        Cell::Num(*p),
                        Cell::Num(c),
                    ]);
                }
            }
            emit_csv(
                open_output(&common.output)?,
                &["tier", "load", "pmf", "cdf"],
                &rows,
            )
        }
        Command::Selection { common } => {
            let n = load_config(&common.config)?;
            let a = Analysis::new(&n)?;
            let eff = n.effective_densities()?;
            let mut rows = Vec::new();
            for k in 0..n.num_tiers() {
                rows.push(vec![
                    Cell::Int(k as u64 + 1),
                    Cell::Num(a.selection_probability(k)?),
                    Cell::Num(eff[k]),
                    Cell::Num(a.mean_load(k)?),
                ]);
            }
            emit_csv(
                open_output(&common.output)?,
                &["tier", "selection_probability", "effective_density", "mean_load"],
                &rows,
            )
        }
        Command::Percentile {
            common,
            p,
            mean_load,
        } => {
            let n = load_config(&common.config)?;
            let a = Analysis::new(&n)?;
            let model = load_model(mean_load);
            let r = a.percentile_rate(p, model)?;
            emit_csv(
                open_output(&common.output)?,
                &["p", "rate_bps", "load_model"],
                &[vec![
                    Cell::Num(p),
                    Cell::Num(r),
                    Cell::Text(if mean_load { "mean" } else { "distribution" }.into()),
                ]],
            )
        }
        Command::Optbias {
            common,
            tier,
            p,
            bmin,
            bmax,
            mean_load,
            sweep_output,
        } => {
            let n = load_config(&common.config)?;
            let k = tier_index(&n, Some(tier))?[0];
            let model = load_model(mean_load);
            let best = analytic::optimal_bias_with(&n, k, p, (bmin, bmax), model)?;
            if let Some(path) = &sweep_output {
                let grid = lin_grid(bmin, bmax, ((bmax - bmin) / analytic::BIAS_GRID_STEP_DB).floor() as usize + 1)?;
                let rates = analytic::percentile_rate_sweep(&n, k, p, &grid, model)?;
                let rows: Vec<_> = grid
                    .iter()
                    .zip(&rates)
                    .map(|(b, r)| vec![Cell::Num(*b), Cell::Num(*r)])
                    .collect();
                emit_csv(
                    open_output(&Some(path.clone()))?,
                    &["bias_db", "percentile_rate"],
                    &rows,
                )?;
            }
            emit_csv(
                open_output(&common.output)?,
                &["bias_db", "percentile_rate", "endpoint_flag"],
                &[vec![
                    Cell::Num(best.bias_db),
                    Cell::Num(best.percentile_rate),
                    Cell::Int(best.at_endpoint as u64),
                ]],
            )
        }
        Command::Simulate {
            common,
            estimator,
            mode,
            realizations,
            seed,
            window_radius,
            margin_quantile,
            sir_db,
            grid,
        } => {
            let n = load_config(&common.config)?;
            let mut cfg = SimConfig::for_network(&n)?
                .with_realizations(realizations)
                .with_seed(seed)
                .with_mode(match mode {
                    ModeArg::Physical => SimMode::Physical,
                    ModeArg::Equivalent => SimMode::Equivalent,
                });
            if let Some(r) = window_radius {
                cfg.window_radius_m = r;
            }
            cfg.generation_margin_quantile = margin_quantile;
            cfg.sir_thresholds_db = sir_db;
            if estimator == Estimator::Rate {
                cfg.rate_thresholds_bps = grid.values()?;
            }
            for w in cfg.warnings(&n) {
                eprintln!("warning: {w}");
            }
            simulate(&n, &cfg, estimator, open_output(&common.output)?)
        }
        Command::Equivalent { common } => {
            let n = load_config(&common.config)?;
            let e = model::equivalent_network(&n)?;
            let mut out = open_output(&common.output)?;
            serde_json::to_writer_pretty(&mut out, &e).map_err(io::Error::from)?;
            writeln!(out)?;
            out.flush()?;
            Ok(())
        }
        Command::Validate { config } => {
            let n = load_config(&config)?;
            println!("ok: {} tiers", n.num_tiers());
            Ok(())
        }
    }
}

fn simulate<W: Write>(
    n: &Network,
    cfg: &SimConfig,
    estimator: Estimator,
    out: W,
) -> Result<(), CliError> {
    let what = match estimator {
        Estimator::Selection => Quantities::default(),
        Estimator::Sir => Quantities {
            sir: true,
            ..Default::default()
        },
        Estimator::Load => Quantities {
            load: true,
            ..Default::default()
        },
        Estimator::Rate => Quantities {
            rate: true,
            ..Default::default()
        },
    };
    let report = montecarlo::simulate(n, cfg, what)?;
    let d = report.diagnostics;
    if d.edge_events > 0 {
        eprintln!(
            "warning: serving station in the outer 10% of the window in {} of {} realizations",
            d.edge_events, report.realizations
        );
    }
    if d.empty_realizations > 0 {
        eprintln!(
            "warning: {} realizations without any station were skipped",
            d.empty_realizations
        );
    }

    let name = Cell::Text(
        match estimator {
            Estimator::Selection => "selection",
            Estimator::Sir => "sir",
            Estimator::Load => "load",
            Estimator::Rate => "rate",
        }
        .into(),
    );
    let est_row = |tier: Cell, x: Cell, e: &montecarlo::SimEstimate| {
        vec![
            name.clone(),
            tier,
            x,
            Cell::Num(e.value),
            Cell::Num(e.std_error),
            Cell::Int(e.realizations_used),
        ]
    };
    let mut rows = Vec::new();
    match estimator {
        Estimator::Selection => {
            for (k, e) in report.selection.iter().enumerate() {
                rows.push(est_row(Cell::Int(k as u64 + 1), Cell::Empty, e));
            }
        }
        Estimator::Sir => {
            for (k, per) in report.sir.iter().enumerate() {
                for (db, e) in cfg.sir_thresholds_db.iter().zip(per) {
                    rows.push(est_row(Cell::Int(k as u64 + 1), Cell::Num(*db), e));
                }
            }
        }
        Estimator::Load => {
            for (k, l) in report.load.iter().enumerate() {
                for (i, &c) in l.counts.iter().enumerate() {
                    let e = montecarlo::SimEstimate::from_counts(c, l.total);
                    rows.push(est_row(
                        Cell::Int(k as u64 + 1),
                        Cell::Int(i as u64 + 1),
                        &e,
                    ));
                }
            }
        }
        Estimator::Rate => {
            for (t, e) in cfg.rate_thresholds_bps.iter().zip(&report.rate) {
                rows.push(est_row(Cell::Empty, Cell::Num(*t), e));
            }
        }
    }
    emit_csv(
        out,
        &["estimator", "tier", "x", "value", "std_error", "samples"],
        &rows,
    )
}
