//! The `reopt` command line: pricing, price ranges, parameter sweeps,
//! continuous-limit convergence, benchmarks and a randomized self-test.
//!
//! Exit codes: 0 ok, 1 test failure, 2 usage, 3 size guard.
//! CSV has a header row and LF endings with 12 significant digits; JSON is a
//! single object `{"config": …, "results": …}` with shortest round-trip
//! floats.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bench::run_bench;
use crate::continuum::{convergence_study, DiffusionParams, McConfig};
use crate::error::Error;
use crate::expiry::{discretize, ContinuousExpiry, DiscretizeMode, ExpiryLaw};
use crate::model::{make_factors, FactorStyle, MarketParams, MoveFactors};
use crate::payoff::Payoff;
use crate::pricer::{self, price_path_enumeration, price_range, Algorithm, PriceResult};

pub const EXIT_OK: i32 = 0;
pub const EXIT_TEST_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_GUARD: i32 = 3;

/// Cross-algorithm tolerance for `price --algo all`.
pub const PRICE_DISCREPANCY_TOL: f64 = 1e-8;
/// Cross-algorithm tolerance of the self-test.
pub const SELFTEST_TOL: f64 = 1e-9;
/// Tolerance against the path-enumeration oracle.
pub const ORACLE_TOL: f64 = 1e-12;

#[derive(Debug, Parser)]
#[command(
    name = "reopt",
    version,
    about = "Random-expiry option pricing on trinomial trees"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Price one option with one or all algorithms.
    Price(PriceArgs),
    /// Fixed-expiry price per horizon and the resulting no-arbitrage hull.
    Range(RangeArgs),
    /// Prices of the four test payoffs over a parameter grid.
    Sweep(SweepArgs),
    /// Lattice prices against a Monte-Carlo estimate of the continuous limit.
    Converge(ConvergeArgs),
    /// Runtime of the three lattice algorithms.
    Bench(BenchArgs),
    /// Randomized cross-algorithm consistency check.
    Selftest(SelftestArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PayoffKind {
    Call,
    Put,
    Zsc,
    Logcontract,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlgoChoice {
    Tri,
    Recursive,
    Reco,
    Sum,
    Enum,
    All,
}

impl AlgoChoice {
    fn algorithms(self) -> Vec<Algorithm> {
        match self {
            AlgoChoice::Tri => vec![Algorithm::Trinomial],
            AlgoChoice::Recursive => vec![Algorithm::RecursiveBinomial],
            AlgoChoice::Reco => vec![Algorithm::Recombining],
            AlgoChoice::Sum => vec![Algorithm::ConditioningSum],
            AlgoChoice::Enum => vec![Algorithm::PathEnumeration],
            AlgoChoice::All => Algorithm::HOMOGENEOUS.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StyleArg {
    Exponential,
    Linear,
}

impl From<StyleArg> for FactorStyle {
    fn from(s: StyleArg) -> Self {
        match s {
            StyleArg::Exponential => FactorStyle::Exponential,
            StyleArg::Linear => FactorStyle::Linear,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct MarketArgs {
    /// Tree periods N.
    #[arg(long, default_value_t = 20)]
    pub steps: usize,
    /// Maturity T in years.
    #[arg(long, default_value_t = 1.0)]
    pub maturity: f64,
    /// Spot S0.
    #[arg(long, default_value_t = 100.0)]
    pub spot: f64,
    /// Volatility sigma.
    #[arg(long, default_value_t = 0.30)]
    pub sigma: f64,
    /// Continuous risk-free rate r.
    #[arg(long, default_value_t = 0.10)]
    pub rate: f64,
    /// Continuous dividend yield y.
    #[arg(long, default_value_t = 0.05)]
    pub div: f64,
    #[arg(long, value_enum, default_value_t = StyleArg::Exponential)]
    pub style: StyleArg,
}

impl MarketArgs {
    fn params(&self) -> MarketParams {
        MarketParams {
            spot: self.spot,
            rate: self.rate,
            div_yield: self.div,
            sigma: self.sigma,
            maturity: self.maturity,
            steps: self.steps,
        }
    }
}

#[derive(Debug, Clone, Args)]
#[group(multiple = false)]
pub struct ExpiryArgs {
    /// Expiry intensity: middle probability λ·dt in every period [default: 0.10].
    #[arg(long)]
    pub lambda: Option<f64>,
    /// JSON file {"pmf": [...]} with N+1 probabilities.
    #[arg(long)]
    pub pmf_file: Option<PathBuf>,
    /// Exponential expiry with rate λ and an atom at T, floored to the grid.
    #[arg(long)]
    pub exp_atom: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct PayoffArgs {
    #[arg(long, value_enum, default_value_t = PayoffKind::Call)]
    pub payoff: PayoffKind,
    /// Strike of call/put, reference level of the log contract.
    #[arg(long, default_value_t = 100.0)]
    pub strike: f64,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub output: OutputFormat,
    /// Seed for randomized commands.
    #[arg(long, env = "REOPT_SEED", default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct PriceArgs {
    #[command(flatten)]
    pub market: MarketArgs,
    #[command(flatten)]
    pub expiry: ExpiryArgs,
    #[command(flatten)]
    pub payoff: PayoffArgs,
    #[arg(long, value_enum, default_value_t = AlgoChoice::All)]
    pub algo: AlgoChoice,
    #[command(flatten)]
    pub out: OutputArgs,
    /// Include wall-clock times (makes output non-reproducible).
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Clone, Args)]
pub struct RangeArgs {
    #[command(flatten)]
    pub market: MarketArgs,
    #[command(flatten)]
    pub payoff: PayoffArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParam {
    Steps,
    Spot,
    Lambda,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub param: SweepParam,
    #[arg(long)]
    pub from: f64,
    #[arg(long)]
    pub to: f64,
    /// Grid size; defaults to every integer for `steps`, 21 otherwise.
    #[arg(long)]
    pub points: Option<usize>,
    #[command(flatten)]
    pub market: MarketArgs,
    /// Expiry intensity λ (middle probability λ·dt).
    #[arg(long, default_value_t = 0.10)]
    pub lambda: f64,
    /// Strike / reference level of the four payoffs.
    #[arg(long, default_value_t = 100.0)]
    pub strike: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ConvergeArgs {
    #[command(flatten)]
    pub market: MarketArgs,
    /// Rate of the exponential-with-atom expiry.
    #[arg(long, default_value_t = 0.10)]
    pub lambda: f64,
    #[arg(long, value_enum, default_value_t = PayoffKind::Put)]
    pub payoff: PayoffKind,
    #[arg(long, default_value_t = 100.0)]
    pub strike: f64,
    /// Periods per unit time, ascending.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "16,32,64,128,256,512,1024"
    )]
    pub steps_list: Vec<usize>,
    #[arg(long, default_value_t = 1_000_000)]
    pub paths: u64,
    #[arg(long)]
    pub antithetic: bool,
    /// Allow unbounded payoffs in the Monte-Carlo estimate.
    #[arg(long)]
    pub force: bool,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 1)]
    pub n_from: usize,
    #[arg(long, default_value_t = 10)]
    pub n_to: usize,
    #[arg(long, default_value_t = 10)]
    pub reps: usize,
    #[command(flatten)]
    pub market: MarketArgs,
    #[arg(long, default_value_t = 0.10)]
    pub lambda: f64,
    #[command(flatten)]
    pub payoff: PayoffArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SelftestArgs {
    #[arg(long, default_value_t = 1000)]
    pub cases: usize,
    #[command(flatten)]
    pub out: OutputArgs,
}

/// How the expiry law of a priced contract was specified.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpirySpec {
    Lambda(f64),
    Pmf(Vec<f64>),
    ExpAtom(f64),
}

impl ExpirySpec {
    pub fn law(&self, params: &MarketParams) -> Result<ExpiryLaw, CliError> {
        match self {
            ExpirySpec::Lambda(lambda) => intensity_law(*lambda, params),
            ExpirySpec::Pmf(pmf) => {
                let law = ExpiryLaw::new(pmf.clone())?;
                if law.steps() != params.steps {
                    return Err(CliError::Usage(format!(
                        "pmf has {} entries, expected N + 1 = {}",
                        law.pmf().len(),
                        params.steps + 1
                    )));
                }
                Ok(law)
            }
            ExpirySpec::ExpAtom(lambda) => {
                let per_year = params.steps as f64 / params.maturity;
                let n = per_year.round();
                if (per_year - n).abs() > 1e-9 {
                    return Err(CliError::Usage(format!(
                        "--exp-atom needs N / T to be an integer, got {per_year}"
                    )));
                }
                let cont = ContinuousExpiry::ExponentialWithAtom {
                    lambda: *lambda,
                    horizon: params.maturity,
                };
                Ok(discretize(&cont, n as usize, DiscretizeMode::Floor)?)
            }
        }
    }
}

fn intensity_law(lambda: f64, params: &MarketParams) -> Result<ExpiryLaw, CliError> {
    let q = lambda * params.dt();
    if lambda.is_nan() || lambda < 0.0 || q >= 1.0 {
        return Err(CliError::Usage(format!(
            "λ·Δt must be < 1 (and λ >= 0), got λ = {lambda}, λ·Δt = {q}"
        )));
    }
    Ok(ExpiryLaw::from_intensity(
        lambda,
        params.dt(),
        params.steps,
    )?)
}

/// Fully resolved pricing request; what `price` echoes as `config`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub market: MarketParams,
    pub style: FactorStyle,
    pub expiry: ExpirySpec,
    pub payoff: PayoffKind,
    pub strike: f64,
    pub algo: AlgoChoice,
    pub output: OutputFormat,
    pub seed: u64,
}

/// An algorithm left out of `--algo all` because `N` exceeds its guard.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Skipped {
    pub algo: Algorithm,
    pub max_steps: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PriceReport {
    pub config: RunConfig,
    pub results: Vec<PriceResult>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub skipped: Vec<Skipped>,
    pub max_discrepancy: Option<f64>,
}

impl RunConfig {
    /// Price as configured; also the path used to re-price a parsed report.
    pub fn price(&self) -> Result<PriceReport, CliError> {
        let params = self.market;
        params.validate()?;
        let law = self.expiry.law(&params)?;
        let factors = make_factors(&params, self.style)?;
        let payoff = build_payoff(self.payoff, self.strike)?;
        let mut results = Vec::new();
        let mut skipped = Vec::new();
        for algo in self.algo.algorithms() {
            match algo.max_steps() {
                Some(max) if self.algo == AlgoChoice::All && params.steps > max => {
                    skipped.push(Skipped {
                        algo,
                        max_steps: max,
                    })
                }
                _ => results.push(pricer::price(algo, &params, &factors, &law, &payoff)?),
            }
        }
        let max_discrepancy = (results.len() > 1).then(|| max_pairwise(&results));
        Ok(PriceReport {
            config: self.clone(),
            results,
            skipped,
            max_discrepancy,
        })
    }
}

fn max_pairwise(results: &[PriceResult]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, a) in results.iter().enumerate() {
        for b in &results[i + 1..] {
            worst = worst.max((a.value - b.value).abs());
        }
    }
    worst
}

pub fn build_payoff(kind: PayoffKind, level: f64) -> Result<Payoff, Error> {
    match kind {
        PayoffKind::Call => Payoff::call(level),
        PayoffKind::Put => Payoff::put(level),
        PayoffKind::Zsc => Ok(Payoff::ZeroStrikeCall),
        PayoffKind::Logcontract => Payoff::log_contract(level),
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Pricing(#[from] Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Pricing(Error::TooLarge { .. }) => EXIT_GUARD,
            CliError::Io(_) => EXIT_TEST_FAILURE,
            _ => EXIT_USAGE,
        }
    }
}

/// Format with 12 significant digits, trailing zeros trimmed.
pub fn sig12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..15).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{x:.11e}")
    }
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<i32, CliError> {
    match command {
        Command::Price(a) => cmd_price(&a, out),
        Command::Range(a) => cmd_range(&a, out),
        Command::Sweep(a) => cmd_sweep(&a, out),
        Command::Converge(a) => cmd_converge(&a, out),
        Command::Bench(a) => cmd_bench(&a, out),
        Command::Selftest(a) => cmd_selftest(&a, out),
    }
}

pub fn price_config(args: &PriceArgs) -> Result<RunConfig, CliError> {
    let market = args.market.params();
    let expiry = match (
        &args.expiry.lambda,
        &args.expiry.pmf_file,
        &args.expiry.exp_atom,
    ) {
        (Some(l), None, None) => ExpirySpec::Lambda(*l),
        (None, Some(path), None) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            let law: ExpiryLaw = serde_json::from_str(&text)
                .map_err(|e| CliError::Usage(format!("bad pmf file {}: {e}", path.display())))?;
            ExpirySpec::Pmf(law.pmf().to_vec())
        }
        (None, None, Some(l)) => ExpirySpec::ExpAtom(*l),
        _ => ExpirySpec::Lambda(0.10),
    };
    Ok(RunConfig {
        command: "price".into(),
        market,
        style: args.market.style.into(),
        expiry,
        payoff: args.payoff.payoff,
        strike: args.payoff.strike,
        algo: args.algo,
        output: args.out.output,
        seed: args.out.seed,
    })
}

pub fn cmd_price(args: &PriceArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let cfg = price_config(args)?;
    let mut report = cfg.price()?;
    if !args.timings {
        for r in &mut report.results {
            r.wall_time_ns = 0;
        }
    }
    match cfg.output {
        OutputFormat::Json => {
            serde_json::to_writer(&mut *out, &report).map_err(std::io::Error::other)?;
            writeln!(out)?;
        }
        OutputFormat::Csv => {
            write!(out, "algo,value,nodes_touched,status")?;
            if args.timings {
                write!(out, ",wall_time_ns")?;
            }
            writeln!(out)?;
            for r in &report.results {
                write!(out, "{},{},{},ok", r.algo, sig12(r.value), r.nodes_touched)?;
                if args.timings {
                    write!(out, ",{}", r.wall_time_ns)?;
                }
                writeln!(out)?;
            }
            for s in &report.skipped {
                writeln!(out, "{},,,skipped (guard N <= {})", s.algo, s.max_steps)?;
            }
            if let Some(d) = report.max_discrepancy {
                writeln!(out, "max_discrepancy,{},,", sig12(d))?;
            }
        }
    }
    match report.max_discrepancy {
        Some(d) if d > PRICE_DISCREPANCY_TOL => Ok(EXIT_TEST_FAILURE),
        _ => Ok(EXIT_OK),
    }
}

pub fn cmd_range(args: &RangeArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let params = args.market.params();
    let factors = make_factors(&params, args.market.style.into())?;
    let payoff = build_payoff(args.payoff.payoff, args.payoff.strike)?;
    let range = price_range(&params, &factors, &payoff)?;
    match args.out.output {
        OutputFormat::Json => {
            let doc = serde_json::json!({
                "config": {
                    "command": "range",
                    "market": params,
                    "style": FactorStyle::from(args.market.style),
                    "payoff": args.payoff.payoff,
                    "strike": args.payoff.strike,
                },
                "results": range,
            });
            writeln!(out, "{doc}")?;
        }
        OutputFormat::Csv => {
            writeln!(out, "field,k,value")?;
            for (k, v) in range.per_k_prices.iter().enumerate() {
                writeln!(out, "per_k,{k},{}", sig12(*v))?;
            }
            writeln!(out, "low,,{}", sig12(range.low))?;
            writeln!(out, "high,,{}", sig12(range.high))?;
            writeln!(out, "degenerate,,{}", range.degenerate)?;
        }
    }
    Ok(EXIT_OK)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub param_value: f64,
    pub payoff: String,
    pub price: f64,
}

/// Grid values for a sweep, in order.
pub fn sweep_grid(
    param: SweepParam,
    from: f64,
    to: f64,
    points: Option<usize>,
) -> Result<Vec<f64>, CliError> {
    if !(from.is_finite() && to.is_finite()) || to < from {
        return Err(CliError::Usage(format!("bad sweep range {from}..{to}")));
    }
    if param == SweepParam::Steps {
        if from.fract() != 0.0 || to.fract() != 0.0 || from < 1.0 {
            return Err(CliError::Usage(
                "steps sweep needs integer bounds >= 1".into(),
            ));
        }
        let count = (to - from) as usize + 1;
        let points = points.unwrap_or(count);
        if points == 0 || points > count {
            return Err(CliError::Usage(format!(
                "steps sweep from {from} to {to} has at most {count} integer points"
            )));
        }
        let mut grid: Vec<f64> = linspace(from, to, points).map(f64::round).collect();
        grid.dedup();
        if grid.len() != points {
            return Err(CliError::Usage(
                "steps grid rounds to duplicate points".into(),
            ));
        }
        return Ok(grid);
    }
    let points = points.unwrap_or(21);
    if points == 0 {
        return Err(CliError::Usage("need at least one grid point".into()));
    }
    Ok(linspace(from, to, points).collect())
}

fn linspace(from: f64, to: f64, points: usize) -> impl Iterator<Item = f64> {
    (0..points).map(move |i| {
        if points == 1 {
            from
        } else if i == points - 1 {
            to
        } else {
            from + (to - from) * i as f64 / (points - 1) as f64
        }
    })
}

/// Recombining-tree prices of the four test payoffs on a grid. Rows come out
/// in grid order, payoffs in call, put, zsc, logcontract order.
pub fn sweep_rows(
    param: SweepParam,
    grid: &[f64],
    base: &MarketParams,
    style: FactorStyle,
    lambda: f64,
    level: f64,
) -> Result<Vec<SweepRow>, CliError> {
    let payoffs = Payoff::standard_set(level);
    let per_point: Vec<Result<Vec<SweepRow>, CliError>> = grid
        .par_iter()
        .map(|&x| {
            let (params, lambda) = match param {
                SweepParam::Steps => (base.with_steps(x as usize), lambda),
                SweepParam::Spot => (base.with_spot(x), lambda),
                SweepParam::Lambda => (*base, x),
            };
            params.validate()?;
            let law = intensity_law(lambda, &params)?;
            let factors = make_factors(&params, style)?;
            payoffs
                .iter()
                .map(|p| {
                    let v = pricer::price_recombining(&params, &factors, &law, p)?;
                    Ok(SweepRow {
                        param_value: x,
                        payoff: p.name().to_string(),
                        price: v.value,
                    })
                })
                .collect()
        })
        .collect();
    let mut rows = Vec::with_capacity(grid.len() * payoffs.len());
    for r in per_point {
        rows.extend(r?);
    }
    Ok(rows)
}

pub fn cmd_sweep(args: &SweepArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let grid = sweep_grid(args.param, args.from, args.to, args.points)?;
    let base = args.market.params();
    let style = args.market.style.into();
    let rows = sweep_rows(args.param, &grid, &base, style, args.lambda, args.strike)?;
    match args.out.output {
        OutputFormat::Json => {
            let doc = serde_json::json!({
                "config": {
                    "command": "sweep",
                    "param": args.param,
                    "grid": grid,
                    "market": base,
                    "style": style,
                    "lambda": args.lambda,
                    "strike": args.strike,
                },
                "results": rows,
            });
            writeln!(out, "{doc}")?;
        }
        OutputFormat::Csv => {
            writeln!(out, "param_value,payoff,price")?;
            for r in &rows {
                let x = if args.param == SweepParam::Steps {
                    format!("{}", r.param_value as usize)
                } else {
                    sig12(r.param_value)
                };
                writeln!(out, "{x},{},{}", r.payoff, sig12(r.price))?;
            }
        }
    }
    Ok(EXIT_OK)
}

pub fn cmd_converge(args: &ConvergeArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let market = args.market.params();
    let diffusion = DiffusionParams::from(&market);
    let cont = ContinuousExpiry::ExponentialWithAtom {
        lambda: args.lambda,
        horizon: market.maturity,
    };
    let payoff = build_payoff(args.payoff, args.strike)?;
    let cfg = McConfig {
        n_paths: args.paths,
        time_grid: 1,
        seed: args.out.seed,
        antithetic: args.antithetic,
        allow_unbounded: args.force,
    };
    let study = convergence_study(
        &diffusion,
        &cont,
        &payoff,
        &args.steps_list,
        args.market.style.into(),
        &cfg,
    )?;
    match args.out.output {
        OutputFormat::Json => {
            let doc = serde_json::json!({
                "config": {
                    "command": "converge",
                    "diffusion": diffusion,
                    "expiry": cont,
                    "payoff": args.payoff,
                    "strike": args.strike,
                    "mc": cfg,
                },
                "results": study,
            });
            writeln!(out, "{doc}")?;
        }
        OutputFormat::Csv => {
            writeln!(out, "n,tree_price,mc_mean,mc_se,abs_diff")?;
            for r in &study.rows {
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    r.n,
                    sig12(r.tree_price),
                    sig12(r.mc_mean),
                    sig12(r.mc_se),
                    sig12(r.abs_diff)
                )?;
            }
        }
    }
    Ok(EXIT_OK)
}

pub fn cmd_bench(args: &BenchArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    if args.n_from == 0 || args.n_to < args.n_from {
        return Err(CliError::Usage("need 1 <= n-from <= n-to".into()));
    }
    let n_list: Vec<usize> = (args.n_from..=args.n_to).collect();
    let payoff = build_payoff(args.payoff.payoff, args.payoff.strike)?;
    let rows = run_bench(
        &args.market.params(),
        args.lambda,
        &payoff,
        &n_list,
        args.reps,
    )?;
    match args.out.output {
        OutputFormat::Json => {
            let doc = serde_json::json!({
                "config": {
                    "command": "bench",
                    "n_list": n_list,
                    "reps": args.reps,
                    "market": args.market.params(),
                    "lambda": args.lambda,
                    "payoff": args.payoff.payoff,
                },
                "results": rows,
            });
            writeln!(out, "{doc}")?;
        }
        OutputFormat::Csv => {
            writeln!(out, "n_steps,algo,mean_ns,reps,nodes_touched")?;
            for r in &rows {
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    r.n_steps, r.algo, r.mean_ns, r.reps, r.nodes_touched
                )?;
            }
        }
    }
    Ok(EXIT_OK)
}

/// Signature shared by the homogeneous pricers.
pub type PricerFn =
    fn(&MarketParams, &MoveFactors, &ExpiryLaw, &Payoff) -> crate::Result<PriceResult>;

/// The production pricer table checked by the self-test.
pub fn homogeneous_pricers() -> Vec<(Algorithm, PricerFn)> {
    vec![
        (Algorithm::Trinomial, pricer::price_trinomial as PricerFn),
        (
            Algorithm::RecursiveBinomial,
            pricer::price_recursive_binomial,
        ),
        (Algorithm::Recombining, pricer::price_recombining),
        (Algorithm::ConditioningSum, pricer::price_conditioning_sum),
    ]
}

/// One randomized parameterization of the self-test.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelftestCase {
    pub index: usize,
    pub market: MarketParams,
    /// Middle probability `λ·dt`, constant over periods.
    pub hazard: f64,
    pub payoff: PayoffKind,
}

/// Draw case `index`: its own ChaCha8 stream of `seed`, so cases are
/// independent of evaluation order.
pub fn selftest_case(seed: u64, index: usize) -> SelftestCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let steps = rng.random_range(1..=12usize);
    let sigma = rng.random_range(0.05..=0.6);
    let rate = rng.random_range(0.0..=0.12);
    let div_yield = rng.random_range(0.0..=0.12);
    let hazard = rng.random_range(0.01..=0.9);
    let maturity = rng.random_range(0.25..=2.0);
    let spot = rng.random_range(50.0..=150.0);
    let payoff = [
        PayoffKind::Call,
        PayoffKind::Put,
        PayoffKind::Zsc,
        PayoffKind::Logcontract,
    ][rng.random_range(0..4usize)];
    SelftestCase {
        index,
        market: MarketParams {
            spot,
            rate,
            div_yield,
            sigma,
            maturity,
            steps,
        },
        hazard,
        payoff,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CaseOutcome {
    pub case: SelftestCase,
    pub values: Vec<(Algorithm, f64)>,
    pub max_discrepancy: f64,
    /// Largest deviation from path enumeration, for `N <= 8`.
    pub oracle_gap: Option<f64>,
    /// Algorithms off the consensus by more than the tolerance.
    pub divergent: Vec<Algorithm>,
    pub error: Option<String>,
}

impl CaseOutcome {
    pub fn passed(&self) -> bool {
        self.error.is_none()
            && self.max_discrepancy < SELFTEST_TOL
            && self.oracle_gap.is_none_or(|g| g <= ORACLE_TOL)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub outcomes: Vec<CaseOutcome>,
}

impl SelftestReport {
    pub fn consistent(&self) -> usize {
        self.outcomes.iter().filter(|o| o.passed()).count()
    }

    pub fn oracle_cases(&self) -> usize {
        self.outcomes
            .iter()
            .filter(|o| o.oracle_gap.is_some())
            .count()
    }

    pub fn max_discrepancy(&self) -> f64 {
        self.outcomes
            .iter()
            .map(|o| o.max_discrepancy)
            .fold(0.0, f64::max)
    }

    pub fn max_oracle_gap(&self) -> f64 {
        self.outcomes
            .iter()
            .filter_map(|o| o.oracle_gap)
            .fold(0.0, f64::max)
    }

    pub fn all_passed(&self) -> bool {
        self.consistent() == self.outcomes.len()
    }
}

/// Per-algorithm prices and the enumeration price when `N` allows it.
type CaseValues = (Vec<(Algorithm, f64)>, Option<f64>);

fn evaluate_case(case: SelftestCase, pricers: &[(Algorithm, PricerFn)]) -> CaseOutcome {
    let mut outcome = CaseOutcome {
        case: case.clone(),
        values: Vec::new(),
        max_discrepancy: 0.0,
        oracle_gap: None,
        divergent: Vec::new(),
        error: None,
    };
    let run = || -> crate::Result<CaseValues> {
        let p = &case.market;
        let factors = make_factors(p, FactorStyle::Exponential)?;
        let law = crate::expiry::law_from_hazards(&vec![case.hazard; p.steps])?;
        let payoff = build_payoff(case.payoff, 100.0)?;
        let values = pricers
            .iter()
            .map(|(algo, f)| Ok((*algo, f(p, &factors, &law, &payoff)?.value)))
            .collect::<crate::Result<Vec<_>>>()?;
        let oracle = if p.steps <= pricer::ENUMERATION_MAX_STEPS {
            Some(price_path_enumeration(p, &factors, &law, &payoff)?.0.value)
        } else {
            None
        };
        Ok((values, oracle))
    };
    match run() {
        Ok((values, oracle)) => {
            let mut sorted: Vec<f64> = values.iter().map(|v| v.1).collect();
            sorted.sort_by(f64::total_cmp);
            let mid = sorted.len() / 2;
            let consensus = if sorted.len().is_multiple_of(2) {
                0.5 * (sorted[mid - 1] + sorted[mid])
            } else {
                sorted[mid]
            };
            let reference = oracle.unwrap_or(consensus);
            for (i, (_, a)) in values.iter().enumerate() {
                for (_, b) in &values[i + 1..] {
                    outcome.max_discrepancy = outcome.max_discrepancy.max((a - b).abs());
                }
            }
            outcome.oracle_gap = oracle.map(|o| {
                values
                    .iter()
                    .map(|(_, v)| (v - o).abs())
                    .fold(0.0, f64::max)
            });
            let tol = if oracle.is_some() {
                ORACLE_TOL
            } else {
                SELFTEST_TOL
            };
            outcome.divergent = values
                .iter()
                .filter(|(_, v)| (v - reference).abs() > tol)
                .map(|(a, _)| *a)
                .collect();
            outcome.values = values;
        }
        Err(e) => outcome.error = Some(e.to_string()),
    }
    outcome
}

/// Run `cases` random parameterizations through `pricers`.
pub fn selftest(cases: usize, seed: u64, pricers: &[(Algorithm, PricerFn)]) -> SelftestReport {
    let outcomes = (0..cases)
        .into_par_iter()
        .map(|i| evaluate_case(selftest_case(seed, i), pricers))
        .collect();
    SelftestReport { seed, outcomes }
}

/// Print a self-test report; returns the exit code.
pub fn write_selftest(
    report: &SelftestReport,
    format: OutputFormat,
    out: &mut dyn Write,
) -> std::io::Result<i32> {
    let code = if report.all_passed() {
        EXIT_OK
    } else {
        EXIT_TEST_FAILURE
    };
    match format {
        OutputFormat::Json => {
            let failures: Vec<&CaseOutcome> =
                report.outcomes.iter().filter(|o| !o.passed()).collect();
            let doc = serde_json::json!({
                "config": {"command": "selftest", "cases": report.outcomes.len(), "seed": report.seed},
                "results": {
                    "consistent": report.consistent(),
                    "cases": report.outcomes.len(),
                    "max_discrepancy": report.max_discrepancy(),
                    "oracle_cases": report.oracle_cases(),
                    "max_oracle_gap": report.max_oracle_gap(),
                    "failures": failures,
                }
            });
            writeln!(out, "{doc}")?;
        }
        OutputFormat::Csv => {
            for o in report.outcomes.iter().filter(|o| !o.passed()) {
                let names: Vec<&str> = o.divergent.iter().map(|a| a.tag()).collect();
                let m = &o.case.market;
                writeln!(
                    out,
                    "FAIL case {}: divergent [{}] payoff={:?} N={} T={} S0={} sigma={} r={} y={} q_m={}{}",
                    o.case.index,
                    names.join(","),
                    o.case.payoff,
                    m.steps,
                    m.maturity,
                    m.spot,
                    m.sigma,
                    m.rate,
                    m.div_yield,
                    o.case.hazard,
                    o.error.as_deref().map(|e| format!(" error: {e}")).unwrap_or_default(),
                )?;
            }
            writeln!(
                out,
                "{}/{} consistent, max discrepancy {:.3e} {} {:.0e}",
                report.consistent(),
                report.outcomes.len(),
                report.max_discrepancy(),
                if report.max_discrepancy() < SELFTEST_TOL {
                    "<"
                } else {
                    ">="
                },
                SELFTEST_TOL,
            )?;
            writeln!(
                out,
                "enumeration oracle: {} cases with N <= {}, max gap {:.3e} (tolerance {:.0e})",
                report.oracle_cases(),
                pricer::ENUMERATION_MAX_STEPS,
                report.max_oracle_gap(),
                ORACLE_TOL,
            )?;
            writeln!(out, "{}", if code == EXIT_OK { "PASS" } else { "FAIL" })?;
        }
    }
    Ok(code)
}

pub fn cmd_selftest(args: &SelftestArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let report = selftest(args.cases, args.out.seed, &homogeneous_pricers());
    Ok(write_selftest(&report, args.out.output, out)?)
}
