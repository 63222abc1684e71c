//! Command-line front end for the `incomelaw` library.
//!
//! Five subcommands cover the pipeline end to end: `fit` estimates the
//! shifted-exponential law from a quantile table, `xreg` runs the embedded
//! cross-country regression, `simulate` explores the discrete allocation
//! space, `gini` evaluates the inequality index of a fitted law, and
//! `convert` normalizes raw tables into the canonical annual format.
//!
//! Human-readable reports (`key=value` lines, 6 significant digits) go to
//! stdout; machine-readable data goes to `--output` at full precision, or to
//! stdout after the report when no path is given. Every command is
//! deterministic given its flags, inputs, and seed.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use incomelaw::dataset::{self, ColumnSchema};
use incomelaw::{allocsim, econ, expofit};
use incomelaw::{
    AllocationSpace, CountryRecord, CumulativeSample, ExponentialLaw, FitMode, FitResult, Period,
    TruncationConfig,
};

#[derive(Parser)]
#[command(
    name = "incomelaw",
    version,
    about = "Fit shifted-exponential income laws, regress cross-country panels, \
             and explore income allocation spaces"
)]
struct Cli {
    /// Write machine-readable data (plot points, tables) to this path instead
    /// of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    output: Option<PathBuf>,

    /// Encoding of the machine-readable data.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    #[value(name = "csv")]
    Csv,
    #[value(name = "json")]
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Fit the shifted-exponential law to a quantile income table.
    Fit(FitArgs),
    /// Regress the fitted support edge on adjusted unemployment compensation
    /// across the embedded country panel.
    Xreg(XregArgs),
    /// Enumerate, maximize, or sample the space of income allocations.
    Simulate(SimArgs),
    /// Gini coefficient implied by a fitted law.
    Gini(GiniArgs),
    /// Normalize a quantile table to annual units of the target currency.
    Convert(ConvertArgs),
}

#[derive(Args)]
struct FitArgs {
    /// Input table: canonical `threshold,frac_at_or_above` or percentile
    /// `cum_frac_below,threshold`.
    #[arg(value_name = "INPUT")]
    input: PathBuf,

    /// Truncation strategy.
    #[arg(long, value_enum, default_value_t = ModeArg::TwoStage)]
    mode: ModeArg,

    /// Smallest number of points the truncation search may keep.
    #[arg(long, default_value_t = 5)]
    min_points: usize,

    /// Largest fraction of points the upper-tail scan may drop.
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    max_drop_frac: f64,

    /// Iteration cap for the corollary1 lower-truncation loop.
    #[arg(long, default_value_t = 20)]
    max_iterations: usize,

    /// Exchange rate (local currency units per target unit) applied before
    /// fitting.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    rate: f64,

    /// Reporting period of the input thresholds.
    #[arg(long, value_enum, default_value_t = PeriodArg::Annual)]
    period: PeriodArg,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    #[value(name = "two-stage")]
    TwoStage,
    #[value(name = "corollary1")]
    Corollary1,
}

impl From<ModeArg> for FitMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::TwoStage => FitMode::TwoStage,
            ModeArg::Corollary1 => FitMode::Corollary1,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PeriodArg {
    #[value(name = "annual")]
    Annual,
    #[value(name = "monthly")]
    Monthly,
    #[value(name = "weekly")]
    Weekly,
}

impl From<PeriodArg> for Period {
    fn from(p: PeriodArg) -> Self {
        match p {
            PeriodArg::Annual => Period::Annual,
            PeriodArg::Monthly => Period::Monthly,
            PeriodArg::Weekly => Period::Weekly,
        }
    }
}

#[derive(Args)]
struct XregArgs {
    /// Panel year to regress (2011 through 2014).
    #[arg(long)]
    year: i32,
}

#[derive(Args)]
struct SimArgs {
    /// Number of agents sharing the income.
    #[arg(long)]
    agents: u64,

    /// Total income to distribute, in indivisible units.
    #[arg(long)]
    income: u64,

    /// What to compute over the allocation space.
    #[arg(long, value_enum, default_value_t = SimModeArg::Enumerate)]
    mode: SimModeArg,

    /// Seed for the sampling generator.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Number of allocations to draw in sample mode.
    #[arg(long, default_value_t = 10_000)]
    draws: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SimModeArg {
    #[value(name = "enumerate")]
    Enumerate,
    #[value(name = "argmax")]
    Argmax,
    #[value(name = "sample")]
    Sample,
}

#[derive(Args)]
struct GiniArgs {
    /// Decay scale of the law; must be positive.
    #[arg(long, allow_negative_numbers = true)]
    theta: f64,

    /// Support edge of the law; must be nonnegative.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    mu: f64,
}

#[derive(Args)]
struct ConvertArgs {
    /// Input table: canonical `threshold,frac_at_or_above` or percentile
    /// `cum_frac_below,threshold`.
    #[arg(value_name = "INPUT")]
    input: PathBuf,

    /// Exchange rate (local currency units per target unit).
    #[arg(long, default_value_t = 1.0)]
    rate: f64,

    /// Reporting period of the input thresholds.
    #[arg(long, value_enum, default_value_t = PeriodArg::Annual)]
    period: PeriodArg,
}

/// Everything one invocation is about to do, resolved before any work
/// starts: the inputs it will read, the fit configuration it will use, the
/// seed it will pass to the generator, and where the data will land.
struct RunManifest {
    command: &'static str,
    inputs: Vec<PathBuf>,
    config: TruncationConfig,
    seed: Option<u64>,
    output: Option<PathBuf>,
}

impl RunManifest {
    fn from_cli(cli: &Cli) -> Self {
        let (command, inputs, config, seed) = match &cli.command {
            Cmd::Fit(a) => (
                "fit",
                vec![a.input.clone()],
                TruncationConfig {
                    min_points: a.min_points,
                    max_upper_drop_frac: a.max_drop_frac,
                    max_iterations: a.max_iterations,
                    mode: a.mode.into(),
                    ..TruncationConfig::default()
                },
                None,
            ),
            Cmd::Xreg(_) => ("xreg", vec![], TruncationConfig::default(), None),
            Cmd::Simulate(a) => {
                let seed = (a.mode == SimModeArg::Sample).then_some(a.seed);
                ("simulate", vec![], TruncationConfig::default(), seed)
            }
            Cmd::Gini(_) => ("gini", vec![], TruncationConfig::default(), None),
            Cmd::Convert(a) => (
                "convert",
                vec![a.input.clone()],
                TruncationConfig::default(),
                None,
            ),
        };
        Self {
            command,
            inputs,
            config,
            seed,
            output: cli.output.clone(),
        }
    }

    fn validate(&self) -> Result<()> {
        for path in &self.inputs {
            if !path.exists() {
                bail!(
                    "{}: input file {} does not exist",
                    self.command,
                    path.display()
                );
            }
        }
        Ok(())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    let manifest = RunManifest::from_cli(cli);
    manifest.validate()?;

    let (report, data) = match &cli.command {
        Cmd::Fit(args) => cmd_fit(args, &manifest.config, cli.format)?,
        Cmd::Xreg(args) => cmd_xreg(args, cli.format)?,
        Cmd::Simulate(args) => cmd_simulate(args, manifest.seed, cli.format)?,
        Cmd::Gini(args) => cmd_gini(args, cli.format)?,
        Cmd::Convert(args) => cmd_convert(args, cli.format)?,
    };

    write_stdout(&report)?;
    if let Some(data) = data {
        match &manifest.output {
            Some(path) => {
                fs::write(path, &data).with_context(|| format!("writing {}", path.display()))?
            }
            None => {
                if !report.is_empty() {
                    write_stdout("\n")?;
                }
                write_stdout(&data)?;
            }
        }
    }
    Ok(())
}

/// Writes to stdout, treating a closed pipe (e.g. `| head`) as a normal
/// early exit instead of an error.
fn write_stdout(text: &str) -> Result<()> {
    use std::io::Write as _;
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Ok(()) => Ok(()),
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => std::process::exit(0),
        Err(e) => Err(e).context("writing to stdout"),
    }
}

/// Rounds to 6 significant digits and renders without trailing zeros, the
/// precision used by all report lines.
fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let rounded: f64 = format!("{x:.5e}")
        .parse()
        .expect("scientific float round-trips");
    format!("{rounded}")
}

fn push_line(report: &mut String, key: &str, value: impl AsRef<str>) {
    report.push_str(key);
    report.push('=');
    report.push_str(value.as_ref());
    report.push('\n');
}

/// Reads a quantile table in either supported layout, keyed off the header.
fn load_sample(path: &Path) -> Result<CumulativeSample> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let header = text.lines().next().unwrap_or("");
    if header
        .split(',')
        .map(str::trim)
        .any(|c| c == "cum_frac_below")
    {
        parse_percentile(&text)
    } else {
        Ok(dataset::ingest_str(&text, &ColumnSchema::default())?)
    }
}

/// Parses the percentile layout `cum_frac_below,threshold` and converts it
/// to at-or-above fractions.
fn parse_percentile(text: &str) -> Result<CumulativeSample> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines
        .next()
        .unwrap_or("")
        .split(',')
        .map(str::trim)
        .collect();
    let cum_idx = header
        .iter()
        .position(|&c| c == "cum_frac_below")
        .context("percentile table is missing the cum_frac_below column")?;
    let thr_idx = header
        .iter()
        .position(|&c| c == "threshold")
        .context("percentile table is missing the threshold column")?;

    let mut pairs = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let row = i + 2;
        if fields.len() <= cum_idx.max(thr_idx) {
            bail!(
                "row {row} has {} fields, expected at least {}",
                fields.len(),
                cum_idx.max(thr_idx) + 1
            );
        }
        let cum: f64 = fields[cum_idx]
            .parse()
            .with_context(|| format!("row {row}: bad cum_frac_below {:?}", fields[cum_idx]))?;
        let thr: f64 = fields[thr_idx]
            .parse()
            .with_context(|| format!("row {row}: bad threshold {:?}", fields[thr_idx]))?;
        pairs.push((cum, thr));
    }
    Ok(dataset::from_percentile_table(&pairs)?)
}

fn cmd_fit(
    args: &FitArgs,
    cfg: &TruncationConfig,
    format: Format,
) -> Result<(String, Option<String>)> {
    let raw = load_sample(&args.input)?;
    let rec = CountryRecord::new("XXX", 0, args.rate, args.period.into())?;
    let sample = dataset::normalize(&raw, &rec)?;
    let fit = expofit::fit(&sample, cfg)?;

    let mut report = String::new();
    push_line(&mut report, "theta", sig6(fit.law.theta));
    push_line(&mut report, "mu", sig6(fit.law.mu));
    push_line(&mut report, "x_min", sig6(fit.x_min));
    push_line(&mut report, "x_max", sig6(fit.x_max));
    push_line(&mut report, "pct_below", sig6(100.0 * fit.frac_below_xmin));
    push_line(&mut report, "pct_above", sig6(100.0 * fit.frac_above_xmax));
    push_line(&mut report, "r2_adj", sig6(fit.summary.r2_adj));
    if cfg.mode == FitMode::Corollary1 {
        push_line(&mut report, "iterations", fit.iterations.to_string());
        let history: Vec<String> = fit.mu_history.iter().map(|&m| sig6(m)).collect();
        push_line(&mut report, "mu_history", history.join(";"));
    }

    let data = match format {
        Format::Csv => fit_plot_csv(&sample, &fit),
        Format::Json => {
            let points: Vec<serde_json::Value> = sample
                .points()
                .iter()
                .map(|row| {
                    json!({
                        "x": row.threshold,
                        "x_over_theta": row.threshold / fit.law.theta,
                        "cum_pct": 100.0 * row.frac_at_or_above,
                        "fit_pct": 100.0 * fit.law.frac_at_or_above(row.threshold),
                    })
                })
                .collect();
            let doc = json!({ "fit": fit, "points": points });
            to_json_text(&doc)?
        }
    };
    Ok((report, Some(data)))
}

/// Per-point plot data: raw and rescaled income against observed and fitted
/// cumulative percentages.
fn fit_plot_csv(sample: &CumulativeSample, fit: &FitResult) -> String {
    let mut data = String::from("x,x_over_theta,cum_pct,fit_pct\n");
    for row in sample.points() {
        let x = row.threshold;
        writeln!(
            data,
            "{},{},{},{}",
            x,
            x / fit.law.theta,
            100.0 * row.frac_at_or_above,
            100.0 * fit.law.frac_at_or_above(x)
        )
        .expect("string write is infallible");
    }
    data
}

fn cmd_xreg(args: &XregArgs, format: Format) -> Result<(String, Option<String>)> {
    if !econ::PANEL_YEARS.contains(&args.year) {
        let years: Vec<String> = econ::PANEL_YEARS.iter().map(i32::to_string).collect();
        bail!(
            "unknown year {}: the embedded panel covers {}",
            args.year,
            years.join(", ")
        );
    }
    let rows: Vec<&econ::CountryEconRow> = econ::embedded_rows()
        .iter()
        .filter(|r| r.year == args.year)
        .collect();
    let summary = econ::cross_country_regression(econ::embedded_rows(), args.year)?;

    let mut report = String::new();
    push_line(&mut report, "year", args.year.to_string());
    push_line(&mut report, "n", summary.n.to_string());
    push_line(&mut report, "slope", sig6(summary.slope));
    push_line(&mut report, "se_slope", sig6(summary.se_slope));
    push_line(&mut report, "t_slope", sig6(summary.t_slope));
    push_line(&mut report, "p_slope", sig6(summary.p_slope));
    push_line(&mut report, "intercept", sig6(summary.intercept));
    push_line(&mut report, "se_intercept", sig6(summary.se_intercept));
    push_line(&mut report, "t_intercept", sig6(summary.t_intercept));
    push_line(&mut report, "p_intercept", sig6(summary.p_intercept));
    push_line(&mut report, "r2", sig6(summary.r2));
    push_line(&mut report, "r2_adj", sig6(summary.r2_adj));
    push_line(&mut report, "pearson_r", sig6(summary.pearson_r));

    let data = match format {
        Format::Csv => {
            let mut data = String::from("code,uc_adjusted,mu\n");
            for row in &rows {
                writeln!(data, "{},{},{}", row.code, row.uc_adjusted, row.mu)
                    .expect("string write is infallible");
            }
            data
        }
        Format::Json => {
            let doc = json!({ "summary": summary, "scatter": rows });
            to_json_text(&doc)?
        }
    };
    Ok((report, Some(data)))
}

fn cmd_simulate(
    args: &SimArgs,
    seed: Option<u64>,
    format: Format,
) -> Result<(String, Option<String>)> {
    let space = AllocationSpace::new(args.agents, args.income)?;
    match args.mode {
        SimModeArg::Enumerate => {
            let total = allocsim::count_allocations(&space);
            let occupancies = allocsim::enumerate_occupancies(&space)?;

            let mut report = String::new();
            push_line(&mut report, "allocations", total.to_string());
            push_line(&mut report, "occupancies", occupancies.len().to_string());

            let data = match format {
                Format::Csv => {
                    let mut data = String::from("counts,omega,entropy\n");
                    for occ in &occupancies {
                        writeln!(
                            data,
                            "{},{},{}",
                            counts_key(&occ.counts),
                            occ.multiplicity,
                            occ.entropy
                        )
                        .expect("string write is infallible");
                    }
                    data
                }
                Format::Json => {
                    let rows: Vec<serde_json::Value> =
                        occupancies.iter().map(occupancy_json).collect();
                    to_json_text(&json!({
                        "allocations": total.to_string(),
                        "occupancies": rows,
                    }))?
                }
            };
            Ok((report, Some(data)))
        }
        SimModeArg::Argmax => {
            let occ = allocsim::argmax_occupancy(&space)?;

            let mut report = String::new();
            push_line(&mut report, "omega", occ.multiplicity.to_string());
            push_line(&mut report, "entropy", sig6(occ.entropy));

            let data = match format {
                Format::Csv => {
                    let mut data = String::from("level,count\n");
                    for (&level, &count) in &occ.counts {
                        writeln!(data, "{level},{count}").expect("string write is infallible");
                    }
                    data
                }
                Format::Json => to_json_text(&occupancy_json(&occ))?,
            };
            Ok((report, Some(data)))
        }
        SimModeArg::Sample => {
            let seed = seed.unwrap_or_default();
            let allocations = allocsim::sample_uniform(&space, seed, args.draws);
            let histogram = allocsim::empirical_distribution(&allocations)?;
            let mean: f64 = histogram.iter().map(|(&l, &f)| l as f64 * f).sum();

            let mut report = String::new();
            push_line(&mut report, "agents", args.agents.to_string());
            push_line(&mut report, "income", args.income.to_string());
            push_line(&mut report, "draws", args.draws.to_string());
            push_line(&mut report, "seed", seed.to_string());
            push_line(&mut report, "mean", sig6(mean));

            let data = match format {
                Format::Csv => {
                    let mut data = String::from("level,fraction\n");
                    for (&level, &fraction) in &histogram {
                        writeln!(data, "{level},{fraction}").expect("string write is infallible");
                    }
                    data
                }
                Format::Json => {
                    let rows: Vec<serde_json::Value> =
                        histogram.iter().map(|(&l, &f)| json!([l, f])).collect();
                    to_json_text(&json!({
                        "agents": args.agents,
                        "income": args.income,
                        "draws": args.draws,
                        "seed": seed,
                        "mean": mean,
                        "histogram": rows,
                    }))?
                }
            };
            Ok((report, Some(data)))
        }
    }
}

/// Ascending `level:count` pairs joined by `;`, e.g. `0:1;2:1`.
fn counts_key(counts: &std::collections::BTreeMap<u64, u64>) -> String {
    let parts: Vec<String> = counts
        .iter()
        .map(|(level, count)| format!("{level}:{count}"))
        .collect();
    parts.join(";")
}

fn occupancy_json(occ: &incomelaw::Occupancy) -> serde_json::Value {
    let counts: Vec<serde_json::Value> = occ.counts.iter().map(|(&l, &c)| json!([l, c])).collect();
    json!({
        "counts": counts,
        "omega": occ.multiplicity.to_string(),
        "entropy": occ.entropy,
    })
}

fn cmd_gini(args: &GiniArgs, format: Format) -> Result<(String, Option<String>)> {
    let law = ExponentialLaw::new(args.theta, args.mu)?;
    let gini = econ::gini_from_fit(&law)?;

    let mut report = String::new();
    push_line(&mut report, "gini", format!("{:.6}", gini.g));

    let data = match format {
        Format::Csv => None,
        Format::Json => Some(to_json_text(&json!({
            "theta": law.theta,
            "mu": law.mu,
            "gini": gini.g,
        }))?),
    };
    Ok((report, data))
}

fn cmd_convert(args: &ConvertArgs, format: Format) -> Result<(String, Option<String>)> {
    let raw = load_sample(&args.input)?;
    let rec = CountryRecord::new("XXX", 0, args.rate, args.period.into())?;
    let sample = dataset::normalize(&raw, &rec)?;

    let data = match format {
        Format::Csv => dataset::emit(&sample),
        Format::Json => to_json_text(&json!({ "points": sample.points() }))?,
    };
    Ok((String::new(), Some(data)))
}

fn to_json_text(value: &serde_json::Value) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value).context("encoding JSON")?;
    text.push('\n');
    Ok(text)
}
