//! Command dispatch for the `lcoai` binary.
//!
//! [`run`] parses arguments, executes one verb and returns the bytes for
//! stdout and stderr together with the process exit code, so the whole
//! surface can be exercised in-process.

use std::ffi::OsString;
use std::fmt;
use std::fs::File;
use std::io::{self, BufReader};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use clap::{Parser, Subcommand, ValueEnum};
use num_rational::Ratio;

use lcoai_core::decimal::{format_fixed, group, parse_ratio, parse_scaled, DecimalError};
use lcoai_core::ingest::{count_valid_with, CountPolicy, IngestError};
use lcoai_core::money::div_round;
use lcoai_core::report::Align;
use lcoai_core::report::{comparison_table, plain_usd, sweep_table};
use lcoai_core::sensitivity::DEFAULT_SEARCH_MAX;
use lcoai_core::{
    baseline_savings, break_even, compare, compute_lcoai, fine_tune_threshold, load_scenarios,
    parse_log, sweep, tornado, ConfigError, CostScenario, Error, Horizon, Money, ParseMode,
    PerInferenceRate, ReportTable, SweepParameter, SweepSpec, TableFormat, TornadoParameter,
};

/// Process exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    Usage = 1,
    NotFound = 2,
    Undefined = 3,
    Parse = 4,
}

impl Exit {
    pub fn code(self) -> i32 {
        self as i32
    }
}

/// Everything a command invocation produced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Output {
    pub stdout: String,
    pub stderr: String,
    pub exit: Exit,
}

#[derive(Debug)]
struct Failure {
    exit: Exit,
    message: String,
}

impl Failure {
    fn new(exit: Exit, message: impl fmt::Display) -> Self {
        Failure {
            exit,
            message: message.to_string(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let exit = match e {
            Error::UndefinedMetric { .. }
            | Error::IncompatibleScenarios { .. }
            | Error::Overflow => Exit::Undefined,
            _ => Exit::Usage,
        };
        Failure::new(exit, e)
    }
}

type CmdResult = Result<(String, String), Failure>;

#[derive(Parser, Debug)]
#[command(name = "lcoai", version, about = "Levelized cost of AI calculator")]
struct Cli {
    /// Table output format. Defaults to markdown, or csv for `sweep`.
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
    /// Abort on the first malformed log line instead of skipping it.
    #[arg(long, global = true)]
    strict: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Markdown,
    Csv,
}

impl From<FormatArg> for TableFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Markdown => TableFormat::Markdown,
            FormatArg::Csv => TableFormat::Csv,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute LCOAI for one scenario and show its decomposition.
    Compute { file: PathBuf, scenario: String },
    /// Compare every scenario in a file, cheapest first.
    Table { file: PathBuf },
    /// Sweep one parameter over `START..END:STEP`.
    ///
    /// Volumes accept k/M/G suffixes (`1M..50M:1M`), OPEX rates are USD per
    /// inference (`0.001..0.020:0.001`) and CAPEX multipliers are decimals or
    /// fractions (`0.7..1.3:0.1`).
    Sweep {
        file: PathBuf,
        scenario: String,
        /// volume, opex or capex
        parameter: String,
        range: String,
    },
    /// Volume at which the higher-CAPEX scenario becomes strictly cheaper.
    Breakeven {
        file: PathBuf,
        a: String,
        b: String,
        #[arg(long, default_value_t = DEFAULT_SEARCH_MAX)]
        search_max: u64,
    },
    /// Volume at which fine-tuning pays for itself.
    Finetune {
        /// Base model USD per inference.
        #[arg(long, value_parser = parse_rate)]
        base: PerInferenceRate,
        /// Fine-tuned model USD per inference.
        #[arg(long, value_parser = parse_rate)]
        tuned: PerInferenceRate,
        /// One-off tuning cost in USD.
        #[arg(long, value_parser = parse_money)]
        capex: Money,
    },
    /// Savings against a non-AI cost per 1,000 tasks.
    Baseline {
        file: PathBuf,
        scenario: String,
        /// Baseline USD per 1,000 tasks.
        #[arg(long, value_parser = parse_money)]
        baseline: Money,
    },
    /// Rank inputs by the LCOAI spread from a symmetric swing.
    Tornado {
        file: PathBuf,
        scenario: String,
        /// Fractional swing applied to each input, e.g. 0.3.
        #[arg(long, default_value = "0.3", value_parser = parse_fraction)]
        swing: Ratio<i64>,
    },
    /// Count valid inferences in a JSONL telemetry log.
    Ingest {
        log: PathBuf,
        /// Start of the first period; defaults to the earliest record.
        #[arg(long)]
        start: Option<DateTime<Utc>>,
        #[arg(long, default_value_t = 1)]
        periods: u32,
        #[arg(long, default_value_t = 12)]
        period_months: u32,
        /// Count errored inferences as valid.
        #[arg(long)]
        count_failed: bool,
    },
}

fn parse_rate(s: &str) -> Result<PerInferenceRate, String> {
    s.parse().map_err(|e: DecimalError| e.to_string())
}

fn parse_money(s: &str) -> Result<Money, String> {
    let m: Money = s.parse().map_err(|e: DecimalError| e.to_string())?;
    if m.is_negative() {
        return Err("must not be negative".into());
    }
    Ok(m)
}

fn parse_fraction(s: &str) -> Result<Ratio<i64>, String> {
    parse_ratio(s).map_err(|e| e.to_string())
}

/// Run one invocation. `args` includes the program name.
pub fn run<I, T>(args: I) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Output {
                    stdout: String::new(),
                    stderr: text,
                    exit: Exit::Usage,
                }
            } else {
                Output {
                    stdout: text,
                    stderr: String::new(),
                    exit: Exit::Ok,
                }
            };
        }
    };
    match dispatch(cli) {
        Ok((stdout, stderr)) => Output {
            stdout,
            stderr,
            exit: Exit::Ok,
        },
        Err(f) => Output {
            stdout: String::new(),
            stderr: format!("error: {}\n", f.message),
            exit: f.exit,
        },
    }
}

fn dispatch(cli: Cli) -> CmdResult {
    let format = cli.format.map(TableFormat::from);
    match cli.command {
        Command::Compute { file, scenario } => cmd_compute(&file, &scenario),
        Command::Table { file } => cmd_table(&file, format.unwrap_or_default()),
        Command::Sweep {
            file,
            scenario,
            parameter,
            range,
        } => cmd_sweep(
            &file,
            &scenario,
            &parameter,
            &range,
            format.unwrap_or(TableFormat::Csv),
        ),
        Command::Breakeven {
            file,
            a,
            b,
            search_max,
        } => cmd_breakeven(&file, &a, &b, search_max),
        Command::Finetune { base, tuned, capex } => cmd_finetune(base, tuned, capex),
        Command::Baseline {
            file,
            scenario,
            baseline,
        } => cmd_baseline(&file, &scenario, baseline),
        Command::Tornado {
            file,
            scenario,
            swing,
        } => cmd_tornado(&file, &scenario, swing, format.unwrap_or_default()),
        Command::Ingest {
            log,
            start,
            periods,
            period_months,
            count_failed,
        } => {
            let horizon = Horizon::new(periods, period_months)?;
            let mode = if cli.strict {
                ParseMode::Strict
            } else {
                ParseMode::Lenient
            };
            cmd_ingest(&log, start, &horizon, mode, count_failed)
        }
    }
}

fn load(path: &Path) -> Result<Vec<CostScenario>, Failure> {
    load_scenarios(path).map_err(|e| {
        let exit = match e {
            ConfigError::Io(_) => Exit::NotFound,
            _ => Exit::Parse,
        };
        Failure::new(exit, format_args!("{}: {e}", path.display()))
    })
}

/// Exact name first, then a unique case-insensitive substring.
fn find<'a>(scenarios: &'a [CostScenario], name: &str) -> Result<&'a CostScenario, Failure> {
    if let Some(s) = scenarios.iter().find(|s| s.name == name) {
        return Ok(s);
    }
    let needle = name.to_lowercase();
    let hits: Vec<_> = scenarios
        .iter()
        .filter(|s| s.name.to_lowercase().contains(&needle))
        .collect();
    match hits.as_slice() {
        [one] => Ok(one),
        [] => Err(Failure::new(
            Exit::NotFound,
            format_args!("no scenario named `{name}`"),
        )),
        many => {
            let names: Vec<_> = many.iter().map(|s| format!("`{}`", s.name)).collect();
            Err(Failure::new(
                Exit::NotFound,
                format_args!("`{name}` is ambiguous: {}", names.join(", ")),
            ))
        }
    }
}

fn cmd_compute(file: &Path, name: &str) -> CmdResult {
    let scenarios = load(file)?;
    let scenario = find(&scenarios, name)?;
    let r = compute_lcoai(scenario)?;
    let pv = if r.discounted { " (present value)" } else { "" };
    let mut out = String::new();
    out += &format!("Scenario: {}\n", r.scenario_name);
    out += &format!("CAPEX charged: {}\n", r.total_capex_charged.format_usd(2));
    out += &format!("OPEX{pv}: {}\n", r.total_opex.format_usd(2));
    out += &format!("Total cost{pv}: {}\n", r.total_cost().format_usd(2));
    out += &format!("Valid inferences{pv}: {}\n", group(r.total_inferences));
    out += &format!("Cost per inference: {}\n", r.per_inference.format_usd());
    out += &format!("LCOAI: {} per 1,000\n", r.per_thousand.format_usd(2));
    let mut err = String::new();
    if r.short_horizon_discount {
        err += "warning: discounting applied to a horizon of 24 months or less\n";
    }
    Ok((out, err))
}

fn cmd_table(file: &Path, format: TableFormat) -> CmdResult {
    let scenarios = load(file)?;
    let rows = compare(&scenarios)?;
    Ok((comparison_table(&rows).render(format), String::new()))
}

fn cmd_sweep(
    file: &Path,
    name: &str,
    parameter: &str,
    range: &str,
    format: TableFormat,
) -> CmdResult {
    let parameter: SweepParameter = parameter.parse()?;
    let spec = parse_range(parameter, range)?;
    let scenarios = load(file)?;
    let scenario = find(&scenarios, name)?;
    let result = sweep(scenario, &spec)?;
    Ok((sweep_table(&result).render(format), String::new()))
}

fn split_range(range: &str) -> Result<(&str, &str, &str), Failure> {
    let bad = || {
        Failure::new(
            Exit::Usage,
            format_args!("range `{range}` is not of the form START..END:STEP"),
        )
    };
    let (span, step) = range.rsplit_once(':').ok_or_else(bad)?;
    let (start, end) = span.split_once("..").ok_or_else(bad)?;
    Ok((start.trim(), end.trim(), step.trim()))
}

fn parse_range(parameter: SweepParameter, range: &str) -> Result<SweepSpec, Failure> {
    let (start, end, step) = split_range(range)?;
    let usage =
        |e: &dyn fmt::Display| Failure::new(Exit::Usage, format_args!("range `{range}`: {e}"));
    let spec = match parameter {
        SweepParameter::Volume => {
            let v = |s| parse_count(s).map_err(|e| usage(&e));
            SweepSpec::volume_range(v(start)?, v(end)?, v(step)?)?
        }
        SweepParameter::OpexRate => {
            let r = |s| parse_rate(s).map_err(|e| usage(&e));
            SweepSpec::opex_range(r(start)?, r(end)?, r(step)?)?
        }
        SweepParameter::CapexMultiplier => {
            let k = |s| parse_fraction(s).map_err(|e| usage(&e));
            SweepSpec::capex_range(k(start)?, k(end)?, k(step)?)?
        }
    };
    Ok(spec)
}

/// Whole inference count with an optional k, M or G suffix; `2.5M` is allowed.
fn parse_count(s: &str) -> Result<u64, String> {
    let (digits, unit) = match s.chars().last() {
        Some('k' | 'K') => (&s[..s.len() - 1], 1_000i128),
        Some('M') => (&s[..s.len() - 1], 1_000_000),
        Some('G' | 'B') => (&s[..s.len() - 1], 1_000_000_000),
        _ => (s, 1),
    };
    let scaled = parse_scaled(digits, 6).map_err(|e| format!("`{s}`: {e}"))?;
    let micros = scaled * unit;
    if micros % 1_000_000 != 0 {
        return Err(format!("`{s}` is not a whole number of inferences"));
    }
    u64::try_from(micros / 1_000_000).map_err(|_| format!("`{s}` is out of range"))
}

fn cmd_breakeven(file: &Path, a: &str, b: &str, search_max: u64) -> CmdResult {
    let scenarios = load(file)?;
    let (a, b) = (find(&scenarios, a)?, find(&scenarios, b)?);
    let r = break_even(a, b, search_max)?;
    let out = match r.crossover_volume {
        Some(v) => format!(
            "Break-even volume: {} inferences\nBelow: {} is cheaper or equal\nFrom {}: {} is strictly cheaper\n",
            group(v as u128),
            r.cheaper_below,
            group(v as u128),
            r.cheaper_above,
        ),
        None if r.search_exhausted => format!(
            "Break-even volume: none up to {} inferences\n{} is cheaper over the searched range\n",
            group(search_max as u128),
            r.cheaper_above,
        ),
        None => format!(
            "Break-even volume: none\n{} is cheaper or equal at every volume\n",
            r.cheaper_above
        ),
    };
    Ok((out, String::new()))
}

fn cmd_finetune(base: PerInferenceRate, tuned: PerInferenceRate, capex: Money) -> CmdResult {
    let d = fine_tune_threshold(base, tuned, capex)?;
    let out = match d.threshold_volume {
        Some(v) => format!(
            "Fine-tuning threshold: {} inferences\nTuned model at {} is strictly cheaper than {} from this volume\n",
            group(v as u128),
            tuned.format_usd(),
            base.format_usd(),
        ),
        None => format!(
            "Fine-tuning threshold: never\nTuned rate {} is not below base rate {}\n",
            tuned.format_usd(),
            base.format_usd(),
        ),
    };
    Ok((out, String::new()))
}

fn cmd_baseline(file: &Path, name: &str, baseline: Money) -> CmdResult {
    let scenarios = load(file)?;
    let scenario = find(&scenarios, name)?;
    let r = compute_lcoai(scenario)?;
    let cmp = baseline_savings(&r, baseline)?;
    let mut out = String::new();
    out += &format!("Scenario: {}\n", r.scenario_name);
    out += &format!(
        "LCOAI: {} per 1,000\n",
        cmp.lcoai_per_thousand.format_usd(2)
    );
    out += &format!(
        "Baseline: {} per 1,000\n",
        cmp.baseline_cost_per_thousand.format_usd(2)
    );
    out += &format!(
        "Savings: {} per 1,000",
        cmp.savings_per_thousand.format_usd(2)
    );
    if let Some(ratio) = cmp.savings_ratio {
        let basis_points = div_round(*ratio.numer() as i128 * 10_000, *ratio.denom() as i128);
        out += &format!(" ({}%)", format_fixed(basis_points, 2, 2, false));
    }
    out.push('\n');
    Ok((out, String::new()))
}

fn cmd_tornado(file: &Path, name: &str, swing: Ratio<i64>, format: TableFormat) -> CmdResult {
    let scenarios = load(file)?;
    let scenario = find(&scenarios, name)?;
    let bars = tornado(scenario, swing, &TornadoParameter::ALL)?;
    let mut table = ReportTable::new(["parameter", "low_usd", "high_usd", "spread_usd"])
        .with_alignment(vec![Align::Left, Align::Right, Align::Right, Align::Right]);
    for bar in &bars {
        table
            .push_row(vec![
                bar.parameter.as_str().to_string(),
                plain_usd(bar.low),
                plain_usd(bar.high),
                plain_usd(Money::from_micros(bar.spread())),
            ])
            .expect("four cells");
    }
    Ok((table.render(format), String::new()))
}

fn cmd_ingest(
    path: &Path,
    start: Option<DateTime<Utc>>,
    horizon: &Horizon,
    mode: ParseMode,
    count_failed: bool,
) -> CmdResult {
    let file = File::open(path).map_err(|e| not_found(path, e))?;
    let parsed = parse_log(BufReader::new(file), mode).map_err(|e| match e {
        IngestError::Parse(p) => Failure::new(Exit::Parse, format_args!("{}: {p}", path.display())),
        IngestError::Io(e) => not_found(path, e),
    })?;
    let mut err = String::new();
    for skipped in &parsed.skipped {
        err += &format!("warning: {}: skipped {skipped}\n", path.display());
    }
    let start = start
        .or_else(|| parsed.records.iter().map(|r| r.timestamp).min())
        .unwrap_or_default();
    let count = count_valid_with(
        &parsed.records,
        horizon,
        start,
        CountPolicy {
            include_failed: count_failed,
        },
    );
    let mut out = String::new();
    out += &format!("valid={}\n", count.valid);
    out += &format!("excluded_nonproductive={}\n", count.excluded_nonproductive);
    out += &format!("excluded_failed={}\n", count.excluded_failed);
    out += &format!("out_of_range={}\n", count.out_of_range);
    out += &format!("skipped_lines={}\n", parsed.skipped.len());
    for (period, n) in count.to_projection(horizon).per_period().iter().enumerate() {
        out += &format!("period_{period}={n}\n");
    }
    Ok((out, err))
}

fn not_found(path: &Path, e: io::Error) -> Failure {
    Failure::new(Exit::NotFound, format_args!("{}: {e}", path.display()))
}
