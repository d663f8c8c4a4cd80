//! `levelcross` command-line front end.
//!
//! Every subcommand emits rows with the same fields, as CSV (header first)
//! or a JSON array. Floats are written with 17 significant digits so that
//! the printed values round-trip exactly.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::asymptotics::{fit_log_slope_points, region_prediction};
use crate::error::{Error, Result};
use crate::montecarlo::{simulate_counts, RootMethod, SampleCounts};
use crate::moments::PolynomialEnsemble;
use crate::quadrature::{expected_crossings_region, KRule, Method, Region, DEFAULT_TOL};
use crate::spectrum::{CovarianceModel, ModelSpec};

/// Environment variable holding the default worker count.
pub const THREADS_ENV: &str = "LEVELCROSS_THREADS";
pub const DEFAULT_COUNT: usize = 10_000;
pub const DEFAULT_INTERVALS: [&str; 2] = ["-1..1", "1..inf"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Kac–Rice quadrature rows.
    Compute,
    /// Monte Carlo rows.
    Simulate,
    /// Quadrature and Monte Carlo side by side, with z-scores.
    Compare,
    /// Quadrature over a degree sweep plus a log-slope fit per region.
    Sweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "levelcross", version, about = "Expected level crossings of random polynomials")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandArgs,
}

#[derive(Debug, Subcommand)]
pub enum CommandArgs {
    Compute(Flags),
    Simulate(Flags),
    Compare(Flags),
    Sweep(Flags),
}

impl CommandArgs {
    fn split(self) -> (Command, Flags) {
        match self {
            CommandArgs::Compute(f) => (Command::Compute, f),
            CommandArgs::Simulate(f) => (Command::Simulate, f),
            CommandArgs::Compare(f) => (Command::Compare, f),
            CommandArgs::Sweep(f) => (Command::Sweep, f),
        }
    }
}

/// Flags shared by every subcommand; each overrides the config file.
#[derive(Debug, Default, Args)]
pub struct Flags {
    /// Degree: `50`, `10,50,200` or `128:8192:x2`.
    #[arg(long)]
    pub n: Option<String>,
    /// `independent`, `geometric:RHO`, `raised_cosine[:A]`, `constant:RHO`,
    /// `custom_fourier:G0,G1,...`.
    #[arg(long)]
    pub model: Option<String>,
    /// Fixed level K.
    #[arg(long, allow_hyphen_values = true)]
    pub k: Option<f64>,
    /// `fixed:K` or `growing:SCALE,DECAY` for K(n) = SCALE·√(n/ln ln n)/(ln n)^DECAY.
    #[arg(long)]
    pub k_rule: Option<String>,
    /// `a..b` (half-open, `-inf`/`inf` allowed) or `outer`; repeatable.
    #[arg(long, allow_hyphen_values = true)]
    pub interval: Vec<String>,
    /// Absolute quadrature tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Monte Carlo samples.
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file (stdout when absent).
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Raw per-sample counts (`.bin` for little-endian u32, else CSV);
    /// single degree and interval only.
    #[arg(long)]
    pub samples_out: Option<PathBuf>,
    /// JSON file with the same field names.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
enum DegreeField {
    One(usize),
    Many(Vec<usize>),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
enum ModelField {
    Text(String),
    Spec(ModelSpec),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
enum IntervalField {
    One(String),
    Many(Vec<String>),
}

/// Contents of a `--config` file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    n: Option<DegreeField>,
    model: Option<ModelField>,
    k: Option<f64>,
    k_rule: Option<String>,
    interval: Option<IntervalField>,
    tol: Option<f64>,
    count: Option<usize>,
    seed: Option<u64>,
    format: Option<Format>,
    output: Option<PathBuf>,
    samples_out: Option<PathBuf>,
}

/// A validated run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub degrees: Vec<usize>,
    pub model: ModelSpec,
    pub k_rule: KRule,
    pub regions: Vec<Region>,
    pub tol: f64,
    pub count: usize,
    pub seed: u64,
    pub format: Format,
    pub output: Option<PathBuf>,
    pub samples_out: Option<PathBuf>,
}

/// `50`, `10,50,200` or `start:stop:x2`.
pub fn parse_degrees(s: &str) -> Result<Vec<usize>> {
    let bad = |reason: String| Error::param("n", reason);
    let s = s.trim();
    let out: Vec<usize> = if let Some((range, step)) = s.rsplit_once(":x") {
        let (start, stop) = range
            .split_once(':')
            .ok_or_else(|| bad(format!("expected start:stop:xF, got `{s}`")))?;
        let start: usize = start.trim().parse().map_err(|e| bad(format!("{e}")))?;
        let stop: usize = stop.trim().parse().map_err(|e| bad(format!("{e}")))?;
        let factor: usize = step.trim().parse().map_err(|e| bad(format!("{e}")))?;
        if start == 0 || factor < 2 || stop < start {
            return Err(bad(format!("invalid sweep `{s}`")));
        }
        let mut v = vec![start];
        while let Some(next) = v.last().unwrap().checked_mul(factor).filter(|&x| x <= stop) {
            v.push(next);
        }
        v
    } else {
        s.split(',')
            .map(|t| t.trim().parse::<usize>().map_err(|e| bad(format!("`{t}`: {e}"))))
            .collect::<Result<_>>()?
    };
    if out.is_empty() || out.contains(&0) {
        return Err(bad("degrees must be positive".into()));
    }
    Ok(out)
}

fn parse_k_rule(s: &str) -> Result<KRule> {
    let bad = |reason: &str| Error::param("k_rule", format!("{reason} (got `{s}`)"));
    let (name, arg) = s.split_once(':').ok_or_else(|| bad("expected fixed:K or growing:SCALE,DECAY"))?;
    match name.trim() {
        "fixed" => Ok(KRule::Fixed(arg.trim().parse().map_err(|_| bad("K is not a number"))?)),
        "growing" => {
            let (scale, decay) = arg.split_once(',').ok_or_else(|| bad("expected SCALE,DECAY"))?;
            Ok(KRule::Growing {
                scale: scale.trim().parse().map_err(|_| bad("SCALE is not a number"))?,
                decay: decay.trim().parse().map_err(|_| bad("DECAY is not a number"))?,
            })
        }
        _ => Err(bad("unknown rule")),
    }
}

impl RunConfig {
    /// Merges flags over an optional config file and validates the result.
    pub fn resolve(command: Command, flags: Flags) -> Result<Self> {
        let file = match &flags.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::param("config", format!("{}: {e}", path.display())))?;
                serde_json::from_str::<FileConfig>(&text).map_err(|e| Error::param("config", e.to_string()))?
            }
            None => FileConfig::default(),
        };

        let degrees = match (flags.n, file.n) {
            (Some(s), _) | (None, Some(DegreeField::Text(s))) => parse_degrees(&s)?,
            (None, Some(DegreeField::One(n))) => parse_degrees(&n.to_string())?,
            (None, Some(DegreeField::Many(v))) => {
                let s: Vec<String> = v.iter().map(|n| n.to_string()).collect();
                parse_degrees(&s.join(","))?
            }
            (None, None) => return Err(Error::param("n", "required")),
        };
        let model = match (flags.model, file.model) {
            (Some(s), _) | (None, Some(ModelField::Text(s))) => s.parse()?,
            (None, Some(ModelField::Spec(m))) => m,
            (None, None) => return Err(Error::param("model", "required")),
        };
        let k_rule = match (flags.k, flags.k_rule, file.k, file.k_rule) {
            (Some(_), Some(_), _, _) => return Err(Error::param("k", "give either --k or --k-rule")),
            (Some(k), None, _, _) => KRule::Fixed(k),
            (None, Some(r), _, _) => parse_k_rule(&r)?,
            (None, None, Some(_), Some(_)) => return Err(Error::param("k", "give either k or k_rule")),
            (None, None, Some(k), None) => KRule::Fixed(k),
            (None, None, None, Some(r)) => parse_k_rule(&r)?,
            (None, None, None, None) => KRule::Fixed(0.0),
        };
        if let KRule::Fixed(k) = k_rule {
            if !k.is_finite() {
                return Err(Error::param("k", "must be finite"));
            }
        }
        let intervals: Vec<String> = if !flags.interval.is_empty() {
            flags.interval
        } else {
            match file.interval {
                Some(IntervalField::One(s)) => vec![s],
                Some(IntervalField::Many(v)) => v,
                None => DEFAULT_INTERVALS.iter().map(|s| s.to_string()).collect(),
            }
        };
        let regions = intervals
            .iter()
            .map(|s| Region::from_str(s).map_err(|e| Error::param("interval", format!("`{s}`: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        if regions.is_empty() {
            return Err(Error::param("interval", "at least one interval is required"));
        }
        let tol = flags.tol.or(file.tol).unwrap_or(DEFAULT_TOL);
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(Error::param("tol", "must be positive"));
        }
        let count = flags.count.or(file.count).unwrap_or(DEFAULT_COUNT);
        if count < crate::montecarlo::MIN_SAMPLES {
            return Err(Error::param(
                "count",
                format!("need at least {} samples", crate::montecarlo::MIN_SAMPLES),
            ));
        }
        let samples_out = flags.samples_out.or(file.samples_out);
        if samples_out.is_some() && (degrees.len() != 1 || regions.len() != 1) {
            return Err(Error::param("samples_out", "needs a single degree and a single interval"));
        }
        if command == Command::Sweep && degrees.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::param("n", "sweep degrees must be strictly ascending"));
        }
        // model-level validation up front, so bad parameters name their field
        let built = model.build()?;
        if matches!(command, Command::Compute | Command::Compare | Command::Sweep) && !built.admits_density() {
            return Err(Error::param(
                "model",
                "constant covariance has no spectral density; use `simulate`",
            ));
        }
        Ok(RunConfig {
            command,
            degrees,
            model,
            k_rule,
            regions,
            tol,
            count,
            seed: flags.seed.or(file.seed).unwrap_or(0),
            format: flags.format.or(file.format).unwrap_or_default(),
            output: flags.output.or(file.output),
            samples_out,
        })
    }
}

/// One output row. Optional fields print empty in CSV and `null` in JSON.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub n: usize,
    #[serde(rename = "K")]
    pub k: f64,
    pub model: String,
    pub interval_lo: String,
    pub interval_hi: String,
    pub method: String,
    pub value: Option<f64>,
    pub err: Option<f64>,
    pub f1_part: Option<f64>,
    pub f2_part: Option<f64>,
    pub prediction: Option<f64>,
    pub ratio: Option<f64>,
    pub z_score: Option<f64>,
    pub flagged: bool,
}

pub const CSV_HEADER: &str =
    "n,K,model,interval_lo,interval_hi,method,value,err,f1_part,f2_part,prediction,ratio,z_score,flagged";

/// `x` with 17 significant digits.
pub fn format_float(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..17).contains(&exp) {
        format!("{:.*}", (16 - exp) as usize, x)
    } else {
        format!("{x:.16e}")
    }
}

fn opt(x: Option<f64>) -> String {
    x.filter(|v| v.is_finite()).map(format_float).unwrap_or_default()
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl Record {
    pub fn csv_line(&self) -> String {
        [
            self.n.to_string(),
            format_float(self.k),
            csv_field(&self.model),
            self.interval_lo.clone(),
            self.interval_hi.clone(),
            self.method.clone(),
            opt(self.value),
            opt(self.err),
            opt(self.f1_part),
            opt(self.f2_part),
            opt(self.prediction),
            opt(self.ratio),
            opt(self.z_score),
            self.flagged.to_string(),
        ]
        .join(",")
    }
}

fn write_records<W: Write>(records: &[Record], format: Format, mut w: W) -> io::Result<()> {
    match format {
        Format::Csv => {
            writeln!(w, "{CSV_HEADER}")?;
            for r in records {
                writeln!(w, "{}", r.csv_line())?;
            }
        }
        Format::Json => {
            // NaN/∞ have no JSON form; they print as null like absent values
            let clean: Vec<Record> = records
                .iter()
                .map(|r| {
                    let f = |x: Option<f64>| x.filter(|v| v.is_finite());
                    Record {
                        value: f(r.value),
                        err: f(r.err),
                        f1_part: f(r.f1_part),
                        f2_part: f(r.f2_part),
                        prediction: f(r.prediction),
                        ratio: f(r.ratio),
                        z_score: f(r.z_score),
                        ..r.clone()
                    }
                })
                .collect();
            serde_json::to_writer_pretty(&mut w, &clean)?;
            writeln!(w)?;
        }
    }
    w.flush()
}

/// Rows produced by a run, and whether any numeric step failed.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub records: Vec<Record>,
    pub failures: Vec<String>,
}

struct Row<'a> {
    n: usize,
    k: f64,
    model: &'a str,
    region: &'a Region,
}

impl Row<'_> {
    fn record(&self, method: &str) -> Record {
        let (lo, hi) = self.region.bounds_label();
        Record {
            n: self.n,
            k: self.k,
            model: self.model.to_string(),
            interval_lo: lo,
            interval_hi: hi,
            method: method.to_string(),
            value: None,
            err: None,
            f1_part: None,
            f2_part: None,
            prediction: None,
            ratio: None,
            z_score: None,
            flagged: false,
        }
    }
}

fn ratio(value: Option<f64>, prediction: Option<f64>) -> Option<f64> {
    Some(value? / prediction?)
}

/// Executes a validated run, returning its rows.
pub fn run(config: &RunConfig) -> Result<RunReport> {
    let model: CovarianceModel = config.model.build()?;
    let label = config.model.to_string();
    let smoothness = model.smoothness();
    let mut records = Vec::new();
    let mut failures = Vec::new();

    for &n in &config.degrees {
        let k = config.k_rule.level(n);
        let e = PolynomialEnsemble::new(n, model.clone(), k)?;
        let quad_needed = config.command != Command::Simulate;
        let mc_needed = matches!(config.command, Command::Simulate | Command::Compare);

        let sim = if mc_needed {
            match simulate_counts(&e, &config.regions, config.count, config.seed, RootMethod::Auto) {
                Ok(s) => {
                    if let Some(path) = &config.samples_out {
                        write_samples(&s, path)?;
                    }
                    Some(s)
                }
                Err(err) => {
                    failures.push(format!("n={n}: monte carlo: {err}"));
                    None
                }
            }
        } else {
            None
        };

        for (i, region) in config.regions.iter().enumerate() {
            let row = Row { n, k, model: &label, region };
            let prediction = region_prediction(n, k, smoothness, region);
            let mut quad_value = None;
            if quad_needed {
                let mut r = row.record(&Method::KacRice.to_string());
                match expected_crossings_region(&e, region, config.tol) {
                    Ok(est) => {
                        r.value = Some(est.value);
                        r.err = Some(est.abs_err);
                        r.f1_part = Some(est.f1_part());
                        r.f2_part = Some(est.f2_part());
                        r.flagged = est.flagged;
                        quad_value = Some(est.value);
                    }
                    Err(err) => {
                        failures.push(format!("n={n} {region}: quadrature: {err}"));
                        r.flagged = true;
                    }
                }
                r.prediction = prediction;
                r.ratio = ratio(r.value, prediction);
                records.push(r);
            }
            if mc_needed {
                let mut r = row.record(&Method::MonteCarlo.to_string());
                match &sim {
                    Some(s) => {
                        let m = s.estimate(i);
                        r.value = Some(m.mean);
                        r.err = Some(m.std_error);
                        r.flagged = m.flagged;
                        if let Some(q) = quad_value {
                            r.z_score = Some((m.mean - q) / m.std_error);
                        }
                    }
                    None => r.flagged = true,
                }
                r.prediction = prediction;
                r.ratio = ratio(r.value, prediction);
                records.push(r);
            }
        }
    }

    if config.command == Command::Sweep {
        records.extend(slope_records(config, &records, &label));
    }
    Ok(RunReport { records, failures })
}

/// One `slope_fit` row per region: slope of value against `ln n`, compared
/// with `1/π`.
fn slope_records(config: &RunConfig, rows: &[Record], label: &str) -> Vec<Record> {
    let mut out = Vec::new();
    for region in &config.regions {
        let (lo, hi) = region.bounds_label();
        let points: Vec<(usize, f64)> = rows
            .iter()
            .filter(|r| r.interval_lo == lo && r.interval_hi == hi)
            .filter_map(|r| Some((r.n, r.value?)))
            .collect();
        let row = Row {
            n: *config.degrees.last().unwrap(),
            k: config.k_rule.level(*config.degrees.last().unwrap()),
            model: label,
            region,
        };
        let mut r = row.record("slope_fit");
        let reference = std::f64::consts::FRAC_1_PI;
        match fit_log_slope_points(&points) {
            Ok(fit) => {
                r.value = Some(fit.slope);
                r.err = Some(fit.max_residual);
                r.prediction = Some(reference);
                r.ratio = Some(fit.slope / reference);
            }
            Err(_) => r.flagged = true,
        }
        out.push(r);
    }
    out
}

fn write_samples(s: &SampleCounts, path: &Path) -> Result<()> {
    let io_err = |e: io::Error| Error::param("samples_out", format!("{}: {e}", path.display()));
    let file = BufWriter::new(File::create(path).map_err(io_err)?);
    if path.extension().is_some_and(|e| e == "bin") {
        s.write_binary(0, file).map_err(io_err)
    } else {
        s.write_csv(0, file).map_err(io_err)
    }
}

fn init_threads() {
    if let Some(t) = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        // a second initialisation (e.g. in tests) is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
}

/// Parses `args`, runs, writes output; returns the process exit code
/// (0 ok, 1 numeric failure with partial output, 2 invalid configuration).
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    init_threads();
    let (command, flags) = cli.command.split();
    let config = match RunConfig::resolve(command, flags) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let report = match run(&config) {
        Ok(r) => r,
        Err(e @ Error::InvalidParameter { .. }) => {
            eprintln!("error: {e}");
            return 2;
        }
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let written = match &config.output {
        Some(path) => File::create(path)
            .and_then(|f| write_records(&report.records, config.format, BufWriter::new(f))),
        None => write_records(&report.records, config.format, io::stdout().lock()),
    };
    if let Err(e) = written {
        eprintln!("error: output: {e}");
        return 1;
    }
    for f in &report.failures {
        eprintln!("warning: {f}");
    }
    if report.failures.is_empty() {
        0
    } else {
        1
    }
}

pub fn main() -> i32 {
    main_with_args(std::env::args_os())
}
