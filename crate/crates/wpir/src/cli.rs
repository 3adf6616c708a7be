//! Command-line front end. [`run`] parses arguments, executes one
//! subcommand and returns the process exit code: 0 on success, 1 when a
//! verification or simulation fails or a file cannot be read or written, 2
//! on usage errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;
use wpir_core::capacity::{CurveKind, CurveSpec};
use wpir_core::metrics::LeakageReport;
use wpir_core::prob::{self, Ratio};
use wpir_core::{Metric, Scheme};

use crate::database_io::{generate_database, read_database};
use crate::format::{fmt_f64, to_json_string};
use crate::kind::SchemeKind;
use crate::scheme_json::{scheme_from_json, scheme_to_json};
use crate::sim::{audit_leakage, run_trials, Requests};
use crate::tables;
use crate::verify::{self, OracleOptions, VerifyOptions, DEFAULT_ORACLE_TOL};

#[derive(Debug, Parser)]
#[command(name = "wpir", version, about = "Single-server weakly-private information retrieval toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Capacity curve as CSV or JSON.
    Curve(CurveArgs),
    /// Build a scheme, write it as JSON and print its tradeoff point.
    Scheme(SchemeArgs),
    /// Check the converse bounds at a list of download costs.
    Verify(VerifyArgs),
    /// Simulate retrievals and audit the observed queries.
    Simulate(SimulateArgs),
    /// Achievable (D, rho) pairs: breakpoints and time-sharing segments.
    Region(RegionArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MetricArg {
    Mi,
    Maxl,
    Ub,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct Output {
    /// Write here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Args)]
struct CurveArgs {
    #[arg(long = "files")]
    files: u64,
    #[arg(long, value_enum)]
    metric: MetricArg,
    /// Evenly spaced samples of rho_bar in [0, 1].
    #[arg(long, default_value_t = 101)]
    samples: usize,
    /// Leakage column in bits instead of rho_bar.
    #[arg(long)]
    bits: bool,
    /// Omit the extra breakpoint rows.
    #[arg(long)]
    no_breakpoints: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct SchemeArgs {
    #[arg(long = "files")]
    files: usize,
    /// weight:w, partition:eta[:w], mix:lambda:left:right or target:metric:rho
    #[arg(long)]
    kind: SchemeKind,
    /// Read the rho of a target kind as rho_bar in [0, 1].
    #[arg(long)]
    normalized: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long = "files")]
    files: u64,
    #[arg(long, value_enum)]
    metric: MetricArg,
    /// Download costs, e.g. `--d 3/2,2,2.5`.
    #[arg(long = "d", value_delimiter = ',', value_parser = parse_cost)]
    d: Vec<Ratio>,
    /// Check this many evenly spaced costs in [1, M].
    #[arg(long)]
    sweep: Option<u64>,
    /// Also run the exhaustive grid search (M <= 4).
    #[arg(long)]
    oracle: bool,
    #[arg(long, default_value_t = 24)]
    grid: u32,
    /// Largest accepted gap between the grid minimum and the bound, in bits.
    #[arg(long, default_value_t = DEFAULT_ORACLE_TOL)]
    oracle_tol: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Scheme JSON file.
    #[arg(long, conflicts_with = "kind")]
    scheme: Option<PathBuf>,
    #[arg(long = "files")]
    files: Option<usize>,
    #[arg(long)]
    kind: Option<SchemeKind>,
    /// Binary database file; generated from the seed when absent.
    #[arg(long, conflicts_with_all = ["beta", "alphabet"])]
    db: Option<PathBuf>,
    /// Symbols per file of a generated database.
    #[arg(long)]
    beta: Option<usize>,
    /// Alphabet size of a generated database.
    #[arg(long)]
    alphabet: Option<u32>,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// `uniform` or a comma-separated list of 1-based file indices.
    #[arg(long, default_value = "uniform")]
    requests: String,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct RegionArgs {
    #[arg(long = "files")]
    files: u64,
    /// Interior points per time-sharing segment.
    #[arg(long, default_value_t = 9)]
    points: usize,
    #[command(flatten)]
    output: Output,
}

fn parse_cost(s: &str) -> Result<Ratio, String> {
    prob::parse_ratio(s).map_err(|e| e.to_string())
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Failed(String),
}

fn usage(msg: impl std::fmt::Display) -> Failure {
    Failure::Usage(msg.to_string())
}

fn failed(msg: impl std::fmt::Display) -> Failure {
    Failure::Failed(msg.to_string())
}

/// Parses `args` (program name first) and runs the subcommand.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match cli.command {
        Command::Curve(a) => cmd_curve(a),
        Command::Scheme(a) => cmd_scheme(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Region(a) => cmd_region(a),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(Failure::Failed(msg)) => {
            eprintln!("error: {msg}");
            1
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| failed(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).and_then(|()| stdout.flush()).map_err(failed)
        }
    }
}

fn json_only(output: &Output) -> Result<(), Failure> {
    match output.format {
        Some(Format::Csv) => Err(usage("this subcommand writes JSON only")),
        _ => Ok(()),
    }
}

fn metric_of(m: MetricArg) -> Result<Metric, Failure> {
    match m {
        MetricArg::Mi => Ok(Metric::Mi),
        MetricArg::Maxl => Ok(Metric::MaxL),
        MetricArg::Ub => Err(usage("metric ub names a bound, not a leakage metric")),
    }
}

fn cmd_curve(a: CurveArgs) -> Result<i32, Failure> {
    let kind = match a.metric {
        MetricArg::Mi => CurveKind::Mi,
        MetricArg::Maxl => CurveKind::MaxL,
        MetricArg::Ub => CurveKind::UpperBound,
    };
    let spec = CurveSpec {
        num_files: a.files,
        kind,
        normalized: !a.bits,
        samples: a.samples,
        breakpoints: !a.no_breakpoints,
    };
    let points = tables::curve_points(&spec).map_err(usage)?;
    let text = match a.output.format.unwrap_or(Format::Csv) {
        Format::Csv => tables::curve_csv(&spec, &points),
        Format::Json => to_json_string(&tables::curve_json(&spec, &points)),
    };
    emit(a.output.out.as_deref(), &text)?;
    Ok(0)
}

fn build_scheme(files: usize, kind: &SchemeKind, normalized: bool) -> Result<Scheme, Failure> {
    let kind = match (kind, normalized) {
        (SchemeKind::Target { metric, rho }, true) => {
            if !(0.0..=1.0).contains(rho) {
                return Err(usage(format!("rho_bar {rho} outside [0, 1]")));
            }
            let bits = if files > 1 { rho * (files as f64).log2() } else { 0.0 };
            SchemeKind::Target { metric: *metric, rho: bits }
        }
        (k, _) => k.clone(),
    };
    kind.build(files).map_err(usage)
}

fn summary(scheme: &Scheme) -> Result<String, Failure> {
    let r = LeakageReport::of(scheme).map_err(failed)?;
    Ok(format!(
        "D = {}\nMI = {}\nMaxL = {}\nrate = {}\n",
        prob::format_ratio(&r.download_cost),
        fmt_f64(r.mi_bits),
        fmt_f64(r.maxl_bits),
        prob::format_ratio(&r.rate())
    ))
}

fn cmd_scheme(a: SchemeArgs) -> Result<i32, Failure> {
    json_only(&a.output)?;
    let scheme = build_scheme(a.files, &a.kind, a.normalized)?;
    let text = to_json_string(&scheme_to_json(&scheme));
    let summary = summary(&scheme)?;
    emit(a.output.out.as_deref(), &text)?;
    if a.output.out.is_some() {
        print!("{summary}");
    } else {
        eprint!("{summary}");
    }
    Ok(0)
}

fn cmd_verify(a: VerifyArgs) -> Result<i32, Failure> {
    json_only(&a.output)?;
    let metric = metric_of(a.metric)?;
    if a.files == 0 || a.files > wpir_core::MAX_FILES as u64 {
        return Err(usage(format!("--files must lie in [1, {}]", wpir_core::MAX_FILES)));
    }
    let mut costs = a.d.clone();
    if let Some(n) = a.sweep {
        if n == 0 {
            return Err(usage("--sweep needs at least one point"));
        }
        costs.extend(verify::sweep(a.files, n));
    }
    if costs.is_empty() {
        return Err(usage("give --d or --sweep"));
    }
    let opts = VerifyOptions {
        metric,
        oracle: a.oracle.then_some(OracleOptions { grid_steps: a.grid, tolerance: a.oracle_tol }),
        parallel: true,
    };
    let report = verify::verify(a.files, &costs, &opts).map_err(|e| match e {
        verify::VerifyError::Oracle(wpir_core::converse::OracleError::BudgetExceeded { .. }) => failed(e),
        e => usage(e),
    })?;
    emit(a.output.out.as_deref(), &to_json_string(&report.to_json()))?;
    match report.first_failure() {
        None => Ok(0),
        Some((d, check)) => {
            eprintln!("verify failed: M={} D={} check={check}", a.files, prob::format_ratio(d));
            Ok(1)
        }
    }
}

fn parse_requests(s: &str, num_files: usize) -> Result<Requests, Failure> {
    if s == "uniform" {
        return Ok(Requests::Uniform);
    }
    let files = s
        .split(',')
        .map(|f| match f.trim().parse::<usize>() {
            Ok(i) if (1..=num_files).contains(&i) => Ok(i - 1),
            _ => Err(usage(format!("request {f:?} is not a file index in [1, {num_files}]"))),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Requests::Fixed(files))
}

fn cmd_simulate(a: SimulateArgs) -> Result<i32, Failure> {
    json_only(&a.output)?;
    let scheme = match (&a.scheme, &a.kind) {
        (Some(path), _) => {
            let text = fs::read_to_string(path).map_err(|e| failed(format!("{}: {e}", path.display())))?;
            let scheme = scheme_from_json(&text).map_err(|e| failed(format!("{}: {e}", path.display())))?;
            if let Some(m) = a.files {
                if m != scheme.num_files() {
                    return Err(usage(format!("--files {m} but the scheme has {} files", scheme.num_files())));
                }
            }
            scheme
        }
        (None, Some(kind)) => {
            let files = a.files.ok_or_else(|| usage("--kind needs --files"))?;
            build_scheme(files, kind, false)?
        }
        (None, None) => return Err(usage("give --scheme or --kind")),
    };
    let db = match &a.db {
        Some(path) => read_database(path).map_err(failed)?,
        None => generate_database(scheme.num_files(), a.beta.unwrap_or(1), a.alphabet.unwrap_or(256), a.seed)
            .map_err(usage)?,
    };
    let requests = parse_requests(&a.requests, scheme.num_files())?;
    let report = run_trials(&scheme, &db, &requests, a.trials, a.seed, true).map_err(|e| match e {
        crate::sim::SimError::NoTrials => usage(e),
        e => failed(e),
    })?;
    let audit = audit_leakage(&report, &scheme);
    let mut out = report.to_json();
    let audit_ok = match &audit {
        Ok(v) => {
            out["audit"] = v.to_json();
            v.consistent
        }
        Err(e) => {
            out["audit"] = serde_json::json!({ "skipped": e.to_string() });
            true
        }
    };
    emit(a.output.out.as_deref(), &to_json_string(&out))?;
    if !report.all_retrieved() {
        eprintln!("simulate failed: {} of {} retrievals succeeded", report.success_count, report.trials);
        return Ok(1);
    }
    if !audit_ok {
        eprintln!("simulate failed: observed queries reject P(Q|M) at the {} level", crate::sim::AUDIT_LEVEL);
        return Ok(1);
    }
    Ok(0)
}

fn cmd_region(a: RegionArgs) -> Result<i32, Failure> {
    let rows = tables::region(a.files, a.points).map_err(usage)?;
    let text = match a.output.format.unwrap_or(Format::Csv) {
        Format::Csv => tables::region_csv(a.files, &rows),
        Format::Json => to_json_string(&tables::region_json(a.files, &rows)),
    };
    emit(a.output.out.as_deref(), &text)?;
    Ok(0)
}

/// Parsed JSON from a file written by one of the subcommands.
pub fn read_json(path: &Path) -> std::io::Result<Value> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(std::io::Error::other)
}
