//! Command-line front end: configuration, subcommands, and file output.
//!
//! Exit codes: 0 on any completed run (healed, stalled or undecided), 1 on
//! configuration or usage errors, 2 when time stepping fails.

use std::ffi::OsString;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::constitutive::{
    validate_homeostasis, DefaultKinetics, FieldId, Kinetics, Parameters, Verdict,
    RECONSTRUCTED_PARAMETERS,
};
use crate::diagnostics::{compare_runs, main_snapshots, oracle_dt, oracle_solve};
use crate::error::{Error, Result};
use crate::integrator::{run, Outcome, RunFailure, StepReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_STEP: i32 = 2;

/// Environment variable capping the sweep worker count.
pub const THREADS_ENV: &str = "ISCHEMIC_FBP_THREADS";

pub const SCHEME: &str = "front-fixing finite volume; minmod-limited upwind transport and taxis; \
backward-Euler diffusion with explicit transport and kinetics; explicit wound-edge update";

#[derive(Debug, Parser)]
#[command(name = "ischemic-fbp", version, about = "Ischemic wound-healing free-boundary simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one simulation and write run.csv, meta.json and optionally curve.svg.
    Run(RunArgs),
    /// Run one simulation per ischemia level.
    Sweep(SweepArgs),
    /// Bisect on the ischemia level separating healing from non-healing.
    FindGammaStar(BisectArgs),
    /// Check the homeostasis constraints and list placeholder parameters.
    ValidateParams(ConfigArgs),
    /// Compare the main solver against the explicit fine-grid reference.
    OracleCompare(OracleArgs),
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// JSON parameter file; defaults are used when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Overrides {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Simulated time horizon (overrides T_max).
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Number of grid cells (overrides N).
    #[arg(long)]
    pub cells: Option<usize>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: Overrides,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Also write curve.svg with R(t).
    #[arg(long)]
    pub svg: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Overrides,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Comma-separated ischemia levels.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    pub gammas: Vec<f64>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub svg: bool,
}

#[derive(Debug, Args)]
pub struct BisectArgs {
    #[command(flatten)]
    pub common: Overrides,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Bracket as `lo,hi`.
    #[arg(long, value_delimiter = ',', num_args = 2, default_values_t = [0.0, 1.0])]
    pub bracket: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    pub iters: u32,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 0.5)]
    pub horizon: f64,
    /// Main-path cells; the reference uses four times as many.
    #[arg(long, default_value_t = 50)]
    pub cells: usize,
}

/// Parse arguments, dispatch, and map the result to an exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(error: &Error) -> i32 {
    match error {
        Error::StepFailure { .. } | Error::NonFiniteState { .. } => EXIT_STEP,
        _ => EXIT_CONFIG,
    }
}

fn dispatch(command: Command) -> Result<i32> {
    match command {
        Command::Run(args) => cmd_run(&args),
        Command::Sweep(args) => cmd_sweep(&args).map(|_| EXIT_OK),
        Command::FindGammaStar(args) => cmd_find_gamma_star(&args).map(|_| EXIT_OK),
        Command::ValidateParams(args) => cmd_validate_params(&args).map(|_| EXIT_OK),
        Command::OracleCompare(args) => cmd_oracle_compare(&args).map(|_| EXIT_OK),
    }
}

/// Defaults, or the file contents if a path is given.
pub fn load_params(path: Option<&Path>) -> Result<Parameters> {
    match path {
        Some(path) => Parameters::load(path),
        None => Ok(Parameters::default()),
    }
}

fn resolve(common: &Overrides, gamma: Option<f64>) -> Result<Parameters> {
    let mut params = load_params(common.config.as_deref())?;
    if let Some(g) = gamma {
        params.gamma = g;
    }
    if let Some(h) = common.horizon {
        params.t_max = h;
    }
    if let Some(n) = common.cells {
        params.cells = n;
    }
    params.validate()?;
    Ok(params)
}

// ---------------------------------------------------------------- run.csv

/// Column names of run.csv.
pub fn run_header() -> Vec<String> {
    let mut header: Vec<String> = ["t", "R", "Q", "Rdot", "dt"].iter().map(|s| s.to_string()).collect();
    for id in FieldId::ALL {
        header.push(format!("min_{}", id.id()));
        header.push(format!("max_{}", id.id()));
        header.push(format!("I_{}", id.id()));
    }
    header
}

/// A parsed run.csv: header plus numeric rows.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl RunTable {
    pub fn from_reports(reports: &[StepReport]) -> Self {
        let rows = reports
            .iter()
            .map(|r| {
                let mut row = vec![r.t, r.r, r.q, r.rdot, r.dt];
                for id in FieldId::ALL {
                    row.extend([r.min[id], r.max[id], r.integral[id]]);
                }
                row
            })
            .collect();
        RunTable { header: run_header(), rows }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn write<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| format!("{v:e}")))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let header = r.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for record in r.records() {
            let record = record?;
            let row = record
                .iter()
                .map(|s| s.parse::<f64>().map_err(|e| Error::Usage(format!("bad number `{s}`: {e}"))))
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        Ok(RunTable { header, rows })
    }
}

// ---------------------------------------------------------------- svg

/// Minimal SVG polyline of `(x, y)` points.
pub fn svg_polyline(points: &[(f64, f64)], x_label: &str, y_label: &str) -> String {
    let (w, h, pad) = (640.0, 400.0, 48.0);
    let (x0, x1) = bounds(points.iter().map(|p| p.0));
    let (y0, y1) = bounds(points.iter().map(|p| p.1).chain([0.0]));
    let sx = |x: f64| pad + (x - x0) / (x1 - x0) * (w - 2.0 * pad);
    let sy = |y: f64| h - pad - (y - y0) / (y1 - y0) * (h - 2.0 * pad);
    let coords: Vec<String> = points.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n\
<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
<line x1=\"{pad}\" y1=\"{yb}\" x2=\"{xr}\" y2=\"{yb}\" stroke=\"black\"/>\n\
<line x1=\"{pad}\" y1=\"{pad}\" x2=\"{pad}\" y2=\"{yb}\" stroke=\"black\"/>\n\
<text x=\"{xm}\" y=\"{h2}\" text-anchor=\"middle\" font-size=\"12\">{x_label} [{x0:.3}, {x1:.3}]</text>\n\
<text x=\"12\" y=\"{ym}\" font-size=\"12\" transform=\"rotate(-90 12 {ym})\" text-anchor=\"middle\">{y_label} [{y0:.3}, {y1:.3}]</text>\n\
<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"{}\"/>\n</svg>\n",
        coords.join(" "),
        yb = h - pad,
        xr = w - pad,
        xm = w / 2.0,
        h2 = h - 12.0,
        ym = h / 2.0,
    )
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() || !hi.is_finite() {
        (0.0, 1.0)
    } else if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

// ---------------------------------------------------------------- meta.json

fn provenance_map(kinetics: &dyn Kinetics) -> serde_json::Value {
    let map: serde_json::Map<String, serde_json::Value> = FieldId::ALL
        .iter()
        .map(|&id| (id.id().to_string(), json!(kinetics.provenance(id))))
        .collect();
    serde_json::Value::Object(map)
}

fn meta_json(params: &Parameters, outcome: Option<&Outcome>, failure: Option<&str>, steps: usize) -> serde_json::Value {
    let effective = params.effective();
    json!({
        "params": effective,
        "reconstructed": {
            "parameters": RECONSTRUCTED_PARAMETERS,
            "kinetics": provenance_map(&DefaultKinetics),
        },
        "homeostasis": validate_homeostasis(params),
        "outcome": outcome,
        "failure": failure,
        "steps": steps,
        "scheme": SCHEME,
        "N": effective.cells,
        "dt_policy": {
            "rule": "min(cfl_safety * dxi / max face speed, cfl_safety / max kinetic rate, dt_max), halved on audit failure",
            "cfl_safety": effective.cfl_safety,
            "dt_max": effective.dt_max,
            "dt_min": effective.dt_min,
            "max_retries": effective.max_retries,
        },
        "tolerances": {
            "bound_slack": crate::integrator::BOUND_TOL,
            "strain_slack": crate::integrator::STRAIN_TOL,
            "monitor_checks": crate::diagnostics::CHECK_TOL,
            "closure_fraction": effective.closure_fraction,
            "stall_tol": effective.stall_tol,
            "q_tol": effective.q_tol,
            "stall_window": effective.stall_window,
            "asymptotic_checks": "final quartile of the simulated interval",
        },
    })
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn write_run_outputs(dir: &Path, params: &Parameters, series: &[StepReport], outcome: Option<&Outcome>, failure: Option<&str>, svg: bool) -> Result<()> {
    fs::create_dir_all(dir)?;
    RunTable::from_reports(series).write(fs::File::create(dir.join("run.csv"))?)?;
    write_json(&dir.join("meta.json"), &meta_json(params, outcome, failure, series.len().saturating_sub(1)))?;
    if svg {
        let points: Vec<(f64, f64)> = series.iter().map(|r| (r.t, r.r)).collect();
        fs::write(dir.join("curve.svg"), svg_polyline(&points, "t", "R"))?;
    }
    Ok(())
}

/// Run once and write the outputs; a stepping failure still writes the
/// partial series before the error is returned.
fn run_to_dir(params: &Parameters, dir: &Path, svg: bool) -> Result<(Outcome, Vec<StepReport>)> {
    match run(params, params.t_max) {
        Ok(result) => {
            write_run_outputs(dir, params, &result.series, Some(&result.outcome), None, svg)?;
            Ok((result.outcome, result.series))
        }
        Err(RunFailure { error, series }) => {
            let message = error.to_string();
            write_run_outputs(dir, params, &series, None, Some(&message), svg)?;
            Err(error)
        }
    }
}

pub fn cmd_run(args: &RunArgs) -> Result<i32> {
    let params = resolve(&args.common, args.gamma)?;
    let (outcome, series) = run_to_dir(&params, &args.out, args.svg)?;
    let last = series.last().expect("series holds the initial report");
    println!("outcome: {} (t = {}, R = {})", outcome.label(), last.t, last.r);
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------- sweep

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepEntry {
    pub gamma: f64,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub entries: Vec<SweepEntry>,
    /// No healed level above the smallest non-healed one.
    pub monotone: Verdict,
    /// Largest healed level below the smallest non-healed one, and that level.
    pub bracket: Option<(f64, f64)>,
}

/// Worker count after applying the environment cap.
pub fn worker_count(requested: Option<usize>) -> usize {
    let base = requested.unwrap_or_else(rayon::current_num_threads).max(1);
    match std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        Some(cap) if cap > 0 => base.min(cap),
        _ => base,
    }
}

fn check_gammas(gammas: &[f64]) -> Result<Vec<f64>> {
    if gammas.is_empty() {
        return Err(Error::Usage("empty gamma list".into()));
    }
    if let Some(&g) = gammas.iter().find(|g| !(0.0..=1.0).contains(*g)) {
        return Err(Error::InvalidParameter { name: "gamma", value: g, reason: "must lie in [0, 1]" });
    }
    let mut sorted = gammas.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    Ok(sorted)
}

pub fn summarize_sweep(entries: Vec<SweepEntry>) -> SweepResult {
    let first_fail = entries.iter().position(|e| !e.outcome.is_healed());
    let monotone = match first_fail {
        Some(k) if entries[k..].iter().any(|e| e.outcome.is_healed()) => Verdict::Warn,
        _ => Verdict::Pass,
    };
    let bracket = match first_fail {
        Some(k) if k > 0 => Some((entries[k - 1].gamma, entries[k].gamma)),
        _ => None,
    };
    SweepResult { entries, monotone, bracket }
}

/// Independent runs per level on a pool of `workers` threads, ordered by gamma.
pub fn sweep(params: &Parameters, gammas: &[f64], workers: usize) -> Result<SweepResult> {
    sweep_with(params, gammas, workers, |p| run(p, p.t_max).map(|r| r.outcome).map_err(|f| f.error))
}

fn sweep_with(
    params: &Parameters,
    gammas: &[f64],
    workers: usize,
    runner: impl Fn(&Parameters) -> Result<Outcome> + Sync,
) -> Result<SweepResult> {
    let gammas = check_gammas(gammas)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Usage(e.to_string()))?;
    let outcomes: Vec<Result<Outcome>> = pool.install(|| {
        gammas
            .par_iter()
            .map(|&g| runner(&Parameters { gamma: g, ..params.clone() }))
            .collect()
    });
    let entries = gammas
        .iter()
        .zip(outcomes)
        .map(|(&gamma, o)| o.map(|outcome| SweepEntry { gamma, outcome }))
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize_sweep(entries))
}

pub fn write_sweep_csv<W: Write>(result: &SweepResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["gamma", "outcome", "t_heal", "R_inf", "t_end"])?;
    for e in &result.entries {
        let (t_heal, r_inf, t_end) = match e.outcome {
            Outcome::Healed { t_heal } => (format!("{t_heal:e}"), String::new(), format!("{t_heal:e}")),
            Outcome::Stalled { r_inf, t_stall } => (String::new(), format!("{r_inf:e}"), format!("{t_stall:e}")),
            Outcome::Undecided { t_max } => (String::new(), String::new(), format!("{t_max:e}")),
        };
        w.write_record([format!("{:e}", e.gamma), e.outcome.label().to_string(), t_heal, r_inf, t_end])?;
    }
    w.flush()?;
    Ok(())
}

fn gamma_dir(out: &Path, gamma: f64) -> PathBuf {
    out.join(format!("gamma_{gamma:.4}"))
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<SweepResult> {
    let params = resolve(&args.common, None)?;
    check_gammas(&args.gammas)?;
    fs::create_dir_all(&args.out)?;
    let result = sweep_with(&params, &args.gammas, worker_count(args.workers), |p| {
        run_to_dir(p, &gamma_dir(&args.out, p.gamma), args.svg).map(|(o, _)| o)
    })?;
    write_sweep_csv(&result, fs::File::create(args.out.join("sweep.csv"))?)?;
    write_json(&args.out.join("sweep.json"), &result)?;
    for e in &result.entries {
        println!("gamma {:<6} {}", e.gamma, e.outcome.label());
    }
    let verdict = if result.monotone == Verdict::Pass { "pass" } else { "warn" };
    println!("monotonicity: {verdict}");
    if let Some((lo, hi)) = result.bracket {
        println!("threshold bracket: [{lo}, {hi}]");
    }
    Ok(result)
}

// ---------------------------------------------------------------- bisection

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bisection {
    pub lo: f64,
    pub hi: f64,
    pub estimate: f64,
    pub half_width: f64,
    /// Every evaluated point with its classification, in evaluation order.
    pub trace: Vec<(f64, bool)>,
}

/// Bisect on a two-valued classification. Each iteration evaluates the
/// midpoint and keeps the half whose ends still disagree, so after `iters`
/// iterations the midpoint estimate is within `(hi - lo) / 2^(iters + 1)`.
pub fn bisect_threshold(
    lo: f64,
    hi: f64,
    iters: u32,
    mut classify: impl FnMut(f64) -> Result<bool>,
) -> Result<Bisection> {
    let (mut a, mut b) = (lo, hi);
    let class_a = classify(a)?;
    let class_b = classify(b)?;
    let mut trace = vec![(a, class_a), (b, class_b)];
    if class_a == class_b {
        return Err(Error::NoBracket { lo, hi });
    }
    for _ in 0..iters {
        let mid = 0.5 * (a + b);
        let c = classify(mid)?;
        trace.push((mid, c));
        if c == class_a {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(Bisection { lo: a, hi: b, estimate: 0.5 * (a + b), half_width: 0.5 * (b - a), trace })
}

pub fn find_gamma_star(params: &Parameters, lo: f64, hi: f64, iters: u32) -> Result<Bisection> {
    check_gammas(&[lo, hi])?;
    if lo >= hi {
        return Err(Error::Usage(format!("bracket must satisfy lo < hi, got [{lo}, {hi}]")));
    }
    bisect_threshold(lo, hi, iters, |g| {
        let p = Parameters { gamma: g, ..params.clone() };
        run(&p, p.t_max).map(|r| r.outcome.is_healed()).map_err(|f| f.error)
    })
}

pub fn cmd_find_gamma_star(args: &BisectArgs) -> Result<Bisection> {
    let params = resolve(&args.common, None)?;
    let [lo, hi] = args.bracket[..] else {
        return Err(Error::Usage("--bracket takes exactly two values".into()));
    };
    let result = find_gamma_star(&params, lo, hi, args.iters)?;
    for (g, healed) in &result.trace {
        println!("gamma {g:<22} {}", if *healed { "healed" } else { "not healed" });
    }
    println!("gamma* = {} +/- {}", result.estimate, result.half_width);
    if let Some(out) = &args.out {
        fs::create_dir_all(out)?;
        let mut w = csv::Writer::from_path(out.join("bisection.csv"))?;
        w.write_record(["gamma", "healed"])?;
        for (g, healed) in &result.trace {
            w.write_record([format!("{g:e}"), healed.to_string()])?;
        }
        w.flush()?;
        write_json(&out.join("bisection.json"), &result)?;
    }
    Ok(result)
}

// ---------------------------------------------------------------- validate-params

pub fn validation_report(params: &Parameters) -> String {
    let mut s = String::new();
    s.push_str(&format!("{:<52} {:>12} {:>12} {:>10}  verdict\n", "constraint", "listed", "implied", "residual"));
    for c in validate_homeostasis(params) {
        let verdict = match c.verdict {
            Verdict::Pass => "pass",
            Verdict::Warn => "WARN",
        };
        s.push_str(&format!(
            "{:<52} {:>12.6} {:>12.6} {:>10.3e}  {verdict}\n",
            c.constraint, c.listed, c.implied, c.residual
        ));
    }
    if params.enforce_homeostasis {
        let e = params.effective();
        s.push_str("\nenforce_homeostasis is on; simulation uses\n");
        s.push_str(&format!("  lambda_rho = {}\n  k_w = {}\n  k_f = {}\n", e.lambda_rho, e.k_w, e.k_f));
    }
    s.push_str("\nplaceholder parameters:\n");
    let values = serde_json::to_value(params).unwrap_or_default();
    for name in RECONSTRUCTED_PARAMETERS {
        s.push_str(&format!("  {name} = {}\n", values.get(name).cloned().unwrap_or_default()));
    }
    s.push_str("\nkinetic terms:\n");
    for id in FieldId::ALL {
        s.push_str(&format!("  {:<4} {:?}\n", id.id(), DefaultKinetics.provenance(id)));
    }
    s
}

pub fn cmd_validate_params(args: &ConfigArgs) -> Result<()> {
    let params = load_params(args.config.as_deref())?;
    print!("{}", validation_report(&params));
    Ok(())
}

// ---------------------------------------------------------------- oracle-compare

pub fn cmd_oracle_compare(args: &OracleArgs) -> Result<()> {
    let mut params = load_params(args.config.as_deref())?;
    params.cells = args.cells;
    params.validate()?;
    if !(args.horizon > 0.0) {
        return Err(Error::Usage("--horizon must be positive".into()));
    }
    let times: Vec<f64> = (1..=4).map(|k| args.horizon * k as f64 / 4.0).collect();
    let main = main_snapshots(&params, &times)?;
    let fine = 4 * args.cells;
    let dt = oracle_dt(&params, fine)?;
    let reference = oracle_solve(&params, fine, dt, &times)?;
    let d = compare_runs(&main, &reference, &FieldId::ALL);
    println!("reference: {fine} cells, dt = {dt:e}");
    println!("R        {:.3e}", d.r);
    for id in FieldId::ALL {
        println!("{:<8} {:.3e}", id.id(), d.fields[id]);
    }
    if let Some(out) = &args.out {
        fs::create_dir_all(out)?;
        write_json(&out.join("oracle.json"), &json!({ "cells": args.cells, "reference_cells": fine, "reference_dt": dt, "times": times, "discrepancy": d }))?;
    }
    Ok(())
}
