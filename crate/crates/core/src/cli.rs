//! Run configs, command dispatch and report emission behind the `cfactor`
//! binary.
//!
//! Every report is wrapped as `{"metadata": {...}, "report": {...}}`. Only
//! `metadata` may differ between two runs of the same config and seed.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::asymptotics::coverage_vs_n;
use crate::calibration::{exact_calibration_residual, run_coverage, sweep_csv, CalibrationSpec, CoverageReport, IntervalMethod};
use crate::config::{build_pair, FamilyConfig};
use crate::consistency::{FactorKind, FactorizationScan};
use crate::error::{Error, Result};
use crate::families::{FamilyRef, Sample};
use crate::grid::{AutoGrid, GridSpec, PlacementInfo};
use crate::posterior::{assign, credible_interval, marginalize, update, PosteriorDensity};
use crate::selfcheck::{self, SelfCheckReport, Timing};

pub const WORKERS_ENV: &str = "CFACTOR_WORKERS";
pub const DEFAULT_DELTA: f64 = 0.683;
pub const DEFAULT_TRIALS: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Assign,
    Interval,
    Update,
    Calibrate,
    FactorScan,
    Asymptotics,
    Residual,
    SelfCheck,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Assign => "assign",
            Command::Interval => "interval",
            Command::Update => "update",
            Command::Calibrate => "calibrate",
            Command::FactorScan => "factor-scan",
            Command::Asymptotics => "asymptotics",
            Command::Residual => "residual",
            Command::SelfCheck => "self-check",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Option<Format>,
}

/// A JSON run config. Fields a command does not use are ignored by it, but
/// unknown keys are rejected at parse time.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub command: Option<Command>,
    #[serde(default)]
    pub family: Option<FamilyConfig>,
    #[serde(default)]
    pub factor: Option<FactorKind>,
    /// Observations for `assign`, `interval`, `update`, `factor-scan`, and the
    /// data points of `residual`.
    #[serde(default)]
    pub sample: Vec<f64>,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub grid: AutoGrid,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub trials: Option<usize>,
    #[serde(default)]
    pub true_value: Option<Vec<f64>>,
    #[serde(default)]
    pub sweep: Vec<Vec<f64>>,
    /// Observations per simulated trial.
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub n_list: Vec<usize>,
    #[serde(default)]
    pub method: Option<IntervalMethod>,
    #[serde(default)]
    pub target: Option<usize>,
    #[serde(default)]
    pub q: Vec<f64>,
    #[serde(default)]
    pub r: Vec<f64>,
    #[serde(default)]
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::validation("config", e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::validation("config", format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Resolves the command named by the CLI against the config's own.
    pub fn resolve_command(&self, cli: Option<Command>) -> Result<Command> {
        match (cli, self.command) {
            (Some(a), Some(b)) if a != b => Err(Error::validation(
                "command",
                format!("config says `{}` but `{}` was requested", b.name(), a.name()),
            )),
            (Some(a), _) => Ok(a),
            (None, Some(b)) => Ok(b),
            (None, None) => Err(Error::validation("command", "no command given")),
        }
    }

    fn family(&self) -> Result<&FamilyConfig> {
        self.family.as_ref().ok_or_else(|| Error::validation("family", "required"))
    }

    fn factor(&self) -> Result<&FactorKind> {
        self.factor.as_ref().ok_or_else(|| Error::validation("factor", "required"))
    }

    fn delta(&self) -> Result<f64> {
        let d = self.delta.unwrap_or(DEFAULT_DELTA);
        if d > 0.0 && d < 1.0 {
            Ok(d)
        } else {
            Err(Error::validation("delta", format!("{d} is not in (0, 1)")))
        }
    }

    fn sample(&self, family: &FamilyRef) -> Result<Sample> {
        if self.sample.is_empty() {
            return Err(Error::validation("sample", "must hold at least one value"));
        }
        Sample::new(family.as_ref(), self.sample.clone()).map_err(|e| Error::validation("sample", e.to_string()))
    }

    fn grid_spec(&self) -> GridSpec {
        GridSpec::Auto(self.grid.clone())
    }

    /// Calibration spec built from the config's simulation fields.
    pub fn calibration_spec(&self) -> Result<CalibrationSpec> {
        let true_value = match (&self.true_value, self.sweep.first()) {
            (Some(t), _) => t.clone(),
            (None, Some(first)) => first.clone(),
            (None, None) => return Err(Error::validation("true_value", "required unless `sweep` is given")),
        };
        let mut spec = CalibrationSpec::new(self.family()?.clone(), self.factor.clone(), true_value);
        spec.sweep = self.sweep.clone();
        spec.n = self.n.unwrap_or(1);
        spec.delta = self.delta.unwrap_or(DEFAULT_DELTA);
        spec.trials = self.trials.unwrap_or(DEFAULT_TRIALS);
        spec.seed = self.seed.unwrap_or(0);
        spec.target = self.target.unwrap_or(0);
        spec.method = self.method.unwrap_or_default();
        spec.grid = self.grid.clone();
        spec.validate()?;
        Ok(spec)
    }
}

/// A finished command: the report body, an optional CSV table, and
/// wall-clock timings (run-dependent, so kept out of the report).
#[derive(Debug)]
pub struct Outcome {
    pub report: Value,
    pub csv: Option<String>,
    pub timings: Option<Vec<Timing>>,
    /// Exit status for a run that completed but whose verdict failed.
    pub status: i32,
}

impl Outcome {
    fn new(report: impl Serialize, csv: Option<String>) -> Result<Self> {
        Ok(Outcome {
            report: serde_json::to_value(report)?,
            csv,
            timings: None,
            status: 0,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedInterval {
    pub parameter: String,
    pub lo: f64,
    pub hi: f64,
    pub level: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Diagnostics {
    pub mass: f64,
    pub mode: Vec<f64>,
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
    pub edge_ratio: f64,
    pub placement: PlacementInfo,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PosteriorReport {
    pub family: String,
    pub factor: String,
    pub sample: Vec<f64>,
    pub parameters: Vec<String>,
    /// Nodes per axis.
    pub nodes: Vec<Vec<f64>>,
    /// Density at each node, row-major over the axes.
    pub values: Vec<f64>,
    pub interval: Vec<NamedInterval>,
    pub diagnostics: Diagnostics,
    /// L1 distance from the batch posterior on the same grid (`update` only).
    #[serde(skip_serializing_if = "Option::is_none")]
    batch_l1: Option<f64>,
}

fn intervals(post: &PosteriorDensity, names: &[String], delta: f64) -> Result<Vec<NamedInterval>> {
    let marginals: Vec<PosteriorDensity> = if post.dims() == 1 {
        vec![post.clone()]
    } else {
        vec![marginalize(post, 1)?, marginalize(post, 0)?]
    };
    marginals
        .iter()
        .zip(names)
        .map(|(m, name)| {
            let ci = credible_interval(m, delta)?;
            Ok(NamedInterval {
                parameter: name.clone(),
                lo: ci.lo,
                hi: ci.hi,
                level: ci.level,
            })
        })
        .collect()
}

fn posterior_report(
    family: &FamilyRef,
    factor: &str,
    sample: &Sample,
    post: &PosteriorDensity,
    delta: f64,
    batch_l1: Option<f64>,
) -> Result<PosteriorReport> {
    let parameters: Vec<String> = family.params().iter().map(|p| p.name.clone()).collect();
    Ok(PosteriorReport {
        family: family.id().to_owned(),
        factor: factor.to_owned(),
        sample: sample.values.clone(),
        interval: intervals(post, &parameters, delta)?,
        parameters,
        nodes: post.grid().axes().iter().map(|a| a.nodes().to_vec()).collect(),
        values: post.values().to_vec(),
        diagnostics: Diagnostics {
            mass: post.mass(),
            mode: post.mode(),
            mean: post.mean(),
            sd: post.sd(),
            edge_ratio: post.edge_ratio(),
            placement: post.placement().clone(),
        },
        batch_l1,
    })
}

/// Shortest round-trip form, with an exponent for very small or large values.
fn num(x: f64) -> String {
    format!("{x:?}")
}

fn csv_error(e: impl std::fmt::Display) -> Error {
    Error::InvalidInput(format!("csv: {e}"))
}

fn csv_table(header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(csv_error)?;
    for row in rows {
        w.write_record(&row).map_err(csv_error)?;
    }
    let bytes = w.into_inner().map_err(csv_error)?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn density_csv(report: &PosteriorReport) -> Result<String> {
    let mut header = report.parameters.clone();
    header.push("density".into());
    let rows: Vec<Vec<String>> = match report.nodes.as_slice() {
        [a] => a
            .iter()
            .zip(&report.values)
            .map(|(x, v)| vec![num(*x), num(*v)])
            .collect(),
        [a, b] => a
            .iter()
            .flat_map(|x| b.iter().map(move |y| (x, y)))
            .zip(&report.values)
            .map(|((x, y), v)| vec![num(*x), num(*y), num(*v)])
            .collect(),
        _ => unreachable!("posteriors are 1-d or 2-d"),
    };
    csv_table(&header, rows)
}

fn interval_csv(report: &PosteriorReport) -> Result<String> {
    let header = ["parameter", "lo", "hi", "level"].map(String::from);
    csv_table(
        &header,
        report
            .interval
            .iter()
            .map(|i| vec![i.parameter.clone(), num(i.lo), num(i.hi), num(i.level)]),
    )
}

fn run_assign(cfg: &RunConfig, for_interval: bool) -> Result<Outcome> {
    let delta = cfg.delta()?;
    let (family, factor) = build_pair(cfg.family()?, cfg.factor()?)?;
    let sample = cfg.sample(&family)?;
    let post = assign(family.as_ref(), &factor, &sample, &cfg.grid_spec())?;
    let report = posterior_report(&family, factor.label(), &sample, &post, delta, None)?;
    let csv = if for_interval {
        interval_csv(&report)?
    } else {
        density_csv(&report)?
    };
    Outcome::new(report, Some(csv))
}

/// Assigns from the first observation, then updates with the rest in order.
fn run_update(cfg: &RunConfig) -> Result<Outcome> {
    let delta = cfg.delta()?;
    let (family, factor) = build_pair(cfg.family()?, cfg.factor()?)?;
    let sample = cfg.sample(&family)?;
    let first = Sample::new(family.as_ref(), vec![sample.values[0]])?;
    // The final grid is placed from the full sample so that early,
    // wide posteriors are not truncated by a grid fitted to one datum.
    let batch = assign(family.as_ref(), &factor, &sample, &cfg.grid_spec())?;
    let grid = GridSpec::Explicit(batch.grid().clone());
    let mut post = assign(family.as_ref(), &factor, &first, &grid)?;
    for &x in &sample.values[1..] {
        post = update(&post, family.as_ref(), x)?;
    }
    let post = post.with_placement(batch.placement().clone());
    let l1 = post.l1_distance(&batch)?;
    let report = posterior_report(&family, factor.label(), &sample, &post, delta, Some(l1))?;
    let csv = density_csv(&report)?;
    Outcome::new(report, Some(csv))
}

fn run_calibrate(cfg: &RunConfig) -> Result<Outcome> {
    let spec = cfg.calibration_spec()?;
    let report = run_coverage(&spec)?;
    let csv = sweep_csv(&report)?;
    Outcome::new(report, Some(csv))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanReport {
    pub family: String,
    pub sample: Vec<f64>,
    pub q: Vec<f64>,
    pub r: Vec<f64>,
    /// `discrepancy[i][j]` at `(q[i], r[j])`.
    pub discrepancy: Vec<Vec<f64>>,
    pub grid_nodes: Vec<usize>,
}

fn run_factor_scan(cfg: &RunConfig) -> Result<Outcome> {
    let family = cfg.family()?.build()?;
    let sample = cfg.sample(&family)?;
    let q = if cfg.q.is_empty() { selfcheck::SCAN_Q.to_vec() } else { cfg.q.clone() };
    let r = if cfg.r.is_empty() { selfcheck::SCAN_R.to_vec() } else { cfg.r.clone() };
    let scan = FactorizationScan::new(family.as_ref(), &sample, &cfg.grid_spec())?;
    let discrepancy = q
        .iter()
        .map(|&qi| r.iter().map(|&rj| Ok(scan.evaluate(qi, rj)?.discrepancy())).collect())
        .collect::<Result<Vec<Vec<f64>>>>()?;
    let mut header = vec!["q".to_owned()];
    header.extend(r.iter().map(|rj| format!("r={rj}")));
    let csv = csv_table(
        &header,
        q.iter().zip(&discrepancy).map(|(qi, row)| {
            std::iter::once(num(*qi))
                .chain(row.iter().map(|&d| num(d)))
                .collect()
        }),
    )?;
    let report = ScanReport {
        family: family.id().to_owned(),
        sample: sample.values,
        grid_nodes: scan.grid().axes().iter().map(|a| a.len()).collect(),
        q,
        r,
        discrepancy,
    };
    Outcome::new(report, Some(csv))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AsymptoticsReport {
    pub method: IntervalMethod,
    pub n_list: Vec<usize>,
    pub reports: Vec<CoverageReport>,
}

fn run_asymptotics(cfg: &RunConfig) -> Result<Outcome> {
    if cfg.n_list.is_empty() {
        return Err(Error::validation("n_list", "required"));
    }
    let mut cfg = cfg.clone();
    let method = cfg.method.unwrap_or(IntervalMethod::GaussianApprox);
    cfg.method = Some(method);
    cfg.n = Some(cfg.n_list[0]);
    let spec = cfg.calibration_spec()?;
    let reports = coverage_vs_n(&spec, &cfg.n_list, method)?;
    let header = ["n", "coverage", "std_error", "improper_count", "trials", "hits"].map(String::from);
    let csv = csv_table(
        &header,
        reports.iter().map(|r| {
            vec![
                r.n.to_string(),
                num(r.coverage),
                num(r.std_error),
                r.improper_count.to_string(),
                r.trials.to_string(),
                r.hits.to_string(),
            ]
        }),
    )?;
    Outcome::new(
        AsymptoticsReport {
            method,
            n_list: cfg.n_list.clone(),
            reports,
        },
        Some(csv),
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResidualReport {
    pub family: String,
    pub factor: String,
    pub x_samples: Vec<f64>,
    pub residual: f64,
}

fn run_residual(cfg: &RunConfig) -> Result<Outcome> {
    let (family, factor) = build_pair(cfg.family()?, cfg.factor()?)?;
    let sample = cfg.sample(&family)?;
    let residual = exact_calibration_residual(family.as_ref(), &factor, &sample.values, &cfg.grid_spec())?;
    Outcome::new(
        ResidualReport {
            family: family.id().to_owned(),
            factor: factor.label().to_owned(),
            x_samples: sample.values,
            residual,
        },
        None,
    )
}

/// Runs the acceptance checks, printing one table line per check as it
/// finishes.
pub fn run_self_check(seed: u64, mut out: impl std::io::Write) -> Result<Outcome> {
    let (report, timings) = selfcheck::run(seed, |c, t| {
        let _ = writeln!(out, "{}", selfcheck::table_line(c, t));
        let _ = out.flush();
    })?;
    let in_budget = timings.iter().all(|t| t.within_budget());
    let status = if report.all_pass() && in_budget { 0 } else { 1 };
    let header = ["id", "name", "pass"].map(String::from);
    let csv = csv_table(
        &header,
        report
            .criteria
            .iter()
            .map(|c| vec![c.id.to_string(), c.name.clone(), c.pass.to_string()]),
    )?;
    let mut outcome = Outcome::new(&report, Some(csv))?;
    outcome.timings = Some(timings);
    outcome.status = status;
    Ok(outcome)
}

/// Executes a resolved command. `self-check` output goes to stdout.
pub fn execute(command: Command, cfg: &RunConfig) -> Result<Outcome> {
    match command {
        Command::Assign => run_assign(cfg, false),
        Command::Interval => run_assign(cfg, true),
        Command::Update => run_update(cfg),
        Command::Calibrate => run_calibrate(cfg),
        Command::FactorScan => run_factor_scan(cfg),
        Command::Asymptotics => run_asymptotics(cfg),
        Command::Residual => run_residual(cfg),
        Command::SelfCheck => run_self_check(cfg.seed.unwrap_or(selfcheck::DEFAULT_SEED), std::io::stdout()),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Metadata {
    pub tool: String,
    pub version: String,
    pub command: Command,
    pub timestamp_unix: u64,
    pub workers: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<Vec<Timing>>,
}

/// Typed report of each command. Parsing an emitted report into it checks
/// the report against the schema these types define.
#[derive(Clone, Debug, PartialEq)]
pub enum Report {
    Posterior(PosteriorReport),
    Coverage(CoverageReport),
    Scan(ScanReport),
    Asymptotics(AsymptoticsReport),
    Residual(ResidualReport),
    SelfCheck(SelfCheckReport),
}

impl Report {
    pub fn parse(command: Command, report: &Value) -> Result<Self> {
        fn typed<T: serde::de::DeserializeOwned>(v: &Value) -> Result<T> {
            Ok(T::deserialize(v)?)
        }
        Ok(match command {
            Command::Assign | Command::Interval | Command::Update => Report::Posterior(typed(report)?),
            Command::Calibrate => Report::Coverage(typed(report)?),
            Command::FactorScan => Report::Scan(typed(report)?),
            Command::Asymptotics => Report::Asymptotics(typed(report)?),
            Command::Residual => Report::Residual(typed(report)?),
            Command::SelfCheck => Report::SelfCheck(typed(report)?),
        })
    }
}

/// `{"metadata": ..., "report": ...}` as emitted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Envelope {
    pub metadata: Metadata,
    pub report: Value,
}

impl Envelope {
    /// Parses emitted JSON and checks the report against its command's type.
    pub fn parse(text: &str) -> Result<(Self, Report)> {
        let env: Envelope = serde_json::from_str(text)?;
        let report = Report::parse(env.metadata.command, &env.report)?;
        Ok((env, report))
    }
}

/// Wraps a report with a timestamp and tool version.
pub fn envelope(command: Command, outcome: &Outcome) -> Value {
    let timestamp_unix = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let metadata = Metadata {
        tool: "cfactor".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command,
        timestamp_unix,
        workers: rayon::current_num_threads(),
        timings: outcome.timings.clone(),
    };
    json!({ "metadata": metadata, "report": outcome.report })
}

/// The envelope without its metadata; equal across runs of one config.
pub fn strip_metadata(mut envelope: Value) -> Value {
    if let Some(m) = envelope.as_object_mut() {
        m.remove("metadata");
    }
    envelope
}

/// Process exit status for an error: 3 for numerical failures, 2 otherwise.
pub fn exit_code(err: &Error) -> i32 {
    if err.is_numerical() {
        3
    } else {
        2
    }
}

/// Machine-readable error object.
pub fn error_object(err: &Error) -> Value {
    let mut e = json!({ "kind": err.kind(), "message": err.to_string() });
    match err {
        Error::Validation { field, .. } => e["field"] = json!(field),
        Error::CalibrationInfeasible(report) => e["partial_report"] = json!(report),
        _ => {}
    }
    json!({ "error": e })
}

/// Writes `bytes` to `path` via a temporary file in the same directory and
/// a rename, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// Builds the global worker pool from `CFACTOR_WORKERS` (default: available
/// parallelism).
pub fn init_workers() -> Result<usize> {
    let n = match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => n,
            _ => return Err(Error::validation(WORKERS_ENV, format!("`{v}` is not a positive integer"))),
        },
        Err(_) => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    Ok(n)
}

/// Pretty JSON with a trailing newline.
pub fn to_json_bytes(value: &Value) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> RunConfig {
        RunConfig::from_json(text).unwrap()
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = RunConfig::from_json(r#"{"family": {"id": "gauss_loc"}, "colour": 1}"#).unwrap_err();
        assert_eq!(exit_code(&e), 2);
    }

    #[test]
    fn bad_delta_names_the_field() {
        let c = cfg(r#"{"family": {"id": "gauss_loc"}, "factor": {"kind": "location"}, "sample": [0.1], "delta": 1.5}"#);
        let e = execute(Command::Interval, &c).unwrap_err();
        assert_eq!(exit_code(&e), 2);
        assert_eq!(error_object(&e)["error"]["field"], "delta");
    }

    #[test]
    fn flat_exponential_is_numerical_failure() {
        let c = cfg(r#"{"family": {"id": "exp_scale"}, "factor": {"kind": "custom", "q": 0, "r": 0}, "sample": [1.0]}"#);
        let e = execute(Command::Assign, &c).unwrap_err();
        assert_eq!(exit_code(&e), 3);
        assert_eq!(error_object(&e)["error"]["kind"], "improper_posterior");
    }

    #[test]
    fn command_conflict_is_validation() {
        let c = cfg(r#"{"command": "assign"}"#);
        assert!(c.resolve_command(Some(Command::Calibrate)).is_err());
        assert_eq!(c.resolve_command(None).unwrap(), Command::Assign);
    }

    #[test]
    fn update_matches_batch() {
        let c = cfg(r#"{"family": {"id": "gauss_loc"}, "factor": {"kind": "location"}, "sample": [0.1, -0.4, 0.9]}"#);
        let out = execute(Command::Update, &c).unwrap();
        assert!(out.report["batch_l1"].as_f64().unwrap() < 1e-8);
    }

    #[test]
    fn envelope_strips_to_report() {
        let out = Outcome::new(json!({"a": 1}), None).unwrap();
        let env = envelope(Command::Residual, &out);
        assert!(env["metadata"]["timestamp_unix"].is_u64());
        assert_eq!(strip_metadata(env), json!({"report": {"a": 1}}));
    }
}
