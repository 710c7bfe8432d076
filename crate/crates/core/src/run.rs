//! Configuration-driven experiments behind the `plap` binary.
//!
//! A run reads one flat TOML file (every key optional except `p`), applies
//! `KEY=VALUE` overrides, and writes into the output directory:
//!
//! * `manifest.json`: config echo, version, timings, checks and status;
//! * `report.json`: the experiment result, byte-identical across runs with the same config;
//! * experiment-specific CSV files.
//!
//! The exit status is 0 iff every check declared by the run passes.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::exact::{affine_reference, heat_reference, Counterexample, ExactSolution};
use crate::grid::{Cylinder, ScalarField, SpaceTimeGrid};
use crate::jet::Params;
use crate::sampling::run_jet_suite;
use crate::solver::{solve, FnBoundary, Scheme, SolverConfig, StepDiagnostics};
use crate::verify::{
    caccioppoli_report, pointwise_suite, regularized_estimate_report, sharpness_sweep,
    testfn_estimate_report, time_derivative_report,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Solve,
    VerifyEstimate,
    Sharpness,
    JetProptest,
    TimeDerivative,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Solve => "solve",
            Experiment::VerifyEstimate => "verify-estimate",
            Experiment::Sharpness => "sharpness",
            Experiment::JetProptest => "jet-proptest",
            Experiment::TimeDerivative => "time-derivative",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Problem {
    Heat,
    Counterexample,
    Affine,
}

/// Where the field for estimate runs comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Solve,
    Exact,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateKind {
    Caccioppoli,
    Regularized,
    Testfn,
    Pointwise,
}

fn d_s() -> f64 {
    0.0
}
fn d_problem() -> Problem {
    Problem::Heat
}
fn d_source() -> Source {
    Source::Solve
}
fn d_estimate() -> EstimateKind {
    EstimateKind::Caccioppoli
}
fn d_lower() -> Vec<f64> {
    vec![0.0, 0.0]
}
fn d_upper() -> Vec<f64> {
    vec![1.0, 1.0]
}
fn d_nx() -> usize {
    32
}
fn d_nt() -> usize {
    65
}
fn d_t_end() -> f64 {
    0.05
}
fn d_scheme() -> Scheme {
    Scheme::ImplicitPicard
}
fn d_cfl() -> f64 {
    0.2
}
fn d_picard_tol() -> f64 {
    1e-8
}
fn d_picard_iters() -> usize {
    50
}
fn d_anderson() -> usize {
    5
}
fn d_linear_tol() -> f64 {
    1e-10
}
fn d_seed() -> u64 {
    1
}
fn d_samples() -> usize {
    100_000
}
fn d_s_list() -> Vec<f64> {
    vec![-1.25, -1.0, -0.5, 0.0, 0.5]
}
fn d_levels() -> Vec<usize> {
    vec![32, 64, 128, 256, 512]
}
fn d_margin_tol() -> f64 {
    1e-12
}
fn d_affine_a() -> Vec<f64> {
    vec![1.0, 0.0]
}

/// Flat run configuration. Every key but `p` has a default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub p: f64,
    #[serde(default = "d_s")]
    pub s: f64,
    #[serde(default)]
    pub eps: f64,
    #[serde(default = "d_problem")]
    pub problem: Problem,
    #[serde(default = "d_source")]
    pub source: Source,
    #[serde(default = "d_estimate")]
    pub estimate: EstimateKind,
    #[serde(default = "d_lower")]
    pub lower: Vec<f64>,
    #[serde(default = "d_upper")]
    pub upper: Vec<f64>,
    #[serde(default = "d_nx")]
    pub nx: usize,
    #[serde(default = "d_nt")]
    pub nt: usize,
    #[serde(default)]
    pub t_start: f64,
    #[serde(default = "d_t_end")]
    pub t_end: f64,
    #[serde(default = "d_scheme")]
    pub scheme: Scheme,
    #[serde(default = "d_cfl")]
    pub cfl_safety: f64,
    #[serde(default = "d_picard_tol")]
    pub picard_tol: f64,
    #[serde(default = "d_picard_iters")]
    pub picard_max_iters: usize,
    #[serde(default = "d_anderson")]
    pub anderson_depth: usize,
    #[serde(default = "d_linear_tol")]
    pub linear_tol: f64,
    /// Cylinder center; defaults to the center of the domain.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    /// Cylinder time; defaults to the middle of the time window.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t0: Option<f64>,
    /// Cylinder radius; defaults to the largest `r` with `Q_2r` inside the grid, capped at 1/8 of the domain.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default = "d_seed")]
    pub seed: u64,
    #[serde(default = "d_samples")]
    pub samples: usize,
    #[serde(default = "d_s_list")]
    pub s_list: Vec<f64>,
    #[serde(default = "d_levels")]
    pub levels: Vec<usize>,
    /// Times at which the field is written to CSV (nearest level).
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    /// Maximum nodal error against the exact solution (solve).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_tol: Option<f64>,
    #[serde(default = "d_margin_tol")]
    pub margin_tol: f64,
    /// Upper bound on the empirical constant (verify-estimate).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constant_max: Option<f64>,
    /// Upper bound on the pointwise residual (time-derivative).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual_tol: Option<f64>,
    #[serde(default = "d_affine_a")]
    pub affine_a: Vec<f64>,
    #[serde(default)]
    pub affine_b: f64,
}

fn config_error(e: impl std::fmt::Display) -> Error {
    Error::Config(e.to_string())
}

/// Parses one `KEY=VALUE` override. The value is read as a TOML value and
/// falls back to a plain string.
pub fn parse_override(raw: &str) -> Result<(String, toml::Value)> {
    let (key, value) = raw
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{raw}` is not KEY=VALUE")))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(Error::Config(format!("override `{raw}` has an empty key")));
    }
    let value = value.trim();
    let parsed = toml::Table::from_str(&format!("v = {value}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(value.to_string()));
    Ok((key.to_string(), parsed))
}

/// Builds a config from file text, overrides and an optional seed flag.
/// Errors name the offending key (and line, for file errors).
pub fn load_config(text: &str, overrides: &[String], seed: Option<u64>) -> Result<RunConfig> {
    let mut table = toml::Table::from_str(text).map_err(config_error)?;
    if overrides.is_empty() && seed.is_none() {
        // straight from the text so errors carry line numbers
        return toml::from_str(text).map_err(config_error);
    }
    for raw in overrides {
        let (key, value) = parse_override(raw)?;
        table.insert(key, value);
    }
    if let Some(seed) = seed {
        let seed = i64::try_from(seed).map_err(|_| Error::Config(format!("seed {seed} out of range")))?;
        table.insert("seed".into(), toml::Value::Integer(seed));
    }
    table.try_into().map_err(config_error)
}

impl RunConfig {
    pub fn params(&self) -> Result<Params> {
        Params::new(self.p, self.s, self.eps).map_err(|e| Error::Config(format!("keys p/s/eps: {e}")))
    }

    pub fn grid(&self) -> Result<SpaceTimeGrid> {
        SpaceTimeGrid::new(&self.lower, &self.upper, self.nx, self.t_start, self.t_end, self.nt)
            .map_err(|e| Error::Config(format!("keys lower/upper/nx/t_start/t_end/nt: {e}")))
    }

    pub fn cylinder(&self, grid: &SpaceTimeGrid) -> Result<Cylinder> {
        let x0 = match &self.x0 {
            Some(x0) => x0.clone(),
            None => self.lower.iter().zip(&self.upper).map(|(a, b)| 0.5 * (a + b)).collect(),
        };
        let t0 = self.t0.unwrap_or(0.5 * (self.t_start + self.t_end));
        let r = match self.r {
            Some(r) => r,
            None => {
                let inner: f64 = (0..grid.n_dim())
                    .map(|a| (x0[a] - grid.coord(a, 1)).min(grid.coord(a, grid.nx() - 2) - x0[a]))
                    .fold(f64::INFINITY, f64::min);
                let time = (t0 - grid.t_start()).min(grid.t_end() - t0);
                let extent = (0..grid.n_dim())
                    .map(|a| self.upper[a] - self.lower[a])
                    .fold(f64::INFINITY, f64::min);
                (0.5 * inner).min(0.5 * time.max(0.0).sqrt()).min(extent / 8.0) * (1.0 - 1e-9)
            }
        };
        Cylinder::new(&x0, t0, r).map_err(|e| Error::Config(format!("keys x0/t0/r: {e}")))
    }

    fn solver_config(&self, params: Params, grid: SpaceTimeGrid) -> SolverConfig {
        let mut config = SolverConfig::new(params, grid, self.scheme);
        config.cfl_safety = self.cfl_safety;
        config.picard_tol = self.picard_tol;
        config.picard_max_iters = self.picard_max_iters;
        config.anderson_depth = self.anderson_depth;
        config.linear_tol = self.linear_tol;
        config
    }

    fn exact_solution(&self) -> Result<Box<dyn ExactSolution>> {
        let boxed: Box<dyn ExactSolution> = match self.problem {
            Problem::Heat => Box::new(heat_reference(self.p).map_err(|e| Error::Config(format!("key problem: {e}")))?),
            Problem::Counterexample => Box::new(Counterexample::new(self.p)?),
            Problem::Affine => Box::new(affine_reference(&self.affine_a, self.affine_b)?),
        };
        Ok(boxed)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    /// `at_most` or `at_least`.
    pub relation: &'static str,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: &str, value: f64, bound: f64) -> Self {
        Self { name: name.into(), value, bound, relation: "at_most", passed: value <= bound }
    }

    pub fn at_least(name: &str, value: f64, bound: f64) -> Self {
        Self { name: name.into(), value, bound, relation: "at_least", passed: value >= bound }
    }

    pub fn holds(name: &str, ok: bool) -> Self {
        Self::at_least(name, if ok { 1.0 } else { 0.0 }, 1.0)
    }
}

/// Result of an experiment, before it is written out.
pub struct Outcome {
    pub report: serde_json::Value,
    pub checks: Vec<Check>,
    /// Extra files (name, contents) written next to the report.
    pub files: Vec<(String, Vec<u8>)>,
    pub diagnostics: serde_json::Value,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

struct FieldRun {
    field: ScalarField,
    steps: Vec<StepDiagnostics>,
    picard_warnings: usize,
}

fn build_field(cfg: &RunConfig, params: Params, grid: SpaceTimeGrid) -> Result<FieldRun> {
    let exact = cfg.exact_solution()?;
    match cfg.source {
        Source::Exact => Ok(FieldRun {
            field: ScalarField::from_fn(grid, |x, t| exact.value(x, t))?,
            steps: Vec::new(),
            picard_warnings: 0,
        }),
        Source::Solve => {
            let solution = solve(&cfg.solver_config(params, grid), &FnBoundary(|x: &[f64], t: f64| exact.value(x, t)))?;
            let picard_warnings = solution.picard_warnings();
            Ok(FieldRun { field: solution.field, steps: solution.diagnostics, picard_warnings })
        }
    }
}

fn csv_bytes(write: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write(&mut buf)?;
    Ok(buf)
}

fn snapshots(cfg: &RunConfig, field: &ScalarField) -> Result<Vec<(String, Vec<u8>)>> {
    let grid = field.grid();
    let mut files = Vec::new();
    for &t in &cfg.snapshot_times {
        if !(t >= grid.t_start() && t <= grid.t_end()) {
            return Err(Error::Config(format!("key snapshot_times: {t} outside the time window")));
        }
        let k = ((t - grid.t_start()) / grid.dt()).round() as usize;
        let bytes = csv_bytes(|buf| field.write_csv(buf, Some(k)))?;
        files.push((format!("field_level_{k:05}.csv"), bytes));
    }
    Ok(files)
}

fn steps_csv(steps: &[StepDiagnostics]) -> Result<Vec<u8>> {
    let mut out = csv::Writer::from_writer(Vec::new());
    for step in steps {
        out.serialize(step)?;
    }
    out.into_inner().map_err(|e| Error::Io(e.into_error()))
}

fn run_solve(cfg: &RunConfig) -> Result<Outcome> {
    let params = cfg.params()?;
    let grid = cfg.grid()?;
    let exact = cfg.exact_solution()?;
    let solution = solve(&cfg.solver_config(params, grid.clone()), &FnBoundary(|x: &[f64], t: f64| exact.value(x, t)))?;
    let reference = ScalarField::from_fn(grid, |x, t| exact.value(x, t))?;
    let max_error = solution.field.max_abs_diff(&reference);
    let final_level = solution.field.level(solution.field.grid().nt() - 1);
    let report = json!({
        "experiment": "solve",
        "problem": cfg.problem,
        "scheme": cfg.scheme,
        "params": params,
        "max_error": max_error,
        "final_min": final_level.iter().copied().fold(f64::INFINITY, f64::min),
        "final_max": final_level.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        "steps": solution.diagnostics.len(),
        "picard_warnings": solution.picard_warnings(),
    });
    let mut checks = Vec::new();
    if let Some(tol) = cfg.error_tol {
        checks.push(Check::at_most("max_error", max_error, tol));
    }
    let mut files = vec![("steps.csv".to_string(), steps_csv(&solution.diagnostics)?)];
    files.extend(snapshots(cfg, &solution.field)?);
    let diagnostics = json!({ "picard_warnings": solution.picard_warnings() });
    Ok(Outcome { report, checks, files, diagnostics })
}

fn run_verify_estimate(cfg: &RunConfig) -> Result<Outcome> {
    let params = cfg.params()?;
    let grid = cfg.grid()?;
    let cyl = cfg.cylinder(&grid)?;
    let run = build_field(cfg, params, grid)?;
    let mut checks = Vec::new();
    let mut files = snapshots(cfg, &run.field)?;
    let report = if cfg.estimate == EstimateKind::Pointwise {
        let summary = pointwise_suite(&run.field, &params, None);
        checks.push(Check::at_least("min_normalized_margin", summary.min_normalized(), -cfg.margin_tol));
        serde_json::to_value(&summary)?
    } else {
        let report = match cfg.estimate {
            EstimateKind::Caccioppoli => caccioppoli_report(&run.field, &params, &cyl)?,
            EstimateKind::Regularized => regularized_estimate_report(&run.field, &params, &cyl)?,
            _ => testfn_estimate_report(&run.field, &params, &cyl)?,
        }
        .with_picard_warnings(run.picard_warnings);
        checks.push(Check::holds("report_consistent", report.is_consistent()));
        if let Some(max) = cfg.constant_max {
            checks.push(Check::at_most("empirical_constant", report.empirical_constant, max));
        }
        files.push(("report.txt".into(), report.to_text().into_bytes()));
        serde_json::to_value(&report)?
    };
    if !run.steps.is_empty() {
        files.push(("steps.csv".into(), steps_csv(&run.steps)?));
    }
    let diagnostics = json!({ "picard_warnings": run.picard_warnings });
    Ok(Outcome { report, checks, files, diagnostics })
}

fn run_time_derivative(cfg: &RunConfig) -> Result<Outcome> {
    let params = cfg.params()?;
    let grid = cfg.grid()?;
    let cyl = cfg.cylinder(&grid)?;
    let run = build_field(cfg, params, grid)?;
    let report = time_derivative_report(&run.field, &params, &cyl)?.with_picard_warnings(run.picard_warnings);
    let mut checks = vec![Check::holds("report_consistent", report.is_consistent())];
    if let Some(tol) = cfg.residual_tol {
        checks.push(Check::at_most("pointwise_residual_sup", report.extras["pointwise_residual_sup"], tol));
    }
    let files = vec![("report.txt".to_string(), report.to_text().into_bytes())];
    let diagnostics = json!({ "picard_warnings": run.picard_warnings });
    Ok(Outcome { report: serde_json::to_value(&report)?, checks, files, diagnostics })
}

fn run_sharpness(cfg: &RunConfig) -> Result<Outcome> {
    let table = sharpness_sweep(cfg.p, &cfg.s_list, &cfg.levels)?;
    let checks = vec![Check::holds("dichotomy_at_s_eq_minus_1", table.matches_threshold())];
    let files = vec![("sharpness.csv".to_string(), csv_bytes(|buf| table.write_csv(buf))?)];
    Ok(Outcome { report: serde_json::to_value(&table)?, checks, files, diagnostics: json!({}) })
}

fn run_jet_proptest(cfg: &RunConfig) -> Result<Outcome> {
    let summary = run_jet_suite(cfg.seed, cfg.samples);
    let mut checks: Vec<Check> = summary
        .margins
        .iter()
        .map(|m| Check::at_least(&m.name, m.min_normalized, -cfg.margin_tol))
        .collect();
    checks.push(Check::at_most("decomposition_error", summary.max_decomposition_error, cfg.margin_tol));
    checks.push(Check::at_most("normalized_bound_violation", summary.max_normalized_bound_violation, cfg.margin_tol));
    checks.push(Check::at_most("ellipticity_violation", summary.max_ellipticity_violation, cfg.margin_tol));
    let mut out = csv::Writer::from_writer(Vec::new());
    for m in &summary.margins {
        out.serialize(m)?;
    }
    let margins = out.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(Outcome {
        report: serde_json::to_value(&summary)?,
        checks,
        files: vec![("margins.csv".into(), margins)],
        diagnostics: json!({}),
    })
}

/// Runs one experiment without touching the filesystem.
pub fn execute(kind: Experiment, cfg: &RunConfig) -> Result<Outcome> {
    match kind {
        Experiment::Solve => run_solve(cfg),
        Experiment::VerifyEstimate => run_verify_estimate(cfg),
        Experiment::Sharpness => run_sharpness(cfg),
        Experiment::JetProptest => run_jet_proptest(cfg),
        Experiment::TimeDerivative => run_time_derivative(cfg),
    }
}

/// Command-line level request.
#[derive(Clone, Debug)]
pub struct Invocation {
    pub experiment: Experiment,
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub out: PathBuf,
    pub overrides: Vec<String>,
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Loads the config, runs the experiment, writes all artifacts and returns the exit status.
/// Diagnostics go to stderr.
pub fn run(inv: &Invocation) -> i32 {
    let text = match &inv.config {
        Some(path) => match fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("error: cannot read config {}: {e}", path.display());
                return EXIT_CONFIG;
            }
        },
        None => String::new(),
    };
    let cfg = match load_config(&text, &inv.overrides, inv.seed) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    if let Err(e) = fs::create_dir_all(&inv.out) {
        eprintln!("error: cannot create {}: {e}", inv.out.display());
        return EXIT_CONFIG;
    }

    let started = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0);
    let clock = Instant::now();
    let result = execute(inv.experiment, &cfg);
    let elapsed = clock.elapsed().as_secs_f64();

    let mut manifest = BTreeMap::new();
    manifest.insert("tool", json!("plap"));
    manifest.insert("version", json!(env!("CARGO_PKG_VERSION")));
    manifest.insert("experiment", json!(inv.experiment.name()));
    manifest.insert("config", serde_json::to_value(&cfg).unwrap_or(json!(null)));
    manifest.insert("config_path", json!(inv.config.as_ref().map(|p| p.display().to_string())));
    manifest.insert("config_text", json!(text));
    manifest.insert("overrides", json!(inv.overrides));
    manifest.insert("started_unix_ms", json!(started as u64));
    manifest.insert("elapsed_seconds", json!(elapsed));

    let status = match result {
        Ok(outcome) => {
            let written = (|| -> Result<()> {
                write_json(&inv.out.join("report.json"), &outcome.report)?;
                for (name, bytes) in &outcome.files {
                    fs::write(inv.out.join(name), bytes)?;
                }
                Ok(())
            })();
            if let Err(e) = written {
                eprintln!("error: writing outputs: {e}");
                return EXIT_NUMERICAL;
            }
            for check in &outcome.checks {
                let mark = if check.passed { "PASS" } else { "FAIL" };
                eprintln!("{mark} {} = {:e} ({} {:e})", check.name, check.value, check.relation, check.bound);
            }
            let passed = outcome.passed();
            manifest.insert("checks", serde_json::to_value(&outcome.checks).unwrap_or(json!([])));
            manifest.insert("diagnostics", outcome.diagnostics);
            manifest.insert("status", json!(if passed { "passed" } else { "failed" }));
            if passed {
                EXIT_OK
            } else {
                EXIT_CHECK_FAILED
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            let code = if matches!(e, Error::Config(_)) { EXIT_CONFIG } else { EXIT_NUMERICAL };
            manifest.insert("status", json!("error"));
            manifest.insert("error", json!(e.to_string()));
            code
        }
    };
    let manifest = serde_json::to_value(manifest).expect("manifest is plain JSON");
    if let Err(e) = write_json(&inv.out.join("manifest.json"), &manifest) {
        eprintln!("error: writing manifest: {e}");
        return EXIT_NUMERICAL;
    }
    status
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_everything_but_p() {
        let cfg = load_config("p = 3.0", &[], None).unwrap();
        assert_eq!(cfg.s, 0.0);
        assert_eq!(cfg.nx, 32);
        assert_eq!(cfg.levels, vec![32, 64, 128, 256, 512]);
    }

    #[test]
    fn missing_p_names_the_key() {
        let err = load_config("s = 0.5\n", &[], None).unwrap_err().to_string();
        assert!(err.contains("`p`"), "{err}");
    }

    #[test]
    fn unknown_key_reports_line_and_key() {
        let err = load_config("p = 2.0\nbogus = 1\n", &[], None).unwrap_err().to_string();
        assert!(err.contains("bogus") && err.contains("line 2"), "{err}");
    }

    #[test]
    fn overrides_and_seed() {
        let cfg = load_config(
            "p = 2.0",
            &["s_list=[0.0, 1.0]".into(), "problem=counterexample".into(), "nx = 16".into()],
            Some(7),
        )
        .unwrap();
        assert_eq!(cfg.s_list, vec![0.0, 1.0]);
        assert_eq!(cfg.problem, Problem::Counterexample);
        assert_eq!(cfg.nx, 16);
        assert_eq!(cfg.seed, 7);
        assert!(parse_override("novalue").is_err());
    }

    #[test]
    fn default_cylinder_fits() {
        let cfg = load_config("p = 2.0", &[], None).unwrap();
        let grid = cfg.grid().unwrap();
        let cyl = cfg.cylinder(&grid).unwrap();
        grid.check_cylinder_inside(&cyl.scaled(2.0)).unwrap();
    }
}
