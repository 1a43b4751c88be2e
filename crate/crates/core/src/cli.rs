//! Scenario runner and suite driver behind the `synclab` binary.
//!
//! A run integrates one scenario, evaluates its checks and analyses and
//! writes, into a scenario-scoped directory:
//!
//! | file | content |
//! |------|---------|
//! | `trajectory.csv` | `t` and the flattened state |
//! | `observables.csv`, `observables.dat` | recorded functionals |
//! | `drift.json`, `drift.csv` | one drift report per checked functional |
//! | `analyses.json` | analysis reports with pass/fail |
//! | `manifest.json` | id, resolved settings, content hash, files, duration |
//!
//! Exit codes: 0 success, 2 a failed verdict, 1 an I/O, parse or
//! integration error.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Parser;
use rayon::prelude::*;
use serde::Serialize;

use crate::equilibria::{is_equilibrium, matrix_aggregation_check, max_displacement};
use crate::error::{Error, Result};
use crate::integrate::{convergence_order, integrate, IntegratorSettings, OrderEstimate, System, Trajectory};
use crate::invariants::{
    centroid, drift_of, evaluate_along, record_observables, write_drift_csv, write_drift_json,
    AsModelState, DriftReport, Functional, Verdict,
};
use crate::reduce_kuramoto::{co_integrate, dichotomy_check_with, Dichotomy, DICHOTOMY_EPS};
use crate::reduce_sphere::{sphere_aggregation_check, sphere_reduction_chain, AggregationVerdict, Hypothesis};
use crate::sample::RNG_NAME;
use crate::state::scenario::{AnalysisSpec, Model};
use crate::state::{Flavor, ScenarioSpec, SphereConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_FAILED: i32 = 2;

/// Bound on the `(f, g)` exponential envelopes, relative.
const REDUCTION_BOUND_SLACK: f64 = 1e-6;
/// Cross-ratio preservation under the `(f, g)` reconstruction.
const CROSS_RATIO_TOL: f64 = 1e-6;
const CHAIN_ORTHOGONALITY_TOL: f64 = 1e-8;
const CHAIN_INNER_LAW_TOL: f64 = 1e-5;

/// Options shared by single runs and suites.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub seed: Option<u64>,
    pub dt: Option<f64>,
    pub quiet: bool,
}

impl RunOptions {
    pub fn new(out_dir: impl Into<PathBuf>) -> Self {
        RunOptions { out_dir: out_dir.into(), seed: None, dt: None, quiet: true }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ResolvedSettings {
    pub integrator: IntegratorSettings,
    pub t_final: f64,
    pub seed: u64,
    pub rng: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub scenario_id: String,
    pub resolved: ResolvedSettings,
    /// SHA-256 over the canonical JSON of the resolved scenario, git blob
    /// style.
    pub input_hash: String,
    pub files: Vec<String>,
    pub duration_secs: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub report: serde_json::Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunOutcome {
    pub id: String,
    pub passed: bool,
    pub drift: Vec<DriftReport>,
    pub analyses: Vec<AnalysisOutcome>,
    pub manifest: RunManifest,
}

impl RunOutcome {
    pub fn failed_checks(&self) -> usize {
        self.drift.iter().filter(|r| r.verdict == Verdict::Fail).count()
    }

    pub fn failed_analyses(&self) -> usize {
        self.analyses.iter().filter(|a| !a.passed).count()
    }

    /// Largest relative drift among checks that carry a verdict.
    pub fn worst_drift(&self) -> f64 {
        self.drift
            .iter()
            .filter(|r| r.verdict != Verdict::Info)
            .map(|r| r.max_rel_dev)
            .fold(0.0, f64::max)
    }
}

/// Exit code of a finished run.
pub fn exit_code(outcome: &Result<RunOutcome>) -> i32 {
    match outcome {
        Ok(o) if o.passed => EXIT_OK,
        Ok(_) => EXIT_FAILED,
        Err(_) => EXIT_ERROR,
    }
}

/// Fixed 17-significant-digit formatting, so runs are byte-reproducible.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

fn state_columns(model: &Model) -> Vec<String> {
    match model {
        Model::Phase(p) => (0..p.n()).map(|j| format!("theta_{j}")).collect(),
        Model::Sphere(s) => (0..s.n())
            .flat_map(|i| (0..s.ambient_dim()).map(move |k| format!("x{i}_{k}")))
            .collect(),
        Model::Unitary(u) => {
            let d = u.dim();
            (0..u.n())
                .flat_map(|j| {
                    (0..d * d).flat_map(move |rc| {
                        let (r, c) = (rc / d, rc % d);
                        [format!("u{j}_{r}{c}_re"), format!("u{j}_{r}{c}_im")]
                    })
                })
                .collect()
        }
    }
}

fn write_trajectory<S: System<State = S>>(
    path: &Path,
    header: &[String],
    traj: &Trajectory<S>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    let mut head = vec!["t".to_string()];
    head.extend_from_slice(header);
    w.write_record(&head)?;
    for (t, s) in traj.times.iter().zip(&traj.states) {
        let mut row = vec![fmt17(*t)];
        row.extend(s.initial().into_iter().map(fmt17));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn write_observables<S>(dir: &Path, traj: &Trajectory<S>, dat: bool, files: &mut Vec<String>) -> Result<()> {
    let names: Vec<&String> = traj.observables.keys().collect();
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(dir.join("observables.csv"))?));
    let mut head = vec!["t".to_string()];
    head.extend(names.iter().map(|s| s.to_string()));
    w.write_record(&head)?;
    for (k, t) in traj.times.iter().enumerate() {
        let mut row = vec![fmt17(*t)];
        row.extend(names.iter().map(|n| fmt17(traj.observables[*n][k])));
        w.write_record(&row)?;
    }
    w.flush()?;
    files.push("observables.csv".into());
    if dat {
        let mut f = BufWriter::new(File::create(dir.join("observables.dat"))?);
        writeln!(f, "# t {}", names.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(" "))?;
        for (k, t) in traj.times.iter().enumerate() {
            write!(f, "{}", fmt17(*t))?;
            for n in &names {
                write!(f, " {}", fmt17(traj.observables[*n][k]))?;
            }
            writeln!(f)?;
        }
        f.flush()?;
        files.push("observables.dat".into());
    }
    Ok(())
}

fn state_count<S: AsModelState>(s: &S) -> usize {
    match s.model_state() {
        crate::invariants::ModelState::Phase(p) => p.n(),
        crate::invariants::ModelState::Sphere(x) => x.n(),
        crate::invariants::ModelState::Unitary(u) => u.n(),
    }
}

fn run_checks<S: AsModelState>(spec: &ScenarioSpec, traj: &Trajectory<S>) -> Result<Vec<DriftReport>> {
    let first = traj.first();
    let n = state_count(first);
    let mut out = Vec::new();
    for chk in &spec.checks {
        for f in Functional::expand(&chk.functional, n)? {
            let values = evaluate_along(traj, f)?;
            let kind = chk.kind.unwrap_or_else(|| f.default_kind(first.model_state(), &values[0]));
            out.push(drift_of(&f.to_string(), kind, &values, chk.tolerance));
        }
    }
    Ok(out)
}

fn outcome(name: &'static str, passed: bool, report: impl Serialize) -> Result<AnalysisOutcome> {
    Ok(AnalysisOutcome { name, passed, report: serde_json::to_value(report)? })
}

fn wrong_model(index: usize, an: &AnalysisSpec) -> Error {
    Error::scenario(format!("/analyses/{index}"), format!("{} does not apply to this model", an.name()))
}

fn run_analysis(
    index: usize,
    an: &AnalysisSpec,
    model: &Model,
    sphere_traj: Option<&Trajectory<SphereConfig>>,
    settings: &IntegratorSettings,
    t_final: f64,
) -> Result<AnalysisOutcome> {
    let name = an.name();
    match (an, model, sphere_traj) {
        (AnalysisSpec::Dichotomy { eps, expect }, Model::Phase(p), _) => {
            if p.flavor != Flavor::Cosine {
                return Err(Error::scenario(format!("/analyses/{index}"), "dichotomy needs the cosine flavor"));
            }
            let rep = dichotomy_check_with(&p.theta, p.alpha, p.kappa, t_final, settings, eps.unwrap_or(DICHOTOMY_EPS))?;
            let verdict_ok = match expect {
                Some(e) => rep.verdict == *e,
                None => rep.verdict != Dichotomy::Inconclusive,
            };
            let passed = verdict_ok && (rep.branch != Some(2) || rep.sum_theta_monotone);
            outcome(name, passed, rep)
        }
        (AnalysisSpec::KuramotoReduction { tolerance }, Model::Phase(p), _) => {
            let (_, rep) = co_integrate(p, settings, t_final)?;
            let passed = rep.max_error < *tolerance
                && rep.bound_excess <= REDUCTION_BOUND_SLACK
                && rep.cross_ratio_residual < CROSS_RATIO_TOL;
            outcome(name, passed, rep)
        }
        (AnalysisSpec::SphereReductionChain { tolerance }, Model::Sphere(s), _) => {
            let rep = sphere_reduction_chain(s, settings, t_final)?;
            let three_way = rep.full_vs_stereo.max(rep.stereo_vs_reduced).max(rep.full_vs_reduced);
            let passed = three_way < *tolerance
                && rep.orthogonality < CHAIN_ORTHOGONALITY_TOL
                && rep.min_a > 0.0
                && rep.inner_product_law < CHAIN_INNER_LAW_TOL;
            outcome(name, passed, rep)
        }
        (AnalysisSpec::SphereAggregation { expect, rate_fraction }, Model::Sphere(s), _) => {
            let rep = sphere_aggregation_check(s, settings, t_final)?;
            let rate_ok = *expect != AggregationVerdict::Aggregated
                || rep.hypothesis != Hypothesis::Certified
                || rep.fitted_rate.unwrap_or(0.0) >= rate_fraction * rep.predicted_rate;
            outcome(name, rep.verdict == *expect && rate_ok, rep)
        }
        (AnalysisSpec::MatrixAggregation { expect }, Model::Unitary(u), _) => {
            let rep = matrix_aggregation_check(u, settings, t_final)?;
            let passed = rep.verdict == *expect && (rep.hypothesis != Hypothesis::Certified || rep.riccati_holds);
            outcome(name, passed, rep)
        }
        (AnalysisSpec::Equilibrium { tolerance, displacement }, Model::Unitary(u), _) => {
            let eq = is_equilibrium(u, *tolerance)?;
            let moved = match displacement {
                Some(_) => Some(max_displacement(u, settings, t_final)?),
                None => None,
            };
            let passed = eq.is_equilibrium && moved.zip(*displacement).is_none_or(|(m, b)| m < b);
            #[derive(Serialize)]
            struct Report {
                residual: f64,
                is_equilibrium: bool,
                max_displacement: Option<f64>,
            }
            outcome(name, passed, Report { residual: eq.residual, is_equilibrium: eq.is_equilibrium, max_displacement: moved })
        }
        (AnalysisSpec::ConvergenceOrder { min, max }, _, _) => {
            let est = match model {
                Model::Phase(p) => convergence_order(p, settings.scheme)?,
                Model::Sphere(s) => convergence_order(s, settings.scheme)?,
                Model::Unitary(u) => convergence_order(u, settings.scheme)?,
            };
            let (order, passed) = match est {
                OrderEstimate::Exact => (None, true),
                OrderEstimate::Order(p) => (Some(p), (*min..=*max).contains(&p)),
            };
            #[derive(Serialize)]
            struct Report {
                scheme: crate::integrate::Scheme,
                /// `None` when step halving changed nothing beyond round-off.
                order: Option<f64>,
            }
            outcome(name, passed, Report { scheme: settings.scheme, order })
        }
        (AnalysisSpec::Separation { min }, _, Some(t)) => {
            let closest = t
                .states
                .iter()
                .map(|s| {
                    let mut m = f64::INFINITY;
                    for i in 0..s.n() {
                        for j in i + 1..s.n() {
                            m = m.min((&s.x[i] - &s.x[j]).norm());
                        }
                    }
                    m
                })
                .fold(f64::INFINITY, f64::min);
            #[derive(Serialize)]
            struct Report {
                closest_approach: f64,
            }
            outcome(name, closest > *min, Report { closest_approach: closest })
        }
        (AnalysisSpec::PoleCount { max_minority }, _, Some(t)) => {
            let last = &t.last().x;
            let c = centroid(last);
            let north = last.iter().filter(|x| x.dot(&c) >= 0.0).count();
            let minority = north.min(last.len() - north);
            #[derive(Serialize)]
            struct Report {
                north: usize,
                south: usize,
                minority: usize,
            }
            outcome(name, minority <= *max_minority, Report { north, south: last.len() - north, minority })
        }
        _ => Err(wrong_model(index, an)),
    }
}

/// Runs a parsed scenario and writes its artifacts under
/// `opts.out_dir/<id>`.
pub fn run_spec(mut spec: ScenarioSpec, opts: &RunOptions) -> Result<RunOutcome> {
    let start = Instant::now();
    if let Some(seed) = opts.seed {
        spec.seed = seed;
    }
    if let Some(dt) = opts.dt {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::invalid(format!("--dt must be positive, got {dt}")));
        }
        spec.override_dt(dt);
    }
    spec.validate()?;
    let settings = spec.settings()?;
    let model = spec.build()?;
    let dir = opts.out_dir.join(&spec.id);
    fs::create_dir_all(&dir)?;

    let mut observed: Vec<&str> = spec.observables.iter().map(String::as_str).collect();
    for chk in &spec.checks {
        if !observed.contains(&chk.functional.as_str()) {
            observed.push(&chk.functional);
        }
    }
    let header = state_columns(&model);
    let mut files = Vec::new();
    if spec.outputs.trajectory {
        files.push("trajectory.csv".to_string());
    }
    let tpath = dir.join("trajectory.csv");

    macro_rules! simulate {
        ($cfg:expr) => {{
            let mut traj = integrate($cfg, &settings, spec.t_final)?;
            if spec.outputs.trajectory {
                write_trajectory(&tpath, &header, &traj)?;
            }
            record_observables(&mut traj, &observed)?;
            write_observables(&dir, &traj, spec.outputs.dat, &mut files)?;
            let drift = run_checks(&spec, &traj)?;
            (drift, traj)
        }};
    }
    let (drift, sphere_traj) = match &model {
        Model::Phase(p) => (simulate!(p).0, None),
        Model::Sphere(s) => {
            let (d, t) = simulate!(s);
            (d, Some(t))
        }
        Model::Unitary(u) => (simulate!(u).0, None),
    };

    write_drift_json(&drift, BufWriter::new(File::create(dir.join("drift.json"))?))?;
    write_drift_csv(&drift, BufWriter::new(File::create(dir.join("drift.csv"))?))?;
    files.extend(["drift.json".to_string(), "drift.csv".to_string()]);

    let analyses = spec
        .analyses
        .iter()
        .enumerate()
        .map(|(i, an)| run_analysis(i, an, &model, sphere_traj.as_ref(), &settings, spec.t_final))
        .collect::<Result<Vec<_>>>()?;
    serde_json::to_writer_pretty(BufWriter::new(File::create(dir.join("analyses.json"))?), &analyses)?;
    files.push("analyses.json".into());
    files.push("manifest.json".into());

    let passed = drift.iter().all(|r| r.verdict != Verdict::Fail) && analyses.iter().all(|a| a.passed);
    let manifest = RunManifest {
        scenario_id: spec.id.clone(),
        resolved: ResolvedSettings { integrator: settings, t_final: spec.t_final, seed: spec.seed, rng: RNG_NAME },
        input_hash: spec.content_hash()?,
        files,
        duration_secs: start.elapsed().as_secs_f64(),
    };
    serde_json::to_writer_pretty(BufWriter::new(File::create(dir.join("manifest.json"))?), &manifest)?;
    Ok(RunOutcome { id: spec.id, passed, drift, analyses, manifest })
}

/// Reads, validates and runs one scenario file.
pub fn run(path: impl AsRef<Path>, opts: &RunOptions) -> Result<RunOutcome> {
    run_spec(ScenarioSpec::from_path(path)?, opts)
}

macro_rules! pack {
    ($($suite:literal / $file:literal),* $(,)?) => {
        &[$(($suite, $file, include_str!(concat!("../scenarios/", $suite, "/", $file, ".json")))),*]
    };
}

/// Built-in scenario packs: `(suite, file stem, JSON)`.
const PACKS: &[(&str, &str, &str)] = pack![
    "kuramoto-invariants" / "i-conservation",
    "kuramoto-invariants" / "j-alpha-negative",
    "kuramoto-invariants" / "j-alpha-small",
    "kuramoto-invariants" / "j-alpha-large",
    "kuramoto-invariants" / "k-quadruples-minus-half-pi",
    "kuramoto-invariants" / "k-quadruples-interior",
    "kuramoto-invariants" / "k-quadruples-half-pi",
    "kuramoto-invariants" / "sum-theta-monotone",
    "sphere-invariants" / "h-d2-omega-zero",
    "sphere-invariants" / "h-d2-omega-shared",
    "sphere-invariants" / "h-d3-omega-zero",
    "sphere-invariants" / "h-d3-omega-shared",
    "sphere-invariants" / "ptolemy-d2",
    "sphere-invariants" / "ptolemy-d3",
    "sphere-invariants" / "diameter-attractive",
    "sphere-invariants" / "diameter-repulsive",
    "sphere-invariants" / "rho2-normalized-frustration",
    "sphere-invariants" / "skew-pair",
    "sphere-invariants" / "skew-product",
    "sphere-invariants" / "aggregation",
    "sphere-invariants" / "pole-count",
    "matrix" / "spectra",
    "matrix" / "spectra-shared-hamiltonian",
    "matrix" / "aggregation-identity",
    "matrix" / "aggregation-frustrated",
    "reductions" / "dichotomy-sync",
    "reductions" / "dichotomy-incoherence",
    "reductions" / "kuramoto-n4-alpha0",
    "reductions" / "kuramoto-n6-alpha04",
    "reductions" / "kuramoto-n8-half-pi",
    "reductions" / "sphere-chain",
    "equilibria" / "cyclic-3",
    "equilibria" / "cyclic-4",
    "equilibria" / "cyclic-5",
    "equilibria" / "symmetric-3",
    "equilibria" / "symmetric-4",
];

pub const SUITES: &[&str] = &["kuramoto-invariants", "sphere-invariants", "matrix", "reductions", "equilibria", "all"];

/// Scenarios of a built-in suite, in pack order.
pub fn suite_scenarios(name: &str) -> Result<Vec<ScenarioSpec>> {
    if !SUITES.contains(&name) {
        return Err(Error::UnknownSuite(name.to_string()));
    }
    PACKS
        .iter()
        .filter(|(suite, _, _)| name == "all" || *suite == name)
        .map(|(suite, file, text)| {
            ScenarioSpec::from_json_str(text).map_err(|e| Error::invalid(format!("built-in {suite}/{file}: {e}")))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteEntry {
    pub id: String,
    pub status: Status,
    pub checks: usize,
    pub failed_checks: usize,
    pub analyses: usize,
    pub failed_analyses: usize,
    pub worst_rel_drift: f64,
    pub duration_secs: f64,
    pub message: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteSummary {
    pub suite: String,
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub errored: usize,
    pub scenarios: Vec<SuiteEntry>,
}

impl SuiteSummary {
    pub fn exit_code(&self) -> i32 {
        if self.errored > 0 {
            EXIT_ERROR
        } else if self.failed > 0 {
            EXIT_FAILED
        } else {
            EXIT_OK
        }
    }

    /// Fixed-width pass/fail table.
    pub fn table(&self) -> String {
        let mut s = format!(
            "{:<36} {:<6} {:>7} {:>9} {:>12} {:>8}\n",
            "scenario", "status", "checks", "analyses", "worst drift", "time"
        );
        for e in &self.scenarios {
            let status = match e.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Error => "ERROR",
            };
            s.push_str(&format!(
                "{:<36} {:<6} {:>7} {:>9} {:>12.3e} {:>7.1}s\n",
                e.id,
                status,
                format!("{}/{}", e.checks - e.failed_checks, e.checks),
                format!("{}/{}", e.analyses - e.failed_analyses, e.analyses),
                e.worst_rel_drift,
                e.duration_secs
            ));
            if let Some(m) = &e.message {
                s.push_str(&format!("    {m}\n"));
            }
        }
        s.push_str(&format!(
            "{}: {} of {} scenarios pass ({} failed, {} errors)\n",
            self.suite, self.passed, self.total, self.failed, self.errored
        ));
        s
    }
}

fn entry(id: String, result: Result<RunOutcome>, secs: f64) -> SuiteEntry {
    match result {
        Ok(o) => {
            let failed_checks = o.failed_checks();
            let failed_analyses = o.failed_analyses();
            let failing: Vec<String> = o
                .drift
                .iter()
                .filter(|r| r.verdict == Verdict::Fail)
                .map(|r| r.name.clone())
                .chain(o.analyses.iter().filter(|a| !a.passed).map(|a| a.name.to_string()))
                .collect();
            SuiteEntry {
                id,
                status: if o.passed { Status::Pass } else { Status::Fail },
                checks: o.drift.len(),
                failed_checks,
                analyses: o.analyses.len(),
                failed_analyses,
                worst_rel_drift: o.worst_drift(),
                duration_secs: secs,
                message: (!failing.is_empty()).then(|| format!("failed: {}", failing.join(", "))),
            }
        }
        Err(e) => SuiteEntry {
            id,
            status: Status::Error,
            checks: 0,
            failed_checks: 0,
            analyses: 0,
            failed_analyses: 0,
            worst_rel_drift: 0.0,
            duration_secs: secs,
            message: Some(e.to_string()),
        },
    }
}

/// Runs a built-in suite in parallel, one scenario per task, into
/// `opts.out_dir/<suite>/<id>`, and writes `summary.json` there.
pub fn suite(name: &str, opts: &RunOptions) -> Result<SuiteSummary> {
    let specs = suite_scenarios(name)?;
    let sub = RunOptions { out_dir: opts.out_dir.join(name), ..opts.clone() };
    fs::create_dir_all(&sub.out_dir)?;
    let scenarios: Vec<SuiteEntry> = specs
        .into_par_iter()
        .map(|spec| {
            let start = Instant::now();
            let id = spec.id.clone();
            let result = run_spec(spec, &sub);
            entry(id, result, start.elapsed().as_secs_f64())
        })
        .collect();
    let count = |s: Status| scenarios.iter().filter(|e| e.status == s).count();
    let summary = SuiteSummary {
        suite: name.to_string(),
        total: scenarios.len(),
        passed: count(Status::Pass),
        failed: count(Status::Fail),
        errored: count(Status::Error),
        scenarios,
    };
    serde_json::to_writer_pretty(BufWriter::new(File::create(sub.out_dir.join("summary.json"))?), &summary)?;
    Ok(summary)
}

#[derive(Debug, Parser)]
#[command(name = "synclab", version, about = "Run synchronization scenarios and invariant checks")]
pub struct Cli {
    /// Scenario file to run.
    #[arg(long, value_name = "PATH", conflicts_with = "suite", required_unless_present = "suite")]
    pub scenario: Option<PathBuf>,
    /// Built-in suite: kuramoto-invariants, sphere-invariants, matrix,
    /// reductions, equilibria or all.
    #[arg(long, value_name = "NAME")]
    pub suite: Option<String>,
    /// Override the scenario seed.
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, value_name = "DIR", env = "SYNCLAB_OUT", default_value = "synclab-out")]
    pub out: PathBuf,
    /// Override the step size (forces a fixed step).
    #[arg(long, value_name = "OVERRIDE")]
    pub dt: Option<f64>,
    /// Print nothing on success.
    #[arg(long)]
    pub quiet: bool,
}

fn report_run(o: &RunOutcome) -> String {
    let mut s = String::new();
    for r in &o.drift {
        s.push_str(&format!(
            "{:<24} {:<15} v0 {:>12.5e}  rel {:>10.3e}  {}\n",
            r.name,
            serde_json::to_value(r.kind).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
            r.v0,
            r.max_rel_dev,
            r.verdict.as_str()
        ));
    }
    for a in &o.analyses {
        s.push_str(&format!("{:<24} {}\n", a.name, if a.passed { "pass" } else { "fail" }));
    }
    s.push_str(&format!(
        "{}: {} ({} files, {:.2}s)\n",
        o.id,
        if o.passed { "PASS" } else { "FAIL" },
        o.manifest.files.len(),
        o.manifest.duration_secs
    ));
    s
}

/// Entry point of the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    let opts = RunOptions { out_dir: cli.out.clone(), seed: cli.seed, dt: cli.dt, quiet: cli.quiet };
    match (&cli.scenario, &cli.suite) {
        (Some(path), _) => {
            let result = run(path, &opts);
            match &result {
                Ok(o) if !cli.quiet => print!("{}", report_run(o)),
                Ok(_) => {}
                Err(e) => eprintln!("error: {}: {e}", path.display()),
            }
            exit_code(&result)
        }
        (None, Some(name)) => match suite(name, &opts) {
            Ok(summary) => {
                if !cli.quiet {
                    print!("{}", summary.table());
                    if let Ok(json) = serde_json::to_string(&summary) {
                        println!("{json}");
                    }
                }
                summary.exit_code()
            }
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_ERROR
            }
        },
        (None, None) => EXIT_ERROR,
    }
}
