//! Scenario-driven front end: hypothesis checks, the limit-scheme solver,
//! re-verification of trajectory files and parameter sweeps.
//!
//! Exit codes: 0 all requested checks pass, 1 usage or configuration error,
//! 2 a check or verification failed, 3 the solver failed.

pub mod output;
pub mod scenario;

use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use fdelab_core::analysis::{property_report, PropertyReport, RightKind};
use fdelab_core::fde::Trajectory;
use fdelab_core::hypothesis::{theorem_verdict, Status, TheoremId, TheoremVerdict, VerdictOptions};
use fdelab_core::par::map_range;
use fdelab_core::solver::{consistency, extend_forward, limit_scheme, SolveError, SolveResult};
use fdelab_core::Exec;

use output::{read_trajectory, thin_stride, trajectory_csv, write_atomic, write_json};
use scenario::{resolve, Loaded, Requirement, Scenario};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        1
    }
}

/// How a command ended when it did not hit a configuration error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Ok,
    CheckFailed,
    SolverFailed,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Ok => 0,
            Outcome::CheckFailed => 2,
            Outcome::SolverFailed => 3,
        }
    }

    fn worst(self, other: Outcome) -> Outcome {
        if other.exit_code() > self.exit_code() {
            other
        } else {
            self
        }
    }
}

/// Command-line overrides shared by every subcommand.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out_dir: Option<PathBuf>,
    pub window: Option<f64>,
    pub step: Option<f64>,
    pub full_density: bool,
    /// `verify` only: the trajectory file to read instead of the scenario's.
    pub trajectory: Option<PathBuf>,
}

impl Overrides {
    fn out_dir(&self) -> PathBuf {
        self.out_dir.clone().unwrap_or_else(|| PathBuf::from("."))
    }

    fn apply(&self, s: &mut Scenario) -> Result<(), CliError> {
        if let Some(w) = self.window {
            s.check.window = w;
            s.verify.window = w;
        }
        if let Some(h) = self.step {
            s.solve.step = h;
        }
        s.validate()
    }
}

pub fn load(path: &Path, ov: &Overrides) -> Result<Loaded, CliError> {
    let mut l = scenario::load(path)?;
    ov.apply(&mut l.scenario)?;
    Ok(l)
}

#[derive(Debug, Serialize)]
struct Header<'a> {
    command: &'a str,
    scenario: &'a str,
    model: &'a str,
    t0: f64,
    c: f64,
    kappa: f64,
}

fn header<'a>(command: &'a str, l: &'a Loaded, s: &'a Scenario) -> Header<'a> {
    Header {
        command,
        scenario: &l.stem,
        model: s.model.id(),
        t0: s.anchor.t0,
        c: s.anchor.c,
        kappa: s.kappa(),
    }
}

#[derive(Debug, Serialize)]
pub struct CheckReport<'a> {
    #[serde(flatten)]
    header: Header<'a>,
    pub accepted: bool,
    pub verdicts: Vec<TheoremVerdict>,
}

fn verdicts(s: &Scenario) -> Result<Vec<TheoremVerdict>, CliError> {
    let eq = s.equation()?;
    let opts = VerdictOptions::new(s.check.window, s.check.grid_step);
    s.theorems()
        .into_iter()
        .map(|id| theorem_verdict(&eq, id, &opts).map_err(|e| CliError::Config(format!("{id}: {e}"))))
        .collect()
}

pub fn run_check(l: &Loaded, ov: &Overrides) -> Result<Outcome, CliError> {
    let s = &l.scenario;
    let verdicts = verdicts(s)?;
    let accepted = verdicts.iter().all(|v| v.accepted());
    for v in &verdicts {
        eprintln!("{}: {:?}", v.theorem, v.status);
    }
    let report = CheckReport {
        header: header("check", l, s),
        accepted,
        verdicts,
    };
    let path = resolve(&ov.out_dir(), &l.out_name(&s.outputs.check_report, ".check.json"));
    write_json(&path, &report)?;
    Ok(if accepted { Outcome::Ok } else { Outcome::CheckFailed })
}

#[derive(Debug, Clone, Serialize)]
pub struct Failure {
    pub kind: String,
    pub message: String,
    /// Blow-up time, when that is the failure.
    pub t: Option<f64>,
    /// How far the written trajectory reaches.
    pub reach: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryInfo {
    pub file: String,
    pub rows: usize,
    pub knots: usize,
    pub stride: usize,
    pub start: Option<f64>,
    pub end: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConsistencyReport {
    pub reintegration_residual: f64,
    pub unclamped_sup_diff: f64,
    pub pass: bool,
}

/// Shooting re-integration must hit `c` to this.
pub const REINTEGRATION_TOL: f64 = 1e-10;
/// Clamped and unclamped runs must agree on the left to this.
pub const CLAMP_INERT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct RequirementResult {
    pub id: Requirement,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct SolveReport<'a> {
    #[serde(flatten)]
    header: Header<'a>,
    pub status: Outcome,
    pub failure: Option<Failure>,
    pub trajectory: TrajectoryInfo,
    pub solve: Option<SolveResult>,
    pub consistency: Option<ConsistencyReport>,
    pub properties: Option<PropertyReport>,
    pub requirements: Vec<RequirementResult>,
    pub passed: bool,
}

fn requirement_flags(
    s: &Scenario,
    p: &PropertyReport,
) -> Vec<RequirementResult> {
    let tol = &s.verify.thresholds;
    s.verify
        .require
        .iter()
        .map(|&id| {
            let pass = match id {
                Requirement::Band => p.bounds.pass,
                Requirement::LeftPositive => p.positivity.strict_pass,
                Requirement::Nonnegative => p.positivity.min >= -tol.band_tol,
                Requirement::Monotone => p.monotone.pass,
                Requirement::LeftLimitZero => {
                    p.left_limit.status == fdelab_core::analysis::LimitStatus::Converged
                        && p.left_limit.value.abs() < s.verify.left_limit_max
                }
                Requirement::ForwardPositive => {
                    p.forward_positivity.map(|f| f.strict_pass).unwrap_or(false)
                }
                Requirement::RightDichotomy => p
                    .right_limit
                    .map(|r| matches!(r.kind, RightKind::LimitToKappa | RightKind::OscillatesAboutKappa))
                    .unwrap_or(false),
            };
            RequirementResult { id, pass }
        })
        .collect()
}

/// Everything `solve` computes, before anything is written.
struct Solved {
    result: Option<SolveResult>,
    trajectory: Option<Trajectory>,
    failure: Option<Failure>,
    consistency: Option<ConsistencyReport>,
}

fn failure(kind: &str, e: &SolveError, t: Option<f64>, reach: Option<f64>) -> Failure {
    Failure {
        kind: kind.into(),
        message: e.to_string(),
        t,
        reach,
    }
}

fn solve_core(s: &Scenario) -> Result<Solved, CliError> {
    let eq = s.equation()?;
    let cfg = &s.solve;
    let (result, mut fail) = match limit_scheme(&eq, cfg) {
        Ok(r) => (r, None),
        Err(SolveError::NotConverged { result }) => {
            let reach = result.trajectory.end();
            let f = failure(
                "not-converged",
                &SolveError::NotConverged { result: result.clone() },
                None,
                Some(reach),
            );
            (*result, Some(f))
        }
        Err(SolveError::Model(e)) => return Err(CliError::Config(e.to_string())),
        Err(e) => {
            let kind = match &e {
                SolveError::NoBracket { .. } => "no-bracket",
                SolveError::ShootNotConverged { .. } => "shoot-not-converged",
                _ => "blow-up",
            };
            let (t, traj) = match e {
                SolveError::BlowUp { t, ref partial } => (Some(t), Some((**partial).clone())),
                _ => (None, None),
            };
            let reach = traj.as_ref().map(|p| p.end());
            return Ok(Solved {
                result: None,
                failure: Some(failure(kind, &e, t, reach)),
                trajectory: traj,
                consistency: None,
            });
        }
    };
    let consistency = consistency(&eq, &result, cfg).ok().map(|c| ConsistencyReport {
        reintegration_residual: c.reintegration_residual,
        unclamped_sup_diff: c.unclamped_sup_diff,
        pass: c.reintegration_residual <= REINTEGRATION_TOL && c.unclamped_sup_diff < CLAMP_INERT_TOL,
    });
    let mut trajectory = result.trajectory.clone();
    if let (None, Some(b)) = (&fail, cfg.forward_horizon) {
        match extend_forward(&result, &eq, b, cfg.step) {
            Ok(t) => trajectory = t,
            Err(SolveError::BlowUp { t, partial }) => {
                let reach = partial.end();
                fail = Some(Failure {
                    kind: "blow-up".into(),
                    message: format!("solution blew up at t = {t} (reached {reach})"),
                    t: Some(t),
                    reach: Some(reach),
                });
                trajectory = *partial;
            }
            Err(SolveError::Model(e)) => return Err(CliError::Config(e.to_string())),
            Err(e) => {
                fail = Some(failure("forward", &e, None, Some(trajectory.end())));
            }
        }
    }
    Ok(Solved {
        result: Some(result),
        trajectory: Some(trajectory),
        failure: fail,
        consistency,
    })
}

fn emitted(traj: &Trajectory, full_density: bool) -> (Trajectory, usize) {
    if full_density {
        return (traj.clone(), 1);
    }
    let mut stride = thin_stride(traj.len());
    loop {
        let out = traj.thin(stride);
        if out.len() <= output::MAX_ROWS {
            return (out, stride);
        }
        stride += 1;
    }
}

fn properties(s: &Scenario, traj: &Trajectory) -> Result<Option<PropertyReport>, CliError> {
    let eq = s.equation()?;
    Ok(property_report(&eq, traj, s.verify.window, &s.verify.thresholds).ok())
}

pub fn run_solve(l: &Loaded, ov: &Overrides) -> Result<Outcome, CliError> {
    let s = &l.scenario;
    let solved = solve_core(s)?;
    let out_dir = ov.out_dir();
    let traj_name = l.out_name(&s.outputs.trajectory, ".csv");
    let (written, stride) = match &solved.trajectory {
        Some(t) => {
            let (w, k) = emitted(t, ov.full_density);
            (Some(w), k)
        }
        None => (None, 1),
    };
    write_atomic(&resolve(&out_dir, &traj_name), &trajectory_csv(written.as_ref()))?;
    // Properties are judged on the emitted file so `verify` reproduces them.
    let props = match &written {
        Some(w) => properties(s, w)?,
        None => None,
    };
    let requirements = props.as_ref().map(|p| requirement_flags(s, p)).unwrap_or_default();
    let checks_pass = props.is_some() && requirements.iter().all(|r| r.pass);
    let status = if solved.failure.is_some() {
        Outcome::SolverFailed
    } else if !checks_pass {
        Outcome::CheckFailed
    } else {
        Outcome::Ok
    };
    if let Some(f) = &solved.failure {
        eprintln!("solver failure ({}): {}", f.kind, f.message);
    }
    let report = SolveReport {
        header: header("solve", l, s),
        status,
        failure: solved.failure,
        trajectory: TrajectoryInfo {
            file: traj_name,
            rows: written.as_ref().map(|w| w.len()).unwrap_or(0),
            knots: solved.trajectory.as_ref().map(|t| t.len()).unwrap_or(0),
            stride,
            start: written.as_ref().map(|w| w.start()),
            end: written.as_ref().map(|w| w.end()),
        },
        solve: solved.result,
        consistency: solved.consistency,
        properties: props,
        requirements,
        passed: status == Outcome::Ok,
    };
    let path = resolve(&out_dir, &l.out_name(&s.outputs.report, ".json"));
    write_json(&path, &report)?;
    Ok(status)
}

#[derive(Debug, Serialize)]
pub struct VerifyReport<'a> {
    #[serde(flatten)]
    header: Header<'a>,
    pub trajectory: String,
    pub rows: usize,
    pub properties: PropertyReport,
    pub requirements: Vec<RequirementResult>,
    pub passed: bool,
}

pub fn run_verify(l: &Loaded, ov: &Overrides) -> Result<Outcome, CliError> {
    let s = &l.scenario;
    let out_dir = ov.out_dir();
    // Reported relative to the output directory, like the solve report.
    let (path, name) = match &ov.trajectory {
        Some(p) => (p.clone(), p.display().to_string()),
        None => {
            let name = l.out_name(&s.outputs.trajectory, ".csv");
            (resolve(&out_dir, &name), name)
        }
    };
    let traj = read_trajectory(&path)?;
    let eq = s.equation()?;
    let props = property_report(&eq, &traj, s.verify.window, &s.verify.thresholds)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let requirements = requirement_flags(s, &props);
    let passed = requirements.iter().all(|r| r.pass);
    let report = VerifyReport {
        header: header("verify", l, s),
        trajectory: name,
        rows: traj.len(),
        properties: props,
        requirements,
        passed,
    };
    write_json(&resolve(&out_dir, &l.out_name(&s.outputs.verify_report, ".verify.json")), &report)?;
    Ok(if passed { Outcome::Ok } else { Outcome::CheckFailed })
}

#[derive(Debug, Clone, Serialize)]
pub struct VerdictSummary {
    pub theorem: TheoremId,
    pub status: Status,
    pub c_inside: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub index: usize,
    pub value: f64,
    pub outcome: Outcome,
    pub error: Option<String>,
    pub verdicts: Vec<VerdictSummary>,
    pub accepted: Option<bool>,
    pub failure: Option<String>,
    pub left_limit: Option<f64>,
    pub left_status: Option<String>,
    pub right_kind: Option<String>,
    pub requirements_pass: Option<bool>,
}

fn kebab<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|x| x.as_str().map(String::from))
        .unwrap_or_default()
}

fn sweep_row(l: &Loaded, path: &str, index: usize, value: f64, ov: &Overrides) -> SweepRow {
    let mut row = SweepRow {
        index,
        value,
        outcome: Outcome::Ok,
        error: None,
        verdicts: Vec::new(),
        accepted: None,
        failure: None,
        left_limit: None,
        left_status: None,
        right_kind: None,
        requirements_pass: None,
    };
    let mut run = || -> Result<(), CliError> {
        let mut s = l.with_override(path, value)?;
        ov.apply(&mut s)?;
        let vs = verdicts(&s)?;
        let accepted = vs.iter().all(|v| v.accepted());
        row.verdicts = vs
            .iter()
            .map(|v| VerdictSummary {
                theorem: v.theorem,
                status: v.status,
                c_inside: v.c_inside,
            })
            .collect();
        row.accepted = Some(accepted);
        let solved = solve_core(&s)?;
        if let Some(f) = &solved.failure {
            row.failure = Some(f.kind.clone());
        }
        if let Some(t) = &solved.trajectory {
            if let Some(p) = properties(&s, &emitted(t, ov.full_density).0)? {
                row.left_limit = Some(p.left_limit.value);
                row.left_status = Some(kebab(&p.left_limit.status));
                row.right_kind = p.right_limit.map(|r| kebab(&r.kind));
                row.requirements_pass = Some(requirement_flags(&s, &p).iter().all(|r| r.pass));
            }
        }
        row.outcome = if solved.failure.is_some() {
            Outcome::SolverFailed
        } else if !accepted || row.requirements_pass == Some(false) {
            Outcome::CheckFailed
        } else {
            Outcome::Ok
        };
        Ok(())
    };
    if let Err(e) = run() {
        row.error = Some(e.to_string());
        row.outcome = Outcome::CheckFailed;
    }
    row
}

fn csv_field(v: Option<impl ToString>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn sweep_csv(rows: &[SweepRow]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let head = [
        "index", "value", "outcome", "accepted", "verdicts", "failure", "left_limit",
        "left_status", "right_kind", "requirements_pass", "error",
    ];
    let werr = |e: csv::Error| CliError::Config(format!("sweep table: {e}"));
    w.write_record(head).map_err(werr)?;
    for r in rows {
        let verdicts: Vec<String> = r
            .verdicts
            .iter()
            .map(|v| format!("{}={}", v.theorem, kebab(&v.status)))
            .collect();
        w.write_record([
            r.index.to_string(),
            format!("{:.16e}", r.value),
            kebab(&r.outcome),
            csv_field(r.accepted),
            verdicts.join(";"),
            csv_field(r.failure.clone()),
            csv_field(r.left_limit.map(|x| format!("{x:.16e}"))),
            csv_field(r.left_status.clone()),
            csv_field(r.right_kind.clone()),
            csv_field(r.requirements_pass),
            csv_field(r.error.clone()),
        ])
        .map_err(werr)?;
    }
    w.into_inner().map_err(|e| CliError::Config(format!("sweep table: {e}")))
}

#[derive(Debug, Serialize)]
struct SweepReport<'a> {
    #[serde(flatten)]
    header: Header<'a>,
    path: &'a str,
    rows: &'a [SweepRow],
}

pub fn run_sweep(l: &Loaded, ov: &Overrides) -> Result<Outcome, CliError> {
    let s = &l.scenario;
    let sweep = s
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("scenario has no [sweep] section".into()))?;
    let out_dir = ov.out_dir();
    let table = l.out_name(&s.outputs.sweep_table, ".sweep.csv");
    let row_dir = out_dir.join(format!("{table}.rows"));
    // Each row lands in its own file first; the table is merged in index order.
    let written = map_range(Exec::default(), sweep.values.len(), |i| {
        let row = sweep_row(l, &sweep.path, i, sweep.values[i], ov);
        write_json(&row_dir.join(format!("row-{i:05}.json")), &row).map(|_| row)
    });
    let rows = written.into_iter().collect::<Result<Vec<_>, _>>()?;
    write_atomic(&resolve(&out_dir, &table), &sweep_csv(&rows)?)?;
    let json_name = format!("{}.json", table.trim_end_matches(".csv"));
    write_json(
        &resolve(&out_dir, &json_name),
        &SweepReport {
            header: header("sweep", l, s),
            path: &sweep.path,
            rows: &rows,
        },
    )?;
    Ok(rows.iter().fold(Outcome::Ok, |acc, r| acc.worst(r.outcome)))
}
