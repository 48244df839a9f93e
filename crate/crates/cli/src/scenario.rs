//! Scenario files.
//!
//! A scenario is a TOML document with the sections `[model]`, `[anchor]`,
//! `[solve]`, `[check]`, `[verify]`, `[outputs]` and optionally `[sweep]`.
//! Unknown keys anywhere are rejected.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use fdelab_core::analysis::VerifyOptions;
use fdelab_core::fde::{CoeffFunction, DistributedTerm, Equation, PointwiseH, ScalarMap};
use fdelab_core::hypothesis::TheoremId;
use fdelab_core::models::{
    delay_majorant, make_delay_eq, make_deviating_general, make_logistic, make_mackey_glass,
    make_nicholson, make_power_monostable, make_wavefront, DeviatingParts,
};
use fdelab_core::solver::SolveConfig;

use crate::CliError;

fn one() -> f64 {
    1.0
}

/// Which scalar map `G` a delay-type model uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reaction {
    /// `s^p (kappa - s) + s`.
    #[default]
    Power,
    /// `slope * s`, unbounded.
    Linear,
    /// `h ≡ 0` (deviating-general only).
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DelayG {
    #[serde(default)]
    pub g: Reaction,
    #[serde(default = "one")]
    pub p: f64,
    #[serde(default)]
    pub slope: f64,
    #[serde(default = "one")]
    pub kappa: f64,
    pub tau: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Wavefront {
    #[serde(default = "one")]
    pub p: f64,
    #[serde(default = "one")]
    pub kappa: f64,
    pub wave_speed: f64,
    pub r: f64,
}

fn logistic_horizon() -> f64 {
    200.0
}

/// `g0` constant, kernel a single point mass at `t - lag`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Logistic {
    #[serde(default = "one")]
    pub g0: f64,
    #[serde(default = "one")]
    pub kappa: f64,
    #[serde(default = "one")]
    pub lam_exp: f64,
    #[serde(default = "one")]
    pub lag: f64,
    #[serde(default = "one")]
    pub mass: f64,
    #[serde(default = "logistic_horizon")]
    pub horizon: f64,
}

/// `u' = p0 u(t - lag0) - p1 u(t - lag1) + h(t, u(t), u(t - nu_lag))` with
/// `h = G(|y|) - p0(t) y`, or `h ≡ 0`. `p0` switches to `p0_after` past t0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviatingGeneral {
    #[serde(default)]
    pub g: Reaction,
    #[serde(default = "one")]
    pub p: f64,
    #[serde(default)]
    pub slope: f64,
    #[serde(default = "one")]
    pub kappa: f64,
    pub p0: f64,
    pub p0_after: Option<f64>,
    #[serde(default)]
    pub lag0: f64,
    pub p1: f64,
    #[serde(default)]
    pub lag1: f64,
    #[serde(default)]
    pub nu_lag: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Nicholson {
    pub beta: f64,
    pub tau: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MackeyGlass {
    pub beta: f64,
    pub n: f64,
    pub tau: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "kebab-case")]
pub enum ModelSpec {
    DelayG(DelayG),
    Wavefront(Wavefront),
    Logistic(Logistic),
    DeviatingGeneral(DeviatingGeneral),
    Nicholson(Nicholson),
    MackeyGlass(MackeyGlass),
}

impl ModelSpec {
    pub fn id(&self) -> &'static str {
        match self {
            ModelSpec::DelayG(_) => "delay-g",
            ModelSpec::Wavefront(_) => "wavefront",
            ModelSpec::Logistic(_) => "logistic",
            ModelSpec::DeviatingGeneral(_) => "deviating-general",
            ModelSpec::Nicholson(_) => "nicholson",
            ModelSpec::MackeyGlass(_) => "mackey-glass",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Anchor {
    #[serde(default)]
    pub t0: f64,
    pub c: f64,
}

fn check_window() -> f64 {
    40.0
}

fn check_step() -> f64 {
    1e-2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSection {
    #[serde(default)]
    pub theorems: Vec<String>,
    #[serde(default = "check_window")]
    pub window: f64,
    #[serde(default = "check_step")]
    pub grid_step: f64,
}

impl Default for CheckSection {
    fn default() -> Self {
        Self {
            theorems: Vec::new(),
            window: check_window(),
            grid_step: check_step(),
        }
    }
}

/// Named pass/fail properties a solve or verify run must meet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Requirement {
    /// `0 <= u <= kappa` on the left window, up to `band_tol`.
    Band,
    /// `u > 0` at every knot of the left window.
    LeftPositive,
    /// `u >= -band_tol` on the left window.
    Nonnegative,
    /// Stored slopes `>= -monotone_tol` on the left window.
    Monotone,
    /// Left-limit estimate converged and below `left_limit_max` in size.
    LeftLimitZero,
    /// `u > 0` on the forward part.
    ForwardPositive,
    /// Right end tends to or oscillates about kappa.
    RightDichotomy,
}

fn left_limit_max() -> f64 {
    1e-3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    #[serde(default = "check_window")]
    pub window: f64,
    #[serde(default)]
    pub require: Vec<Requirement>,
    #[serde(default = "left_limit_max")]
    pub left_limit_max: f64,
    #[serde(default)]
    pub thresholds: VerifyOptions,
}

impl Default for VerifySection {
    fn default() -> Self {
        Self {
            window: check_window(),
            require: Vec::new(),
            left_limit_max: left_limit_max(),
            thresholds: VerifyOptions::default(),
        }
    }
}

/// File names, relative to `--out-dir`. Missing names derive from the
/// scenario file stem.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    pub trajectory: Option<String>,
    pub report: Option<String>,
    pub check_report: Option<String>,
    pub verify_report: Option<String>,
    pub sweep_table: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// Dotted path to a scalar, e.g. `model.tau`.
    pub path: String,
    #[serde(default)]
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub model: ModelSpec,
    pub anchor: Anchor,
    #[serde(default)]
    pub solve: SolveConfig,
    #[serde(default)]
    pub check: CheckSection,
    #[serde(default)]
    pub verify: VerifySection,
    #[serde(default)]
    pub outputs: Outputs,
    pub sweep: Option<SweepSection>,
}

/// A parsed scenario plus the raw document, kept for sweep overrides.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub scenario: Scenario,
    pub raw: toml::Table,
    pub stem: String,
}

pub fn load(path: &Path) -> Result<Loaded, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scenario".into());
    parse(&text, stem).map_err(|e| match e {
        CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn parse(text: &str, stem: String) -> Result<Loaded, CliError> {
    let scenario: Scenario = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    let raw: toml::Table = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    scenario.validate()?;
    Ok(Loaded { scenario, raw, stem })
}

impl Loaded {
    /// The scenario with the scalar at `path` replaced by `value`.
    pub fn with_override(&self, path: &str, value: f64) -> Result<Scenario, CliError> {
        let mut raw = self.raw.clone();
        set_path(&mut raw, path, value)?;
        let s: Scenario = toml::Value::Table(raw)
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Config(format!("after setting {path}: {e}")))?;
        s.validate()?;
        Ok(s)
    }

    pub fn out_name(&self, field: &Option<String>, suffix: &str) -> String {
        field.clone().unwrap_or_else(|| format!("{}{suffix}", self.stem))
    }
}

fn set_path(table: &mut toml::Table, path: &str, value: f64) -> Result<(), CliError> {
    let bad = |m: &str| CliError::Config(format!("sweep path `{path}`: {m}"));
    let mut parts: Vec<&str> = path.split('.').collect();
    let last = parts.pop().ok_or_else(|| bad("empty"))?;
    let mut cur = table;
    for p in parts {
        cur = cur
            .entry(p)
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| bad(&format!("`{p}` is not a section")))?;
    }
    match cur.get(last) {
        Some(toml::Value::Float(_)) | Some(toml::Value::Integer(_)) | None => {
            cur.insert(last.to_string(), toml::Value::Float(value));
            Ok(())
        }
        Some(_) => Err(bad("does not address a scalar")),
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<(), CliError> {
        for t in &self.check.theorems {
            t.parse::<TheoremId>().map_err(|e| CliError::Config(e.to_string()))?;
        }
        if !(self.check.window > 0.0) || !(self.check.grid_step > 0.0) {
            return Err(CliError::Config("check window and grid_step must be positive".into()));
        }
        if !(self.verify.window > 0.0) {
            return Err(CliError::Config("verify window must be positive".into()));
        }
        self.solve
            .validate(self.anchor.t0)
            .map_err(|e| CliError::Config(format!("[solve] {e}")))?;
        Ok(())
    }

    pub fn theorems(&self) -> Vec<TheoremId> {
        self.check
            .theorems
            .iter()
            .map(|t| t.parse().expect("validated"))
            .collect()
    }

    pub fn kappa(&self) -> f64 {
        match &self.model {
            ModelSpec::DelayG(m) => m.kappa,
            ModelSpec::Wavefront(m) => m.kappa,
            ModelSpec::Logistic(m) => m.kappa,
            ModelSpec::DeviatingGeneral(m) => m.kappa,
            ModelSpec::Nicholson(m) => m.beta.ln(),
            ModelSpec::MackeyGlass(m) => (m.beta - 1.0).powf(1.0 / m.n),
        }
    }

    pub fn equation(&self) -> Result<Equation, CliError> {
        let Anchor { t0, c } = self.anchor;
        let model_err = |e: fdelab_core::Error| CliError::Config(format!("[model] {e}"));
        let eq = match &self.model {
            ModelSpec::DelayG(m) => {
                let g = scalar_map(m.g, m.p, m.slope, m.kappa)?;
                make_delay_eq(g, CoeffFunction::constant(m.tau), t0, c, m.kappa)
            }
            ModelSpec::Wavefront(m) => {
                let g = make_power_monostable(m.p, m.kappa).map_err(model_err)?;
                make_wavefront(g, m.wave_speed, m.r, t0, c, m.kappa)
            }
            ModelSpec::Logistic(m) => {
                let kernel = DistributedTerm::point_mass(m.lag, m.mass).map_err(model_err)?;
                make_logistic(
                    CoeffFunction::constant(m.g0),
                    kernel,
                    m.kappa,
                    m.lam_exp,
                    t0,
                    c,
                    m.horizon,
                )
            }
            ModelSpec::DeviatingGeneral(m) => {
                let after = m.p0_after.unwrap_or(m.p0);
                let p0 = if after == m.p0 {
                    CoeffFunction::constant(m.p0)
                } else {
                    CoeffFunction::step(t0, m.p0, after)
                };
                let (h, majorant) = if m.g == Reaction::Zero {
                    let zero: Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync> =
                        Arc::new(|_, _, _| 0.0);
                    (PointwiseH::Custom(zero), None)
                } else {
                    let g = scalar_map(m.g, m.p, m.slope, m.kappa)?;
                    let q = delay_majorant(&g, m.kappa, 1.0).map_err(model_err)?;
                    (PointwiseH::DelayReaction { g, p0: p0.clone() }, Some(q))
                };
                make_deviating_general(
                    DeviatingParts {
                        p0,
                        mu0: CoeffFunction::shift(m.lag0),
                        p1: CoeffFunction::constant(m.p1),
                        mu1: CoeffFunction::shift(m.lag1),
                        h,
                        nu: CoeffFunction::shift(m.nu_lag),
                        majorant,
                    },
                    t0,
                    c,
                    m.kappa,
                )
            }
            ModelSpec::Nicholson(m) => make_nicholson(m.beta, CoeffFunction::constant(m.tau), t0, c),
            ModelSpec::MackeyGlass(m) => {
                make_mackey_glass(m.beta, m.n, CoeffFunction::constant(m.tau), t0, c)
            }
        };
        eq.map_err(model_err)
    }
}

fn scalar_map(kind: Reaction, p: f64, slope: f64, kappa: f64) -> Result<ScalarMap, CliError> {
    match kind {
        Reaction::Power => {
            make_power_monostable(p, kappa).map_err(|e| CliError::Config(format!("[model] {e}")))
        }
        Reaction::Linear => Ok(ScalarMap::Linear { slope }),
        Reaction::Zero => Err(CliError::Config(
            "[model] g = \"zero\" is only available for deviating-general".into(),
        )),
    }
}

/// Resolve an output name against the output directory.
pub fn resolve(out_dir: &Path, name: &str) -> PathBuf {
    out_dir.join(name)
}

#[cfg(test)]
mod tests {
    use super::*;

    const A1: &str = r#"
[model]
id = "delay-g"
p = 1.0
kappa = 1.0
tau = 0.25

[anchor]
t0 = 0.0
c = 0.3894003915357024

[check]
theorems = ["T6.1"]
"#;

    #[test]
    fn parses_minimal() {
        let l = parse(A1, "a1".into()).unwrap();
        assert_eq!(l.scenario.model.id(), "delay-g");
        assert_eq!(l.scenario.theorems(), vec![TheoremId::DelayFront]);
        assert_eq!(l.scenario.solve, SolveConfig::default());
        l.scenario.equation().unwrap();
    }

    #[test]
    fn rejects_unknown_keys() {
        let bad = A1.replace("tau = 0.25", "tau = 0.25\ntua = 1.0");
        let e = parse(&bad, "x".into()).unwrap_err().to_string();
        assert!(e.contains("tua"), "{e}");
        let bad = format!("{A1}\n[verify.thresholds]\nband_tl = 1.0\n");
        assert!(parse(&bad, "x".into()).is_err());
        let bad = A1.replace("delay-g", "delay-h");
        assert!(parse(&bad, "x".into()).is_err());
    }

    #[test]
    fn rejects_unknown_theorem() {
        let bad = A1.replace("T6.1", "T7.7");
        assert!(matches!(parse(&bad, "x".into()), Err(CliError::Config(_))));
    }

    #[test]
    fn override_sets_scalar() {
        let l = parse(A1, "a1".into()).unwrap();
        let s = l.with_override("model.tau", 0.1).unwrap();
        let ModelSpec::DelayG(m) = &s.model else { panic!() };
        assert_eq!(m.tau, 0.1);
        let s = l.with_override("solve.step", 0.01).unwrap();
        assert_eq!(s.solve.step, 0.01);
        assert!(l.with_override("check.theorems", 1.0).is_err());
        assert!(l.with_override("nothing.here", 1.0).is_err());
        assert!(l.with_override("anchor.c.x", 1.0).is_err());
    }
}
