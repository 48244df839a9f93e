//! Limit machinery: φ, ω and σ, divergence and limsup heuristics, and the
//! sublinear-growth test for majorants.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fde::{Builtin, CoeffFunction, Interp, Majorant};
use crate::hypothesis::window::{integrate, integrate_signed, memory_integral};
use crate::hypothesis::{Sampling, Status};
use crate::par::{map_range, try_map_range};
use crate::quad::{adaptive_simpson, DEFAULT_TOL};
use crate::roots::bisect;

/// `φ(t) = 1 / (t0 + 1 - t)^2`, with `∫_{-∞}^{t0} φ = 1`.
pub fn build_phi(t0: f64) -> CoeffFunction {
    CoeffFunction::builtin(Builtin::InverseSquare { t0, scale: 1.0 })
}

/// Solve `∫_{w(t)}^t f = level` for every sampled `t` of the window, with
/// `w(t)` searched down to `t0 - 2 window`.
fn solve_lower_limit<F>(f: F, level: f64, s: &Sampling) -> Result<CoeffFunction>
where
    F: Fn(f64) -> f64 + Sync + Send,
{
    if !(level > 0.0) || !level.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "level must be positive and finite, got {level}"
        )));
    }
    let sample = s.left_grid();
    let n = sample.len() - 1;
    let h = s.window / n as f64;
    // fine grid over [t0 - 2 window, t0]; sample[j] == fine[n + j]
    let fine: Vec<f64> = (0..=2 * n).map(|k| s.t0 - (2 * n - k) as f64 * h).collect();
    let cells = map_range(s.exec, 2 * n, |k| {
        adaptive_simpson(&f, fine[k], fine[k + 1], DEFAULT_TOL)
    });
    // tail[k] = ∫_{fine[k]}^{t0} f
    let mut tail = vec![0.0; fine.len()];
    for k in (0..cells.len()).rev() {
        tail[k] = tail[k + 1] + cells[k];
    }
    let omega = try_map_range(s.exec, sample.len(), |j| {
        let idx = n + j;
        let t = fine[idx];
        let target = tail[idx] + level;
        if tail[0] < target {
            return Err(Error::WindowTooShort {
                t,
                level,
                reached: tail[0] - tail[idx],
                lowest: fine[0],
            });
        }
        // last k < idx with tail[k] >= target
        let k = tail[..idx].partition_point(|&v| v >= target) - 1;
        let (lo, hi) = (fine[k], fine[k + 1]);
        let base = tail[k + 1];
        let g = |w: f64| target - base - adaptive_simpson(&f, w, hi, DEFAULT_TOL);
        let b = bisect(g, lo, hi, 0.0, 200);
        Ok(b.hi.min(t))
    })?;
    CoeffFunction::from_columns(sample, omega, Interp::Linear)
}

/// `ω` with `∫_{ω(t)}^t (g + φ) = level` on the window; constant past `t0`.
pub fn build_omega(g: &CoeffFunction, level: f64, s: &Sampling) -> Result<CoeffFunction> {
    for t in s.left_grid() {
        g.eval_nonneg("g", t)?;
    }
    let phi = build_phi(s.t0);
    solve_lower_limit(|x| g.eval(x) + phi.eval(x), level, s)
}

/// Diagnostic memory `σ` with `∫_{σ(t)}^t (P1 + ε φ) = M + ε`, where
/// `P1(t) = p1(t) exp(e ∫_{mu1(t)}^t p1)` and `ε` splits the slack between
/// `c` and `κ e^{-M}` in log scale.
pub fn build_sigma(
    p1: &CoeffFunction,
    mu1: &CoeffFunction,
    m_mu: f64,
    kappa: f64,
    c: f64,
    s: &Sampling,
) -> Result<CoeffFunction> {
    let gap = if c > 0.0 {
        (kappa / c).ln() - m_mu
    } else {
        2.0
    };
    let eps = (0.5 * gap).max(1e-6);
    let phi = build_phi(s.t0);
    let e = std::f64::consts::E;
    solve_lower_limit(
        |x| {
            let p = p1.eval(x).max(0.0);
            let w = if p == 0.0 {
                0.0
            } else {
                p * (e * memory_integral(p1, mu1, x).unwrap_or(0.0)).exp()
            };
            w + eps * phi.eval(x)
        },
        m_mu + eps,
        s,
    )
}

/// Thresholds of the divergence heuristic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DivergenceRule {
    /// `I_last / I_first` above this (with no plateau) means divergence.
    pub ratio: f64,
    /// Increments below this mean the integral has settled.
    pub increment_floor: f64,
    /// Increments each at most this fraction of the previous one mean
    /// geometric convergence.
    pub decay: f64,
}

impl Default for DivergenceRule {
    fn default() -> Self {
        Self {
            ratio: 4.0,
            increment_floor: 1e-8,
            decay: 0.75,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DivergenceKind {
    DivergesOnWindow,
    BoundedOnWindow,
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Divergence {
    pub kind: DivergenceKind,
    pub windows: Vec<f64>,
    pub integrals: Vec<f64>,
}

impl Divergence {
    /// Status of the condition "the integral diverges".
    pub fn diverges_status(&self) -> Status {
        match self.kind {
            DivergenceKind::DivergesOnWindow => Status::PassOnWindow,
            DivergenceKind::BoundedOnWindow => Status::Fail,
            DivergenceKind::Indeterminate => Status::Indeterminate,
        }
    }

    /// Status of the condition "the integral stays finite".
    pub fn bounded_status(&self) -> Status {
        match self.kind {
            DivergenceKind::DivergesOnWindow => Status::Fail,
            DivergenceKind::BoundedOnWindow => Status::PassOnWindow,
            DivergenceKind::Indeterminate => Status::Indeterminate,
        }
    }
}

/// Classify `lim ∫_t^{t0} p` as `t → -∞` from `I_k = ∫_{t0 - T_k}^{t0} p`.
pub fn check_limit_divergence(
    p: &CoeffFunction,
    t0: f64,
    windows: &[f64],
    rule: &DivergenceRule,
) -> Result<Divergence> {
    if windows.is_empty() || windows.windows(2).any(|w| !(w[1] > w[0])) || windows[0] <= 0.0 {
        return Err(Error::InvalidParameter(
            "window sequence must be positive and strictly increasing".into(),
        ));
    }
    let mut integrals = Vec::with_capacity(windows.len());
    let mut acc = integrate(p, t0 - windows[0], t0)?;
    integrals.push(acc);
    for w in windows.windows(2) {
        acc += integrate(p, t0 - w[1], t0 - w[0])?;
        integrals.push(acc);
    }
    Ok(Divergence {
        kind: classify_growth(&integrals, rule),
        windows: windows.to_vec(),
        integrals,
    })
}

fn classify_growth(integrals: &[f64], rule: &DivergenceRule) -> DivergenceKind {
    let first = integrals[0];
    let last = *integrals.last().unwrap();
    let inc: Vec<f64> = integrals.windows(2).map(|w| w[1] - w[0]).collect();
    let Some(&last_inc) = inc.last() else {
        return DivergenceKind::Indeterminate;
    };
    if last_inc.abs() < rule.increment_floor {
        return DivergenceKind::BoundedOnWindow;
    }
    let geometric =
        inc.len() >= 2 && inc.windows(2).all(|w| w[1] >= 0.0 && w[1] <= rule.decay * w[0]);
    if geometric {
        return DivergenceKind::BoundedOnWindow;
    }
    let floor = inc.iter().copied().fold(f64::INFINITY, f64::min);
    if first > 0.0 && last / first > rule.ratio && floor > rule.increment_floor {
        return DivergenceKind::DivergesOnWindow;
    }
    DivergenceKind::Indeterminate
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Limsup {
    pub value: f64,
    pub positive: bool,
    /// Positive but below `1e-3`: an honest limsup could still be zero.
    pub near_zero: bool,
}

pub const LIMSUP_FLOOR: f64 = 1e-9;

pub(crate) fn limsup_on<F>(f: F, omega: &CoeffFunction, s: &Sampling, grid: &[f64]) -> Result<Limsup>
where
    F: Fn(f64) -> f64 + Sync + Send,
{
    let vals = try_map_range(s.exec, grid.len(), |i| {
        let t = grid[i];
        let lo = omega.eval_retarded("omega", t)?;
        Ok(integrate_signed(&f, lo, t))
    })?;
    let value = vals.into_iter().fold(f64::NEG_INFINITY, f64::max);
    let positive = value > LIMSUP_FLOOR;
    Ok(Limsup {
        value,
        positive,
        near_zero: positive && value < 1e-3,
    })
}

/// Oldest third of the left window.
pub(crate) fn oldest_third(s: &Sampling) -> Vec<f64> {
    let g = s.left_grid();
    let cut = s.t0 - 2.0 * s.window / 3.0;
    g.into_iter().filter(|&t| t <= cut + 1e-12).collect()
}

/// Newest third of the right window.
pub(crate) fn newest_third(s: &Sampling) -> Vec<f64> {
    let g = s.right_grid();
    let cut = s.t0 + 2.0 * s.window / 3.0;
    g.into_iter().filter(|&t| t >= cut - 1e-12).collect()
}

/// `max ∫_{ω(t)}^t p` over the oldest third of the window.
pub fn check_window_limsup(p: &CoeffFunction, omega: &CoeffFunction, s: &Sampling) -> Result<Limsup> {
    limsup_on(|x| p.eval(x), omega, s, &oldest_third(s))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Growth {
    pub status: Status,
    pub xs: Vec<f64>,
    /// `r_k = (1/x_k) ∫_{t0}^b q(s, x_k) ds`.
    pub ratios: Vec<f64>,
}

/// Sublinearity certificate for a majorant on `[t0, b]`.
pub fn check_growth_35(q: &Majorant, t0: f64, b: f64, xs: &[f64]) -> Result<Growth> {
    if !(b > t0) || xs.len() < 2 || xs.windows(2).any(|w| !(w[1] > w[0])) || xs[0] <= 0.0 {
        return Err(Error::InvalidParameter(
            "growth test needs b > t0 and an increasing positive x sequence".into(),
        ));
    }
    let time = adaptive_simpson(|s| q.time.eval(s), t0, b, DEFAULT_TOL);
    let ratios: Vec<f64> = xs.iter().map(|&x| time * q.level.eval(x) / x).collect();
    let first = ratios[0];
    let last = *ratios.last().unwrap();
    let ok = if ratios.iter().all(|&r| r == 0.0) {
        true
    } else {
        let half = ratios.len() / 2;
        let tail_down = ratios[half..].windows(2).all(|w| w[1] <= w[0]);
        tail_down && last < ratios[ratios.len() - 2] && last < 1e-3 * first
    };
    Ok(Growth {
        status: Status::on_window(ok),
        xs: xs.to_vec(),
        ratios,
    })
}

/// `10^k` for `k = 0..=6`, scaled.
pub fn default_growth_points(scale: f64) -> Vec<f64> {
    (0..=6).map(|k| scale * 10f64.powi(k)).collect()
}
