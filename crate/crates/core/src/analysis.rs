//! Checks on computed trajectories: band, sign, monotonicity, tail limits,
//! behaviour near plus infinity and equilibrium residuals.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fde::{Equation, Trajectory};
use crate::hypothesis::window::memory_integral;
use crate::hypothesis::Sampling;

/// Tolerances for the trajectory checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyOptions {
    pub band_tol: f64,
    pub monotone_tol: f64,
    pub tail_fraction: f64,
    /// Relative spread below which a tail counts as settled.
    pub spread_tol: f64,
    pub slope_tol: f64,
    pub right_fraction: f64,
    /// Relative distance to kappa accepted as a limit at plus infinity.
    pub kappa_tol: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            band_tol: 1e-9,
            monotone_tol: 1e-10,
            tail_fraction: 0.2,
            spread_tol: 1e-3,
            slope_tol: 1e-4,
            right_fraction: 0.2,
            kappa_tol: 1e-2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandCheck {
    pub pass: bool,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonotoneCheck {
    pub pass: bool,
    pub min_slope: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LimitStatus {
    Converged,
    Unresolved,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LeftLimit {
    pub value: f64,
    pub spread: f64,
    pub slope: f64,
    pub status: LimitStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RightKind {
    LimitToKappa,
    OscillatesAboutKappa,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RightEnd {
    pub kind: RightKind,
    pub crossings: usize,
    pub estimate: f64,
    pub spread: f64,
    pub slope: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Positivity {
    pub min: f64,
    pub strict_pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Residual {
    pub level: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RigidityCondition {
    pub id: &'static str,
    pub consistent: bool,
    pub worst: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Rigidity {
    /// Whether the trajectory sits at kappa on the window at all.
    pub triggered: bool,
    pub deviation: f64,
    pub conditions: Vec<RigidityCondition>,
}

impl Rigidity {
    pub fn consistent(&self) -> bool {
        self.conditions.iter().all(|c| c.consistent)
    }
}

/// Checks of a solution on `[t0 - window, t0]` and, when it reaches past
/// `t0`, on `[t0, end]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyReport {
    pub window: (f64, f64),
    pub bounds: BandCheck,
    pub positivity: Positivity,
    pub monotone: MonotoneCheck,
    pub left_limit: LeftLimit,
    pub forward_positivity: Option<Positivity>,
    pub right_limit: Option<RightEnd>,
    pub equilibrium_residuals: Vec<Residual>,
}

/// Knots plus segment midpoints.
fn sample_values(traj: &Trajectory) -> impl Iterator<Item = f64> + '_ {
    traj.sample_points().map(|t| traj.eval(t))
}

/// Whether `lo - tol <= u <= hi + tol` at every knot and midpoint.
pub fn verify_band(traj: &Trajectory, lo: f64, hi: f64, tol: f64) -> BandCheck {
    let (min, max) = sample_values(traj).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), u| {
        (a.min(u), b.max(u))
    });
    BandCheck {
        pass: min >= lo - tol && max <= hi + tol,
        min,
        max,
    }
}

/// Whether every stored derivative is at least `-tol`.
pub fn verify_monotone(traj: &Trajectory, tol: f64) -> MonotoneCheck {
    let min_slope = traj.derivatives().iter().copied().fold(f64::INFINITY, f64::min);
    MonotoneCheck {
        pass: min_slope >= -tol,
        min_slope,
    }
}

pub fn positivity(traj: &Trajectory) -> Positivity {
    let min = sample_values(traj).fold(f64::INFINITY, f64::min);
    Positivity {
        min,
        strict_pass: min > 0.0,
    }
}

struct Tail {
    mean: f64,
    spread: f64,
    slope: f64,
}

fn tail_stats(traj: &Trajectory, lo: f64, hi: f64) -> Tail {
    let mut n = 0usize;
    let mut sum = 0.0;
    let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut slope: f64 = 0.0;
    for (i, &t) in traj.knots().iter().enumerate() {
        if t < lo || t > hi {
            continue;
        }
        let u = traj.values()[i];
        n += 1;
        sum += u;
        min = min.min(u);
        max = max.max(u);
        slope = slope.max(traj.derivatives()[i].abs());
    }
    if n == 0 {
        let u = traj.eval(lo);
        return Tail {
            mean: u,
            spread: 0.0,
            slope: traj.derivative(lo).abs(),
        };
    }
    Tail {
        mean: sum / n as f64,
        spread: max - min,
        slope,
    }
}

/// Mean, spread and largest slope over the oldest `tail_fraction` of the
/// domain, with default thresholds.
pub fn estimate_left_limit(traj: &Trajectory, tail_fraction: f64) -> LeftLimit {
    estimate_left_limit_with(traj, tail_fraction, &VerifyOptions::default())
}

pub fn estimate_left_limit_with(traj: &Trajectory, tail_fraction: f64, opts: &VerifyOptions) -> LeftLimit {
    let (a, b) = (traj.start(), traj.end());
    let tail = tail_stats(traj, a, a + tail_fraction * (b - a));
    let settled =
        tail.spread < opts.spread_tol * (1.0 + tail.mean.abs()) && tail.slope < opts.slope_tol;
    LeftLimit {
        value: tail.mean,
        spread: tail.spread,
        slope: tail.slope,
        status: if settled {
            LimitStatus::Converged
        } else {
            LimitStatus::Unresolved
        },
    }
}

/// Strict sign changes of `values - level`; exact touches are skipped.
fn crossings(values: &[f64], level: f64) -> usize {
    let mut last = 0.0f64;
    let mut count = 0;
    for &u in values {
        let d = u - level;
        if d == 0.0 {
            continue;
        }
        if last != 0.0 && (d > 0.0) != (last > 0.0) {
            count += 1;
        }
        last = d;
    }
    count
}

/// Behaviour on the newest `window_fraction` of the domain, with default
/// thresholds.
pub fn classify_right_end(traj: &Trajectory, kappa: f64, window_fraction: f64) -> RightEnd {
    classify_right_end_with(traj, kappa, window_fraction, &VerifyOptions::default())
}

pub fn classify_right_end_with(
    traj: &Trajectory,
    kappa: f64,
    window_fraction: f64,
    opts: &VerifyOptions,
) -> RightEnd {
    let (a, b) = (traj.start(), traj.end());
    let lo = b - window_fraction * (b - a);
    let from = traj.knots().partition_point(|&t| t < lo);
    let cross = crossings(&traj.values()[from..], kappa);
    let tail = tail_stats(traj, lo, b);
    let kind = if cross >= 2 {
        RightKind::OscillatesAboutKappa
    } else if tail.spread < opts.spread_tol * (1.0 + tail.mean.abs())
        && tail.slope < opts.slope_tol
        && (tail.mean - kappa).abs() < opts.kappa_tol * kappa
    {
        RightKind::LimitToKappa
    } else {
        RightKind::Other
    };
    RightEnd {
        kind,
        crossings: cross,
        estimate: tail.mean,
        spread: tail.spread,
        slope: tail.slope,
    }
}

/// `max |RHS|` on the constant trajectory `level` at `t_samples`.
pub fn equilibrium_residual(eq: &Equation, level: f64, t_samples: &[f64]) -> Result<f64> {
    let flat = Trajectory::point(t_samples.first().copied().unwrap_or(eq.t0), level, 0.0);
    let mut worst: f64 = 0.0;
    for &t in t_samples {
        worst = worst.max(eq.rhs(&flat, t, false)?.value.abs());
    }
    Ok(worst)
}

/// Necessary conditions for a solution identically equal to kappa on
/// `[t0 - window, t0]`: equal linear coefficients, `f` vanishing on the
/// constant kappa, and no memory in the subtracted term.
pub fn rigidity_check_r27(
    eq: &Equation,
    traj: &Trajectory,
    t0: f64,
    window: f64,
) -> Result<Rigidity> {
    const TRIGGER: f64 = 1e-6;
    const TOL: f64 = 1e-12;
    let deviation = traj
        .knots()
        .iter()
        .zip(traj.values())
        .filter(|(t, _)| **t >= t0 - window && **t <= t0)
        .map(|(_, u)| (u - eq.kappa).abs())
        .fold(0.0, f64::max);
    let triggered = deviation < TRIGGER;
    let mut conditions = Vec::new();
    if triggered {
        let s = Sampling::new(t0, window, Sampling::DEFAULT_STEP)?;
        let flat = Trajectory::point(t0, eq.kappa, 0.0);
        let (mut dp, mut dh, mut mem) = (0.0f64, 0.0f64, 0.0f64);
        for t in s.left_grid() {
            let p0: f64 = eq.ell0.iter().map(|d| d.coefficient.eval(t)).sum();
            let p1: f64 = eq.ell1.iter().map(|d| d.coefficient.eval(t)).sum();
            dp = dp.max((p0 - p1).abs());
            dh = dh.max(eq.f_value(&flat, t, false)?.abs());
            let mut m = 0.0;
            for d in &eq.ell1 {
                m += memory_integral(&d.coefficient, &d.deviation, t)?;
            }
            mem = mem.max(m);
        }
        conditions = vec![
            RigidityCondition {
                id: "p0-equals-p1",
                consistent: dp <= TOL,
                worst: dp,
            },
            RigidityCondition {
                id: "h-zero-at-kappa",
                consistent: dh <= TOL,
                worst: dh,
            },
            RigidityCondition {
                id: "memory-zero",
                consistent: mem <= TOL,
                worst: mem,
            },
        ];
    }
    Ok(Rigidity {
        triggered,
        deviation,
        conditions,
    })
}

/// Assemble the report for `traj` around `eq.t0`.
///
/// The left checks use `[t0 - window, t0]`; the band is `[0, kappa]`.
/// Residuals are taken at levels 0 and kappa on the window.
pub fn property_report(
    eq: &Equation,
    traj: &Trajectory,
    window: f64,
    opts: &VerifyOptions,
) -> Result<PropertyReport> {
    let t0 = eq.t0;
    let lo = (t0 - window).max(traj.start());
    let left = traj.restrict(lo, t0.min(traj.end()))?;
    let forward = if traj.end() > t0 {
        Some(traj.restrict(t0, traj.end())?)
    } else {
        None
    };
    let s = Sampling::new(t0, window, 0.5)?;
    let samples = s.left_grid();
    let equilibrium_residuals = [0.0, eq.kappa]
        .into_iter()
        .map(|level| {
            equilibrium_residual(eq, level, &samples).map(|residual| Residual { level, residual })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PropertyReport {
        window: (lo, t0),
        bounds: verify_band(&left, 0.0, eq.kappa, opts.band_tol),
        positivity: positivity(&left),
        monotone: verify_monotone(&left, opts.monotone_tol),
        left_limit: estimate_left_limit_with(&left, opts.tail_fraction, opts),
        forward_positivity: forward.as_ref().map(positivity),
        right_limit: forward
            .as_ref()
            .map(|f| classify_right_end_with(f, eq.kappa, opts.right_fraction, opts)),
        equilibrium_residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..=n).map(|k| a + (b - a) * k as f64 / n as f64).collect()
    }

    #[test]
    fn band_examples() {
        let half = Trajectory::constant(0.5, -10.0, 0.0).unwrap();
        assert!(verify_band(&half, 0.0, 1.0, 0.0).pass);
        let e = Trajectory::from_fn(&grid(0.0, 5.0, 500), |t| (-t).exp(), |t| -(-t).exp()).unwrap();
        let b = verify_band(&e, 0.0, 0.5, 1e-12);
        assert!(!b.pass);
        assert_eq!(b.max, 1.0);
    }

    #[test]
    fn monotone_examples() {
        let flat = Trajectory::constant(0.3, -1.0, 0.0).unwrap();
        let m = verify_monotone(&flat, 0.0);
        assert!(m.pass && m.min_slope == 0.0);
        let e = Trajectory::from_fn(&grid(0.0, 5.0, 50), |t| (-t).exp(), |t| -(-t).exp()).unwrap();
        assert!(!verify_monotone(&e, 1e-10).pass);
    }

    #[test]
    fn left_limit_examples() {
        let zero = Trajectory::constant(0.0, -10.0, 0.0).unwrap();
        let l = estimate_left_limit(&zero, 0.2);
        assert_eq!(l.value, 0.0);
        assert_eq!(l.status, LimitStatus::Converged);
        let s = Trajectory::from_fn(&grid(-100.0, 0.0, 10000), f64::sin, f64::cos).unwrap();
        let l = estimate_left_limit(&s, 0.2);
        assert_eq!(l.status, LimitStatus::Unresolved);
        assert!((l.spread - 2.0).abs() < 1e-3);
    }

    #[test]
    fn right_end_examples() {
        let k = Trajectory::constant(1.0, 0.0, 100.0).unwrap();
        assert_eq!(classify_right_end(&k, 1.0, 0.2).kind, RightKind::LimitToKappa);
        let s = Trajectory::from_fn(
            &grid(0.0, 100.0, 10000),
            |t| 1.0 + 0.1 * t.sin(),
            |t| 0.1 * t.cos(),
        )
        .unwrap();
        assert_eq!(classify_right_end(&s, 1.0, 0.2).kind, RightKind::OscillatesAboutKappa);
        let low = Trajectory::constant(0.5, 0.0, 100.0).unwrap();
        assert_eq!(classify_right_end(&low, 1.0, 0.2).kind, RightKind::Other);
    }

    #[test]
    fn touching_is_not_crossing() {
        assert_eq!(crossings(&[0.5, 1.0, 0.5, 1.0, 0.7], 1.0), 0);
        assert_eq!(crossings(&[0.5, 1.0, 1.5, 0.5], 1.0), 2);
    }
}
