//! Letting the left end recede and continuing past the anchor.

use serde::Serialize;

use crate::fde::{Equation, Trajectory};
use crate::solver::integrate::{forward_run, History};
use crate::solver::shoot::{reintegrate, shoot_terminal, ShootTrace};
use crate::solver::{SolveConfig, SolveError};

#[derive(Debug, Clone, Serialize)]
pub struct SolveResult {
    #[serde(skip)]
    pub trajectory: Trajectory,
    /// Index of the last truncation used, starting at 1.
    pub n_used: usize,
    pub a_used: f64,
    /// `u(a_n)` of the final shot.
    pub v: f64,
    /// Time at which the final shot leaves zero, when it had to.
    pub departure: Option<f64>,
    /// `d_n` for `n = 2, 3, ...`.
    pub cauchy_trace: Vec<f64>,
    pub shoot_traces: Vec<ShootTrace>,
    pub clamp_active: bool,
    pub converged: bool,
}

/// Largest gap between two runs over the knots of `cur` in `[lo, hi]`.
fn sup_gap(cur: &Trajectory, prev: &Trajectory, lo: f64, hi: f64) -> f64 {
    cur.knots()
        .iter()
        .zip(cur.values())
        .filter(|(t, _)| (lo..=hi).contains(*t))
        .map(|(&t, &u)| (u - prev.eval(t)).abs())
        .fold(0.0, f64::max)
}

/// Shoot on `[a_n, t0]` for `n = 1, 2, ...` until consecutive runs agree to
/// `cauchy_tol` on `[t0 - W, t0]`.
///
/// Running out of truncation points returns [`SolveError::NotConverged`]
/// carrying the last result.
pub fn limit_scheme(eq: &Equation, cfg: &SolveConfig) -> Result<SolveResult, SolveError> {
    cfg.validate(eq.t0)?;
    let t0 = eq.t0;
    let lo = t0 - cfg.compact_window;
    let mut prev: Option<Trajectory> = None;
    let mut cauchy_trace = Vec::new();
    let mut shoot_traces = Vec::new();
    let seq = cfg.a_sequence(t0);
    for (n, &a) in seq.iter().enumerate() {
        let shot = shoot_terminal(eq, a, t0, eq.c, cfg)?;
        let mut done = false;
        if let Some(p) = &prev {
            let d = sup_gap(&shot.trajectory, p, lo, t0);
            cauchy_trace.push(d);
            done = d <= cfg.cauchy_tol;
        }
        let last = n + 1 == seq.len();
        shoot_traces.push(shot.trace.clone());
        if done || last {
            let result = SolveResult {
                n_used: n + 1,
                a_used: a,
                v: shot.trace.v,
                departure: shot.trace.departure,
                trajectory: shot.trajectory,
                cauchy_trace,
                shoot_traces,
                clamp_active: shot.clipped,
                converged: done,
            };
            return if done {
                Ok(result)
            } else {
                Err(SolveError::NotConverged {
                    result: Box::new(result),
                })
            };
        }
        prev = Some(shot.trajectory);
    }
    unreachable!("a_count is validated to be at least 1")
}

/// Independent re-runs of the final shot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Consistency {
    /// `|u(t0) - c|` after re-integrating the clamped problem from the
    /// recorded start.
    pub reintegration_residual: f64,
    /// Sup-distance on `[a_N, t0]` between the solution and the unclamped
    /// re-run from the same start.
    pub unclamped_sup_diff: f64,
}

pub fn consistency(
    eq: &Equation,
    result: &SolveResult,
    cfg: &SolveConfig,
) -> Result<Consistency, SolveError> {
    let trace = result
        .shoot_traces
        .last()
        .ok_or_else(|| crate::error::Error::InvalidParameter("result has no shots".into()))?;
    let t0 = eq.t0;
    let clamped = reintegrate(eq, trace, t0, cfg.step, true)?;
    let free = reintegrate(eq, trace, t0, cfg.step, false)?;
    let sup = result
        .trajectory
        .knots()
        .iter()
        .zip(result.trajectory.values())
        .filter(|(t, _)| **t <= t0)
        .map(|(&t, &u)| (u - free.eval(t)).abs())
        .fold(0.0, f64::max);
    Ok(Consistency {
        reintegration_residual: (clamped.last_value() - eq.c).abs(),
        unclamped_sup_diff: sup,
    })
}

/// Continue the solution past `t0` with the unclamped equation.
pub fn extend_forward(
    result: &SolveResult,
    eq: &Equation,
    b: f64,
    h: f64,
) -> Result<Trajectory, SolveError> {
    let history = History::Trajectory(result.trajectory.clone());
    forward_run(eq, &history, result.trajectory.end(), b, h, false).map(|r| r.traj)
}

/// The limit scheme followed by the forward extension to
/// `cfg.forward_horizon`, when one is set.
pub fn solve_global(eq: &Equation, cfg: &SolveConfig) -> Result<SolveResult, SolveError> {
    let mut result = limit_scheme(eq, cfg)?;
    if let Some(b) = cfg.forward_horizon {
        result.trajectory = extend_forward(&result, eq, b, cfg.step)?;
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fde::{CoeffFunction, DelayTerm, Nonlinearity};

    fn balanced(c: f64) -> Equation {
        let term = DelayTerm::new(CoeffFunction::constant(1.0), CoeffFunction::identity());
        Equation::new(vec![term.clone()], vec![term], Nonlinearity::zero(), 1.0, 0.0, c).unwrap()
    }

    fn quick() -> SolveConfig {
        SolveConfig {
            step: 1e-2,
            ..SolveConfig::default()
        }
    }

    #[test]
    fn constants_converge_at_second_truncation() {
        let r = limit_scheme(&balanced(0.4), &quick()).unwrap();
        assert_eq!(r.n_used, 2);
        assert!(r.cauchy_trace[0] <= 1e-12);
        assert!(r.converged && !r.clamp_active);
    }

    #[test]
    fn vacuous_tolerance_stops_at_two() {
        let cfg = SolveConfig {
            cauchy_tol: f64::INFINITY,
            ..quick()
        };
        let r = limit_scheme(&balanced(0.4), &cfg).unwrap();
        assert_eq!(r.n_used, 2);
    }

    #[test]
    fn extension_of_constant_is_constant() {
        let eq = balanced(0.4);
        let r = limit_scheme(&eq, &quick()).unwrap();
        let tr = extend_forward(&r, &eq, 5.0, 1e-2).unwrap();
        assert_eq!(tr.end(), 5.0);
        assert!(tr.values().iter().all(|&u| (u - r.v).abs() < 1e-14));
        assert!((r.v - 0.4).abs() <= 1e-10);
    }
}
