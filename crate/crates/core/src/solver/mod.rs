//! Forward integration, terminal-value shooting and the receding-left-end
//! limit scheme.

mod integrate;
mod scheme;
mod shoot;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::Error;
use crate::fde::Trajectory;
use crate::par::Exec;

pub use integrate::{integrate_forward, History};
pub use scheme::{consistency, extend_forward, limit_scheme, solve_global, Consistency, SolveResult};
pub use shoot::{reintegrate, shoot_terminal, ShootMethod, ShootTrace, Shot};

/// Knobs for the shooting and limit scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveConfig {
    pub step: f64,
    /// `a_n = t0 - a_first * a_ratio^(n-1)`.
    pub a_first: f64,
    pub a_ratio: f64,
    pub a_count: usize,
    pub compact_window: f64,
    pub cauchy_tol: f64,
    pub shoot_tol: f64,
    pub shoot_max_iter: usize,
    pub forward_horizon: Option<f64>,
    #[serde(skip)]
    pub exec: Exec,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            step: 1e-3,
            a_first: 10.0,
            a_ratio: 2.0,
            a_count: 6,
            compact_window: 10.0,
            cauchy_tol: 1e-6,
            shoot_tol: 1e-10,
            shoot_max_iter: 200,
            forward_horizon: None,
            exec: Exec::default(),
        }
    }
}

impl SolveConfig {
    pub fn validate(&self, t0: f64) -> Result<(), Error> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.step > 0.0) || !self.step.is_finite() {
            return bad(format!("step must be positive, got {}", self.step));
        }
        if !(self.a_first > 0.0) || !self.a_first.is_finite() {
            return bad(format!("a_first must be positive, got {}", self.a_first));
        }
        if !(self.a_ratio > 1.0) || !self.a_ratio.is_finite() {
            return bad(format!("a_ratio must exceed 1, got {}", self.a_ratio));
        }
        if self.a_count == 0 {
            return bad("a_count must be at least 1".into());
        }
        if !(self.compact_window > 0.0) {
            return bad(format!("compact_window must be positive, got {}", self.compact_window));
        }
        if !(self.cauchy_tol > 0.0) || !(self.shoot_tol > 0.0) {
            return bad("tolerances must be positive".into());
        }
        if let Some(b) = self.forward_horizon {
            if !(b > t0) || !b.is_finite() {
                return bad(format!("forward horizon {b} must be finite and after t0 = {t0}"));
            }
        }
        Ok(())
    }

    /// The truncation points `a_1 > a_2 > ...`.
    pub fn a_sequence(&self, t0: f64) -> Vec<f64> {
        (0..self.a_count)
            .map(|k| t0 - self.a_first * self.a_ratio.powi(k as i32))
            .collect()
    }
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Model(#[from] Error),

    #[error("solution blew up at t = {t} (reached {})", partial.end())]
    BlowUp { t: f64, partial: Box<Trajectory> },

    #[error("no bracket for u(a) on [0, kappa] at a = {a}: terminal values span [{min_terminal}, {max_terminal}]")]
    NoBracket {
        a: f64,
        min_terminal: f64,
        max_terminal: f64,
    },

    #[error("shooting at a = {a} stopped after {iterations} iterations with |u(t0) - c| = {residual}")]
    ShootNotConverged {
        a: f64,
        iterations: usize,
        residual: f64,
    },

    #[error("limit scheme did not settle: last sup-difference {}", result.cauchy_trace.last().copied().unwrap_or(f64::NAN))]
    NotConverged { result: Box<SolveResult> },
}
