//! Sampled evaluation of the existence and limit hypotheses.
//!
//! Conditions quantified over `t <= t0` (or over the whole line) are checked
//! on a uniform grid over a finite window. Conditions about limits at
//! minus or plus infinity can only ever pass "on the window".

pub mod limits;
pub mod verdict;
pub mod window;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::Exec;

pub use limits::{
    build_omega, build_phi, build_sigma, check_growth_35, check_limit_divergence,
    check_window_limsup, Divergence, DivergenceKind, DivergenceRule, Growth, Limsup,
};
pub use verdict::{
    admissible_c_interval, theorem_verdict, CInterval, ConditionRow, Derived, TheoremId,
    TheoremVerdict, VerdictOptions,
};
pub use window::{
    check_comparison_217, check_monotone_conditions, check_one_over_e, compute_m_mu, gamma_test,
    lambda_fixed_point, sup_window_integral, MonotoneCheck,
};

/// Absolute slack on the favourable side of every sampled inequality.
pub const INEQ_TOL: f64 = 1e-12;

/// Three-valued outcome of a condition, with the window-limited pass kept
/// distinct from an unconditional one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    PassOnWindow,
    Fail,
    Indeterminate,
}

impl Status {
    pub fn accepted(self) -> bool {
        matches!(self, Status::Pass | Status::PassOnWindow)
    }

    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    /// Window-limited pass for a sampled condition on an infinite range.
    pub fn on_window(ok: bool) -> Self {
        if ok {
            Status::PassOnWindow
        } else {
            Status::Fail
        }
    }

    fn rank(self) -> u8 {
        match self {
            Status::Pass => 3,
            Status::PassOnWindow => 2,
            Status::Indeterminate => 1,
            Status::Fail => 0,
        }
    }

    /// Status of "a or b".
    pub fn either(self, other: Status) -> Status {
        if self.rank() >= other.rank() {
            self
        } else {
            other
        }
    }

    /// Status of "a and b".
    pub fn both(self, other: Status) -> Status {
        if self.rank() <= other.rank() {
            self
        } else {
            other
        }
    }
}

/// Result of a single sampled inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Check {
    pub pass: bool,
    pub value: f64,
    pub threshold: f64,
}

/// The sampling window `[t0 - window, t0]` (and its mirror past `t0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sampling {
    pub t0: f64,
    pub window: f64,
    pub grid_step: f64,
    pub exec: Exec,
}

impl Sampling {
    pub const DEFAULT_STEP: f64 = 1e-2;

    pub fn new(t0: f64, window: f64, grid_step: f64) -> Result<Self> {
        if !t0.is_finite() || !(window > 0.0) || !window.is_finite() || !(grid_step > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "sampling needs finite t0, window > 0 and step > 0 (got {t0}, {window}, {grid_step})"
            )));
        }
        Ok(Self {
            t0,
            window,
            grid_step,
            exec: Exec::default(),
        })
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    fn cells(&self) -> usize {
        let n = self.window / self.grid_step;
        let r = n.round();
        if (n - r).abs() < 1e-9 * n.max(1.0) {
            (r as usize).max(1)
        } else {
            n.ceil() as usize
        }
    }

    /// `[t0 - window, t0]`, ascending, ending exactly at `t0`.
    pub fn left_grid(&self) -> Vec<f64> {
        let n = self.cells();
        let h = self.window / n as f64;
        (0..=n).map(|k| self.t0 - (n - k) as f64 * h).collect()
    }

    /// `(t0, t0 + window]`, ascending.
    pub fn right_grid(&self) -> Vec<f64> {
        let n = self.cells();
        let h = self.window / n as f64;
        (1..=n).map(|k| self.t0 + k as f64 * h).collect()
    }

    /// `[t0 - window, t0 + window]`.
    pub fn whole_grid(&self) -> Vec<f64> {
        let mut g = self.left_grid();
        g.extend(self.right_grid());
        g
    }
}

/// At most `max` roughly evenly spaced entries of `grid`, always keeping
/// both ends.
pub(crate) fn subsample(grid: &[f64], max: usize) -> Vec<f64> {
    if grid.len() <= max || max < 2 {
        return grid.to_vec();
    }
    let n = grid.len() - 1;
    (0..max).map(|i| grid[i * n / (max - 1)]).collect()
}
