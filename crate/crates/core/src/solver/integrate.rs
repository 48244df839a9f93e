//! Classical RK4 method of steps with Hermite dense output.

use crate::error::Error;
use crate::fde::{Equation, State, Trajectory};
use crate::solver::SolveError;

/// Values above this magnitude are treated as blow-up.
const BLOW_UP: f64 = 1e150;

/// What the solution is before the integration span starts.
#[derive(Debug, Clone)]
pub enum History {
    /// `u ≡ v` up to the start of the span.
    Constant(f64),
    /// A computed trajectory ending at the start of the span.
    Trajectory(Trajectory),
}

/// The accumulated trajectory plus the in-flight stage.
///
/// Inside the current step `[tn, ts]` delayed lookups use the quadratic
/// through `u_n` with slope `k1` that also passes through the stage value.
struct StageView<'a> {
    traj: &'a Trajectory,
    tn: f64,
    un: f64,
    k1: f64,
    ts: f64,
    us: f64,
}

impl State for StageView<'_> {
    fn value(&self, q: f64) -> f64 {
        if q <= self.tn {
            return self.traj.eval(q);
        }
        if q >= self.ts {
            return self.us;
        }
        let ds = self.ts - self.tn;
        let d = q - self.tn;
        let curv = (self.us - self.un - self.k1 * ds) / (ds * ds);
        self.un + self.k1 * d + curv * d * d
    }
}

pub(crate) struct Run {
    pub traj: Trajectory,
    pub clipped: bool,
}

fn rhs<S: State + ?Sized>(
    eq: &Equation,
    state: &S,
    t: f64,
    clamped: bool,
    clipped: &mut bool,
) -> Result<f64, Error> {
    let r = eq.rhs(state, t, clamped)?;
    *clipped |= r.clipped;
    Ok(r.value)
}

/// Advance `traj` (ending at its last knot) to `tb` with step `h`.
pub(crate) fn advance(
    eq: &Equation,
    mut traj: Trajectory,
    tb: f64,
    h: f64,
    clamped: bool,
) -> Result<Run, SolveError> {
    let ta = traj.end();
    let mut clipped = false;
    if !(tb > ta) {
        return Ok(Run { traj, clipped });
    }
    let span = tb - ta;
    let raw = span / h;
    let n = if (raw - raw.round()).abs() < 1e-9 * raw.max(1.0) {
        raw.round() as usize
    } else {
        raw.ceil() as usize
    };
    let n = n.max(1);
    traj.reserve(n);
    let k_start = rhs(eq, &traj, ta, clamped, &mut clipped).map_err(SolveError::Model)?;
    // A longer history keeps its own left slope at ta so its dense output is
    // not bent by the new right slope.
    if traj.len() == 1 {
        traj.set_last_slope(k_start);
    }
    for k in 0..n {
        let tn = traj.end();
        let un = traj.last_value();
        let k1 = if k == 0 { k_start } else { *traj.derivatives().last().unwrap() };
        let tnext = if k + 1 == n { tb } else { ta + (k + 1) as f64 * h };
        let dt = tnext - tn;
        let half = tn + 0.5 * dt;
        let mut view = StageView {
            traj: &traj,
            tn,
            un,
            k1,
            ts: half,
            us: un + 0.5 * dt * k1,
        };
        let k2 = rhs(eq, &view, half, clamped, &mut clipped).map_err(SolveError::Model)?;
        view.us = un + 0.5 * dt * k2;
        let k3 = rhs(eq, &view, half, clamped, &mut clipped).map_err(SolveError::Model)?;
        view.ts = tnext;
        view.us = un + dt * k3;
        let k4 = rhs(eq, &view, tnext, clamped, &mut clipped).map_err(SolveError::Model)?;
        let unext = un + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if !unext.is_finite() || unext.abs() > BLOW_UP {
            return Err(SolveError::BlowUp {
                t: tnext,
                partial: Box::new(traj),
            });
        }
        traj.push(tnext, unext, k4);
        match rhs(eq, &traj, tnext, clamped, &mut clipped) {
            Ok(d) => traj.set_last_slope(d),
            Err(Error::NonFinite { t }) => {
                return Err(SolveError::BlowUp {
                    t,
                    partial: Box::new(traj),
                })
            }
            Err(e) => return Err(SolveError::Model(e)),
        }
    }
    Ok(Run { traj, clipped })
}

pub(crate) fn forward_run(
    eq: &Equation,
    initial: &History,
    ta: f64,
    tb: f64,
    h: f64,
    clamped: bool,
) -> Result<Run, SolveError> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(SolveError::Model(Error::InvalidParameter(format!(
            "step must be positive, got {h}"
        ))));
    }
    if !(tb >= ta) {
        return Err(SolveError::Model(Error::InvalidParameter(format!(
            "span [{ta}, {tb}] is reversed"
        ))));
    }
    let start = match initial {
        History::Constant(v) => Trajectory::point(ta, *v, 0.0),
        History::Trajectory(tr) => {
            if (tr.end() - ta).abs() > 1e-12 * (1.0 + ta.abs()) {
                return Err(SolveError::Model(Error::InvalidParameter(format!(
                    "history ends at {} but the span starts at {ta}",
                    tr.end()
                ))));
            }
            tr.clone()
        }
    };
    advance(eq, start, tb, h, clamped)
}

/// Integrate `eq` over `[ta, tb]` with fixed step `h` from `initial`.
///
/// With a trajectory history the result contains the history followed by
/// the new steps.
pub fn integrate_forward(
    eq: &Equation,
    initial: &History,
    span: (f64, f64),
    h: f64,
    clamped: bool,
) -> Result<Trajectory, SolveError> {
    forward_run(eq, initial, span.0, span.1, h, clamped).map(|r| r.traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fde::{CoeffFunction, DelayTerm, Nonlinearity};

    fn decay() -> Equation {
        Equation::new(
            vec![],
            vec![DelayTerm::new(CoeffFunction::constant(1.0), CoeffFunction::identity())],
            Nonlinearity::zero(),
            1.0,
            0.0,
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn exponential_decay() {
        let tr = integrate_forward(&decay(), &History::Constant(1.0), (0.0, 1.0), 1e-3, false).unwrap();
        assert!((tr.last_value() - (-1.0f64).exp()).abs() < 1e-10);
        assert_eq!(tr.end(), 1.0);
        assert_eq!(tr.len(), 1001);
    }

    #[test]
    fn partial_last_step() {
        let tr = integrate_forward(&decay(), &History::Constant(1.0), (0.0, 1.0), 0.3, false).unwrap();
        assert_eq!(tr.len(), 5);
        assert_eq!(tr.end(), 1.0);
        assert!((tr.last_value() - (-1.0f64).exp()).abs() < 1e-4);
    }

    #[test]
    fn continuation_keeps_history() {
        let eq = decay();
        let a = integrate_forward(&eq, &History::Constant(1.0), (0.0, 0.5), 1e-3, false).unwrap();
        let b = integrate_forward(&eq, &History::Trajectory(a.clone()), (0.5, 1.0), 1e-3, false)
            .unwrap();
        assert_eq!(&b.knots()[..a.len()], a.knots());
        assert!((b.last_value() - (-1.0f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn linear_blow_up_is_reported() {
        let eq = Equation::new(
            vec![DelayTerm::new(CoeffFunction::constant(50.0), CoeffFunction::identity())],
            vec![],
            Nonlinearity::zero(),
            1.0,
            0.0,
            0.0,
        )
        .unwrap();
        let r = integrate_forward(&eq, &History::Constant(1.0), (0.0, 100.0), 1e-2, false);
        match r {
            Err(SolveError::BlowUp { t, partial }) => {
                assert!(t < 100.0);
                assert!(partial.end() < t);
            }
            other => panic!("expected blow-up, got {other:?}"),
        }
    }
}
