//! Terminal-value shooting on `u(a)` for the clamped problem on `[a, t0]`.

use serde::Serialize;

use crate::error::Error;
use crate::fde::{Equation, Trajectory};
use crate::par::map_range;
use crate::solver::integrate::{advance, forward_run, History, Run};
use crate::solver::{SolveConfig, SolveError};

const COARSE_SCAN: usize = 33;
const DENSE_SCAN: usize = 257;
/// Smallest positive start value tried, relative to kappa.
const FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShootMethod {
    /// A scan point already hit the anchor.
    Exact,
    Bisection,
    /// Bisection on geometric midpoints for brackets spanning many decades.
    LogBisection,
    /// `u ≡ 0` up to a departure time, then bisection on that time.
    Departure,
    Secant,
}

/// How a shot was found.
#[derive(Debug, Clone, Serialize)]
pub struct ShootTrace {
    pub a: f64,
    /// `(u(a), u(t0))` pairs from the bracketing scan.
    pub scan: Vec<(f64, f64)>,
    /// Every sign change of `u(t0) - c` seen in the scan, ascending.
    pub brackets: Vec<(f64, f64)>,
    pub chosen: Option<(f64, f64)>,
    pub method: ShootMethod,
    pub iterations: usize,
    pub v: f64,
    pub departure: Option<f64>,
    pub residual: f64,
}

/// A matched trajectory on `[a, t0]`.
#[derive(Debug, Clone)]
pub struct Shot {
    pub trajectory: Trajectory,
    pub trace: ShootTrace,
    /// Whether the clamp changed an argument of `f` during the final run.
    pub clipped: bool,
}

struct Ctx<'a> {
    eq: &'a Equation,
    a: f64,
    t0: f64,
    c: f64,
    h: f64,
}

impl Ctx<'_> {
    fn run(&self, v: f64, departure: Option<f64>) -> Result<Run, SolveError> {
        run_from(self.eq, self.a, self.t0, v, departure, self.h, true)
    }

    /// Terminal mismatch; blow-up counts as an infinite overshoot.
    fn miss(&self, v: f64, departure: Option<f64>) -> Result<(f64, Option<Run>), SolveError> {
        match self.run(v, departure) {
            Ok(r) => Ok((r.traj.last_value() - self.c, Some(r))),
            Err(SolveError::BlowUp { partial, .. }) => {
                let s = if partial.last_value() < 0.0 {
                    f64::NEG_INFINITY
                } else {
                    f64::INFINITY
                };
                Ok((s, None))
            }
            Err(e) => Err(e),
        }
    }
}

fn run_from(
    eq: &Equation,
    a: f64,
    t0: f64,
    v: f64,
    departure: Option<f64>,
    h: f64,
    clamped: bool,
) -> Result<Run, SolveError> {
    match departure {
        None => forward_run(eq, &History::Constant(v), a, t0, h, clamped),
        Some(s) => {
            let start = if s > a {
                Trajectory::from_samples(vec![a, s], vec![0.0, v], vec![0.0, 0.0])?
            } else {
                Trajectory::point(a, v, 0.0)
            };
            advance(eq, start, t0, h, clamped)
        }
    }
}

/// Re-run a shot from its recorded start, optionally without the clamp.
pub fn reintegrate(
    eq: &Equation,
    trace: &ShootTrace,
    t0: f64,
    h: f64,
    clamped: bool,
) -> Result<Trajectory, SolveError> {
    run_from(eq, trace.a, t0, trace.v, trace.departure, h, clamped).map(|r| r.traj)
}

fn sign_change(f0: f64, f1: f64) -> bool {
    (f0 < 0.0 && f1 > 0.0) || (f0 > 0.0 && f1 < 0.0)
}

struct Found {
    v: f64,
    departure: Option<f64>,
    run: Run,
    residual: f64,
    iterations: usize,
    method: ShootMethod,
}

/// Bisection on `[lo, hi]` with `f(lo)` and `f(hi)` of opposite signs.
///
/// `eval` maps a parameter to the mismatch. Geometric midpoints are used
/// when `geometric` is set and the bracket spans more than a factor 4.
fn bisect_on<E>(
    ctx: &Ctx<'_>,
    mut lo: f64,
    mut hi: f64,
    f_lo: f64,
    geometric: bool,
    max_iter: usize,
    tol: f64,
    eval: E,
) -> Result<(f64, Run, f64, usize), SolveError>
where
    E: Fn(f64) -> Result<(f64, Option<Run>), SolveError>,
{
    let lo_negative = f_lo < 0.0;
    let mut best: Option<(f64, Run, f64)> = None;
    for it in 1..=max_iter {
        let mid = if geometric && lo > 0.0 && hi / lo > 4.0 {
            (lo * hi).sqrt()
        } else {
            0.5 * (lo + hi)
        };
        if mid <= lo || mid >= hi {
            break;
        }
        let (fm, run) = eval(mid)?;
        if let Some(run) = run {
            if fm.abs() <= tol {
                return Ok((mid, run, fm, it));
            }
            if best.as_ref().is_none_or(|b| fm.abs() < b.2.abs()) {
                best = Some((mid, run, fm));
            }
        }
        if (fm < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let residual = best.as_ref().map_or(f64::INFINITY, |b| b.2.abs());
    Err(SolveError::ShootNotConverged {
        a: ctx.a,
        iterations: max_iter,
        residual,
    })
}

fn scan(ctx: &Ctx<'_>, cfg: &SolveConfig, kappa: f64, n: usize) -> Result<Vec<(f64, f64)>, SolveError> {
    let rows = map_range(cfg.exec, n, |k| {
        let v = kappa * k as f64 / (n - 1) as f64;
        ctx.miss(v, None).map(|(f, _)| (v, f))
    });
    rows.into_iter().collect()
}

fn brackets_of(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    points
        .windows(2)
        .filter(|w| sign_change(w[0].1, w[1].1))
        .map(|w| (w[0].0, w[1].0))
        .collect()
}

fn first_event(points: &[(f64, f64)], tol: f64) -> Option<Result<f64, (usize, usize)>> {
    for (k, p) in points.iter().enumerate() {
        if p.1.abs() <= tol {
            return Some(Ok(p.0));
        }
        if let Some(q) = points.get(k + 1) {
            if sign_change(p.1, q.1) && q.1.abs() > tol {
                return Some(Err((k, k + 1)));
            }
        }
    }
    None
}

fn solve_bracket(
    ctx: &Ctx<'_>,
    cfg: &SolveConfig,
    kappa: f64,
    (lo, f_lo): (f64, f64),
    (hi, _f_hi): (f64, f64),
) -> Result<Found, SolveError> {
    let tol = cfg.shoot_tol;
    let max = cfg.shoot_max_iter;
    if lo > 0.0 {
        let (v, run, r, it) = bisect_on(ctx, lo, hi, f_lo, false, max, tol, |v| ctx.miss(v, None))?;
        return Ok(Found {
            v,
            departure: None,
            run,
            residual: r,
            iterations: it,
            method: ShootMethod::Bisection,
        });
    }
    let floor = kappa * FLOOR;
    let (f_floor, run_floor) = ctx.miss(floor, None)?;
    if let Some(run) = run_floor.filter(|_| f_floor.abs() <= tol) {
        return Ok(Found {
            v: floor,
            departure: None,
            run,
            residual: f_floor,
            iterations: 1,
            method: ShootMethod::LogBisection,
        });
    }
    if !sign_change(f_lo, f_floor) {
        let (v, run, r, it) =
            bisect_on(ctx, floor, hi, f_floor, true, max, tol, |v| ctx.miss(v, None))?;
        return Ok(Found {
            v,
            departure: None,
            run,
            residual: r,
            iterations: it + 1,
            method: ShootMethod::LogBisection,
        });
    }
    // Even the smallest positive start overshoots: leave zero later instead.
    let (f_end, _) = ctx.miss(floor, Some(ctx.t0))?;
    if !sign_change(f_floor, f_end) {
        return Err(SolveError::NoBracket {
            a: ctx.a,
            min_terminal: ctx.c + f_floor.min(f_end),
            max_terminal: ctx.c + f_floor.max(f_end),
        });
    }
    let (s, run, r, it) = bisect_on(ctx, ctx.a, ctx.t0, f_floor, false, max, tol, |s| {
        ctx.miss(floor, Some(s))
    })?;
    Ok(Found {
        v: floor,
        departure: Some(s),
        run,
        residual: r,
        iterations: it + 2,
        method: ShootMethod::Departure,
    })
}

fn secant(ctx: &Ctx<'_>, cfg: &SolveConfig, kappa: f64, points: &[(f64, f64)]) -> Option<Found> {
    let mut finite: Vec<(f64, f64)> = points.iter().copied().filter(|p| p.1.is_finite()).collect();
    finite.sort_by(|x, y| x.1.abs().total_cmp(&y.1.abs()));
    if finite.len() < 2 {
        return None;
    }
    let (mut v0, mut f0) = finite[1];
    let (mut v1, mut f1) = finite[0];
    for it in 1..=cfg.shoot_max_iter {
        if f1 == f0 {
            return None;
        }
        let v2 = (v1 - f1 * (v1 - v0) / (f1 - f0)).clamp(0.0, kappa);
        if v2 == v1 {
            return None;
        }
        let (f2, run) = ctx.miss(v2, None).ok()?;
        let run = run?;
        if f2.abs() <= cfg.shoot_tol {
            return Some(Found {
                v: v2,
                departure: None,
                run,
                residual: f2,
                iterations: it,
                method: ShootMethod::Secant,
            });
        }
        (v0, f0, v1, f1) = (v1, f1, v2, f2);
    }
    None
}

/// Find `u(a) ∈ [0, kappa]` so that the clamped forward run from the
/// constant history `u(a)` hits `u(t0) = c`.
///
/// When several brackets exist the one with the smallest `u(a)` is used and
/// the rest are kept in the trace.
pub fn shoot_terminal(
    eq: &Equation,
    a: f64,
    t0: f64,
    c: f64,
    cfg: &SolveConfig,
) -> Result<Shot, SolveError> {
    let kappa = eq.kappa;
    if !(0.0..=kappa).contains(&c) {
        return Err(Error::InvalidParameter(format!("anchor {c} outside [0, {kappa}]")).into());
    }
    if !(a < t0) {
        return Err(Error::InvalidParameter(format!("left end {a} must precede t0 = {t0}")).into());
    }
    let ctx = Ctx {
        eq,
        a,
        t0,
        c,
        h: cfg.step,
    };
    let mut points = scan(&ctx, cfg, kappa, COARSE_SCAN)?;
    if first_event(&points, cfg.shoot_tol).is_none() {
        points = scan(&ctx, cfg, kappa, DENSE_SCAN)?;
    }
    let brackets = brackets_of(&points);
    let found = match first_event(&points, cfg.shoot_tol) {
        Some(Ok(v)) => {
            let run = ctx.run(v, None)?;
            let residual = run.traj.last_value() - c;
            (
                Found {
                    v,
                    departure: None,
                    run,
                    residual,
                    iterations: 0,
                    method: ShootMethod::Exact,
                },
                None,
            )
        }
        Some(Err((i, j))) => (
            solve_bracket(&ctx, cfg, kappa, points[i], points[j])?,
            Some((points[i].0, points[j].0)),
        ),
        None => match secant(&ctx, cfg, kappa, &points) {
            Some(f) => (f, None),
            None => {
                let finite = points.iter().map(|p| p.1 + c);
                return Err(SolveError::NoBracket {
                    a,
                    min_terminal: finite.clone().fold(f64::INFINITY, f64::min),
                    max_terminal: finite.fold(f64::NEG_INFINITY, f64::max),
                });
            }
        },
    };
    let (f, chosen) = found;
    let scan = points.iter().map(|&(v, m)| (v, m + c)).collect();
    Ok(Shot {
        trace: ShootTrace {
            a,
            scan,
            brackets,
            chosen,
            method: f.method,
            iterations: f.iterations,
            v: f.v,
            departure: f.departure,
            residual: f.residual.abs(),
        },
        clipped: f.run.clipped,
        trajectory: f.run.traj,
    })
}
