//! Per-theorem assembly of sampled conditions into a verdict.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::fde::{
    CoeffFunction, DelayTerm, Equation, LogisticTerm, Majorant, NonlinearityKind, Origin,
    PointwiseH, ScalarMap,
};
use crate::hypothesis::limits::{
    check_growth_35, check_limit_divergence, default_growth_points, limsup_on, newest_third,
    oldest_third, DivergenceRule,
};
use crate::hypothesis::window::{
    check_comparison_217, compute_m_mu, lambda_fixed_point, monotone_on, one_over_e_on,
    retardation_on, sup_integral_on,
};
use crate::hypothesis::{subsample, Check, Sampling, Status, INEQ_TOL};
use crate::par::{map_range, Exec};

/// Theorem identifiers. The string tokens are the public interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TheoremId {
    /// `T2.5`: bounded solutions on the left, `c ∈ [0, κe^{-M_μ})`.
    BoundedExistence,
    /// `T2.6`: nondecreasing bounded solutions, `c ∈ [0, κ]`.
    MonotoneExistence,
    /// `T2.5r`: as `T2.5` with conditions on the whole line, `c ∈ (0, κe^{-M_μ})`.
    BoundedExistenceGlobal,
    /// `T2.6r`: as `T2.6` with conditions on the whole line.
    MonotoneExistenceGlobal,
    /// `T2.13`: finite left limit when `p1` is integrable.
    LeftLimitIntegrable,
    /// `T2.14`: finite left limit under the comparison conditions.
    LeftLimitComparison,
    /// `C2.3`: left limit is `0` or `κ`.
    LeftLimitDichotomy,
    /// `C2.4`: left limit is `0`, or `u ≡ κ`.
    LeftLimitZeroOrKappa,
    /// `C2.5`: as `C2.4` via unit-window conditions.
    LeftLimitUnitWindow,
    /// `T6.1`: positive fronts of the delay equation, `c ∈ (0, κe^{-M_τ}]`.
    DelayFront,
    /// `T6.2`: logistic equation, `c ∈ (0, κ)`, with the dichotomy at plus infinity.
    LogisticDichotomy,
    /// `R2.7`: necessary conditions for `u ≡ κ` on the left.
    KappaRigidity,
}

impl TheoremId {
    pub const ALL: [TheoremId; 12] = [
        TheoremId::BoundedExistence,
        TheoremId::MonotoneExistence,
        TheoremId::BoundedExistenceGlobal,
        TheoremId::MonotoneExistenceGlobal,
        TheoremId::LeftLimitIntegrable,
        TheoremId::LeftLimitComparison,
        TheoremId::LeftLimitDichotomy,
        TheoremId::LeftLimitZeroOrKappa,
        TheoremId::LeftLimitUnitWindow,
        TheoremId::DelayFront,
        TheoremId::LogisticDichotomy,
        TheoremId::KappaRigidity,
    ];

    pub fn token(self) -> &'static str {
        match self {
            TheoremId::BoundedExistence => "T2.5",
            TheoremId::MonotoneExistence => "T2.6",
            TheoremId::BoundedExistenceGlobal => "T2.5r",
            TheoremId::MonotoneExistenceGlobal => "T2.6r",
            TheoremId::LeftLimitIntegrable => "T2.13",
            TheoremId::LeftLimitComparison => "T2.14",
            TheoremId::LeftLimitDichotomy => "C2.3",
            TheoremId::LeftLimitZeroOrKappa => "C2.4",
            TheoremId::LeftLimitUnitWindow => "C2.5",
            TheoremId::DelayFront => "T6.1",
            TheoremId::LogisticDichotomy => "T6.2",
            TheoremId::KappaRigidity => "R2.7",
        }
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for TheoremId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TheoremId::ALL
            .into_iter()
            .find(|id| id.token().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::UnknownTheorem(s.to_string()))
    }
}

impl Serialize for TheoremId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.token())
    }
}

/// An interval of anchor values with endpoint openness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CInterval {
    pub lower: f64,
    pub upper: f64,
    pub lower_open: bool,
    pub upper_open: bool,
}

impl CInterval {
    pub fn contains(&self, c: f64) -> bool {
        let above = if self.lower_open { c > self.lower } else { c >= self.lower };
        let below = if self.upper_open { c < self.upper } else { c <= self.upper };
        above && below
    }

    pub fn is_empty(&self) -> bool {
        self.upper < self.lower
            || (self.upper == self.lower && (self.lower_open || self.upper_open))
    }
}

impl fmt::Display for CInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}, {}{}",
            if self.lower_open { '(' } else { '[' },
            self.lower,
            self.upper,
            if self.upper_open { ')' } else { ']' }
        )
    }
}

/// The anchor-value interval a theorem guarantees. Limit theorems carry no
/// interval and return `None`.
pub fn admissible_c_interval(which: TheoremId, kappa: f64, m: f64) -> Result<Option<CInterval>> {
    if !(kappa > 0.0) {
        return Err(Error::NonPositiveKappa(kappa));
    }
    if !(m >= 0.0) {
        return Err(Error::InvalidParameter(format!("M must be >= 0, got {m}")));
    }
    let shrunk = kappa * (-m).exp();
    let iv = |lower_open, upper, upper_open| {
        Some(CInterval {
            lower: 0.0,
            upper,
            lower_open,
            upper_open,
        })
    };
    Ok(match which {
        TheoremId::BoundedExistence => iv(false, shrunk, true),
        TheoremId::MonotoneExistence | TheoremId::MonotoneExistenceGlobal => {
            iv(false, kappa, false)
        }
        TheoremId::BoundedExistenceGlobal => iv(true, shrunk, true),
        TheoremId::DelayFront => iv(true, shrunk, false),
        TheoremId::LogisticDichotomy => iv(true, kappa, true),
        _ => None,
    })
}

/// One sampled condition in a verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionRow {
    pub id: String,
    pub status: Status,
    pub value: Option<f64>,
    pub threshold: Option<f64>,
    pub note: Option<String>,
}

impl ConditionRow {
    fn new(id: &str, status: Status) -> Self {
        Self {
            id: id.to_string(),
            status,
            value: None,
            threshold: None,
            note: None,
        }
    }

    fn from_check(id: &str, c: Check, status: Status) -> Self {
        Self {
            value: Some(c.value),
            threshold: Some(c.threshold),
            ..Self::new(id, status)
        }
    }

    fn value(mut self, v: f64) -> Self {
        self.value = Some(v);
        self
    }

    fn threshold(mut self, v: f64) -> Self {
        self.threshold = Some(v);
        self
    }

    fn note(mut self, n: impl Into<String>) -> Self {
        self.note = Some(n.into());
        self
    }
}

/// Quantities computed along the way.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Derived {
    pub m_mu: Option<f64>,
    pub m_mu_sharpened: Option<f64>,
    pub m_tau: Option<f64>,
    pub lambda_star: Option<f64>,
    pub p_star: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremVerdict {
    pub theorem: TheoremId,
    pub status: Status,
    pub conditions: Vec<ConditionRow>,
    pub derived: Derived,
    pub c: f64,
    pub c_interval: Option<CInterval>,
    pub c_inside: Option<bool>,
    pub window: f64,
    pub grid_step: f64,
    pub caveat: String,
}

impl TheoremVerdict {
    pub fn accepted(&self) -> bool {
        self.status.accepted()
    }
}

/// Window and heuristic settings for [`theorem_verdict`].
#[derive(Debug, Clone, PartialEq)]
pub struct VerdictOptions {
    pub window: f64,
    pub grid_step: f64,
    pub exec: Exec,
    pub divergence: DivergenceRule,
}

impl VerdictOptions {
    pub fn new(window: f64, grid_step: f64) -> Self {
        Self {
            window,
            grid_step,
            exec: Exec::default(),
            divergence: DivergenceRule::default(),
        }
    }

    /// `T/8, T/4, T/2, T`.
    pub fn divergence_windows(&self) -> Vec<f64> {
        [8.0, 4.0, 2.0, 1.0].iter().map(|d| self.window / d).collect()
    }
}

/// The equation read in the single-term deviating form
/// `p0 u(mu0) - p1 u(mu1) + h(t, u(t), u(nu(t)))`.
struct Deviating<'a> {
    p0: CoeffFunction,
    mu0: CoeffFunction,
    p1: CoeffFunction,
    mu1: CoeffFunction,
    h: Option<(&'a PointwiseH, &'a CoeffFunction)>,
    majorant: Option<&'a Majorant>,
    kappa: f64,
}

fn single_term(terms: &[DelayTerm], which: &str) -> Result<(CoeffFunction, CoeffFunction)> {
    match terms {
        [] => Ok((CoeffFunction::constant(0.0), CoeffFunction::identity())),
        [t] => Ok((t.coefficient.clone(), t.deviation.clone())),
        _ => Err(Error::ShapeMismatch(format!(
            "{which} has {} terms; the condition calculus needs at most one",
            terms.len()
        ))),
    }
}

impl<'a> Deviating<'a> {
    fn from_equation(eq: &'a Equation) -> Result<Self> {
        let (p0, mu0) = single_term(&eq.ell0, "ell0")?;
        let (p1, mu1) = single_term(&eq.ell1, "ell1")?;
        let h = match &eq.f.kind {
            NonlinearityKind::Zero => None,
            NonlinearityKind::Pointwise { h, nu } => Some((h, nu)),
            NonlinearityKind::Logistic(_) => {
                return Err(Error::ShapeMismatch(
                    "logistic equations are not in pointwise deviating form".into(),
                ))
            }
        };
        Ok(Self {
            p0,
            mu0,
            p1,
            mu1,
            h,
            majorant: eq.f.majorant.as_ref(),
            kappa: eq.kappa,
        })
    }

    fn h(&self, t: f64, x: f64, y: f64) -> f64 {
        match self.h {
            None => 0.0,
            Some((h, _)) => h.eval(t, x, y),
        }
    }

    fn nu(&self) -> CoeffFunction {
        match self.h {
            None => CoeffFunction::identity(),
            Some((_, nu)) => nu.clone(),
        }
    }

    /// `(g, h1)` with `h >= g h1` claimed on `t <= t0`.
    fn lower_bound(&self) -> Option<(CoeffFunction, Box<dyn Fn(f64, f64) -> f64 + Sync + Send>)> {
        match self.h {
            None => Some((CoeffFunction::constant(0.0), Box::new(|_, _| 1.0))),
            Some((h, _)) => {
                let g = h.lower_bound_scale()?;
                let map: ScalarMap = h.scalar_map()?.clone();
                Some((g, Box::new(move |_x, y| map.eval(y) - y)))
            }
        }
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect()
}

/// `min over t, x, y of f(t, x, y)`.
fn grid_min<F>(exec: Exec, ts: &[f64], xs: &[f64], ys: &[f64], f: F) -> f64
where
    F: Fn(f64, f64, f64) -> f64 + Sync + Send,
{
    map_range(exec, ts.len(), |i| {
        let t = ts[i];
        let mut m = f64::INFINITY;
        for &x in xs {
            for &y in ys {
                m = m.min(f(t, x, y));
            }
        }
        m
    })
    .into_iter()
    .fold(f64::INFINITY, f64::min)
}

fn grid_max<F>(exec: Exec, ts: &[f64], xs: &[f64], ys: &[f64], f: F) -> f64
where
    F: Fn(f64, f64, f64) -> f64 + Sync + Send,
{
    -grid_min(exec, ts, xs, ys, |t, x, y| -f(t, x, y))
}

const RIGHT_SAMPLES: usize = 201;

struct Ctx<'a> {
    eq: &'a Equation,
    s: Sampling,
    opts: &'a VerdictOptions,
}

impl<'a> Ctx<'a> {
    fn band(&self) -> Vec<f64> {
        linspace(0.0, self.eq.kappa, 20)
    }

    fn interior(&self) -> Vec<f64> {
        let k = self.eq.kappa;
        (1..20).map(|i| k * i as f64 / 20.0).collect()
    }

    fn right_sub(&self) -> Vec<f64> {
        subsample(&self.s.right_grid(), RIGHT_SAMPLES)
    }

    fn divergence_row(&self, id: &str, p: &CoeffFunction, want_diverge: bool) -> Result<ConditionRow> {
        let d = check_limit_divergence(
            p,
            self.s.t0,
            &self.opts.divergence_windows(),
            &self.opts.divergence,
        )?;
        let status = if want_diverge {
            d.diverges_status()
        } else {
            d.bounded_status()
        };
        let last = *d.integrals.last().unwrap();
        Ok(ConditionRow::new(id, status)
            .value(last)
            .note(format!("integrals {:?} over windows {:?}", d.integrals, d.windows)))
    }
}

// rows for the deviating form

fn h_nonneg_left(c: &Ctx, d: &Deviating) -> ConditionRow {
    let band = c.band();
    let v = grid_min(c.s.exec, &c.s.left_grid(), &band, &band, |t, x, y| d.h(t, x, y));
    ConditionRow::new("h-nonneg-left", Status::from_bool(v >= -INEQ_TOL))
        .value(v)
        .threshold(0.0)
}

fn h_zero_origin(c: &Ctx, d: &Deviating) -> ConditionRow {
    let v = grid_max(c.s.exec, &c.s.left_grid(), &[0.0], &[0.0], |t, x, y| d.h(t, x, y).abs());
    ConditionRow::new("h-zero-at-origin", Status::from_bool(v <= INEQ_TOL))
        .value(v)
        .threshold(0.0)
}

fn h_growth_majorant(c: &Ctx, d: &Deviating) -> Vec<ConditionRow> {
    let Some(q) = d.majorant else {
        return vec![ConditionRow::new("h-growth-majorant", Status::Indeterminate)
            .note("no growth majorant supplied")];
    };
    let k = d.kappa;
    // multiples of κ/20, so |x| + |y| falls on majorant table nodes
    let xs: Vec<f64> = (-40..=40).map(|i| k * i as f64 / 20.0).collect();
    let v = grid_max(c.s.exec, &c.right_sub(), &xs, &xs, |t, x, y| {
        let sgn = if x > 0.0 {
            1.0
        } else if x < 0.0 {
            -1.0
        } else {
            0.0
        };
        d.h(t, x, y) * sgn - q.eval(t, x.abs() + y.abs())
    });
    let mut rows = vec![ConditionRow::new("h-growth-majorant", Status::from_bool(v <= INEQ_TOL))
        .value(v)
        .threshold(0.0)];
    rows.extend(majorant_rows(c, q));
    rows
}

fn majorant_rows(c: &Ctx, q: &Majorant) -> Vec<ConditionRow> {
    let k = c.eq.kappa;
    let ts = subsample(&c.s.right_grid(), 21);
    let xs: Vec<f64> = (0..=800).map(|i| k * i as f64 / 100.0).collect();
    let worst = map_range(c.s.exec, ts.len(), |i| {
        let t = ts[i];
        let mut w = f64::INFINITY;
        let mut prev = q.eval(t, xs[0]);
        w = w.min(prev);
        for &x in &xs[1..] {
            let cur = q.eval(t, x);
            w = w.min(cur).min(cur - prev);
            prev = cur;
        }
        w
    })
    .into_iter()
    .fold(f64::INFINITY, f64::min);
    let mono = ConditionRow::new("majorant-monotone", Status::from_bool(worst >= -INEQ_TOL))
        .value(worst)
        .threshold(0.0);
    let growth = match check_growth_35(q, c.s.t0, c.s.t0 + c.s.window, &default_growth_points(k)) {
        Ok(g) => ConditionRow::new("majorant-sublinear", g.status)
            .value(*g.ratios.last().unwrap())
            .threshold(1e-3 * g.ratios[0])
            .note(format!("ratios {:?}", g.ratios)),
        Err(e) => ConditionRow::new("majorant-sublinear", Status::Indeterminate).note(e.to_string()),
    };
    vec![mono, growth]
}

fn h_nonneg_right(c: &Ctx, d: &Deviating) -> ConditionRow {
    let xs = linspace(0.0, 2.0 * d.kappa, 40);
    let v = grid_min(c.s.exec, &c.right_sub(), &xs, &xs, |t, x, y| d.h(t, x, y));
    ConditionRow::new("h-nonneg-right", Status::from_bool(v >= -INEQ_TOL))
        .value(v)
        .threshold(0.0)
}

fn h_band_right(c: &Ctx, d: &Deviating) -> Vec<ConditionRow> {
    let Some(q) = d.majorant else {
        return vec![ConditionRow::new("h-band-right", Status::Indeterminate)
            .note("no growth majorant supplied")];
    };
    let xs = linspace(0.0, 2.0 * d.kappa, 40);
    let lo = grid_min(c.s.exec, &c.right_sub(), &xs, &xs, |t, x, y| d.h(t, x, y));
    let hi = grid_max(c.s.exec, &c.right_sub(), &xs, &xs, |t, x, y| {
        d.h(t, x, y) - q.eval(t, x + y)
    });
    let mut rows = vec![ConditionRow::new(
        "h-band-right",
        Status::from_bool(lo >= -INEQ_TOL && hi <= INEQ_TOL),
    )
    .value(lo.min(-hi))
    .threshold(0.0)];
    rows.extend(majorant_rows(c, q));
    rows
}

fn retarded_row(c: &Ctx, d: &Deviating, global: bool) -> Result<ConditionRow> {
    let grid = if global {
        c.s.whole_grid()
    } else {
        c.s.left_grid()
    };
    let mut worst = f64::NEG_INFINITY;
    for map in [&d.mu0, &d.mu1, &d.nu()] {
        worst = worst.max(retardation_on(map, &c.s, &grid)?.value);
    }
    let id = if global { "retarded-everywhere" } else { "retarded-left" };
    Ok(ConditionRow::new(id, Status::from_bool(worst <= INEQ_TOL))
        .value(worst)
        .threshold(0.0))
}

fn one_over_e_row(c: &Ctx, d: &Deviating, global: bool) -> Result<ConditionRow> {
    let grid = if global {
        c.s.whole_grid()
    } else {
        c.s.left_grid()
    };
    let chk = one_over_e_on(&d.p1, &d.mu1, &c.s, &grid)?;
    let id = if global { "memory-one-over-e-global" } else { "memory-one-over-e" };
    Ok(ConditionRow::from_check(id, chk, Status::from_bool(chk.pass)))
}

/// Comparison with rate `e`, falling back to the sharpened rate `λ*`.
fn comparison_row(c: &Ctx, d: &Deviating, derived: &mut Derived) -> Result<ConditionRow> {
    let e = std::f64::consts::E;
    let p_star = sup_integral_on(&d.p1, &d.mu1, &c.s, &c.s.left_grid())?;
    derived.p_star = Some(p_star);
    if let Ok(l) = lambda_fixed_point(p_star.min((-1.0f64).exp())) {
        if p_star <= (-1.0f64).exp() + INEQ_TOL {
            derived.lambda_star = Some(l);
        }
    }
    let strong = check_comparison_217(&d.p0, &d.p1, &d.mu1, &c.s, e)?;
    if strong.pass {
        return Ok(ConditionRow::from_check("comparison", strong, Status::Pass).note("rate e"));
    }
    if let Some(l) = derived.lambda_star {
        let weak = check_comparison_217(&d.p0, &d.p1, &d.mu1, &c.s, l)?;
        return Ok(ConditionRow::from_check("comparison", weak, Status::from_bool(weak.pass))
            .note(format!("rate e failed (margin {}); sharpened rate {l}", strong.value)));
    }
    Ok(ConditionRow::from_check("comparison", strong, Status::Fail).note("rate e"))
}

fn memory_bounded_row(c: &Ctx, d: &Deviating) -> Result<ConditionRow> {
    let v = sup_integral_on(&d.p1, &d.mu0, &c.s, &c.s.left_grid())?;
    Ok(ConditionRow::new("memory-bounded", Status::on_window(v.is_finite())).value(v))
}

fn monotone_rows(c: &Ctx, d: &Deviating, global: bool) -> Result<Vec<ConditionRow>> {
    let grid = if global {
        c.s.whole_grid()
    } else {
        c.s.left_grid()
    };
    let m = monotone_on(&d.p0, &d.p1, &d.mu0, &d.mu1, &c.s, &grid)?;
    let sfx = if global { "-global" } else { "" };
    Ok(vec![
        ConditionRow::from_check(
            &format!("p0-dominates-p1{sfx}"),
            m.p0_dominates,
            Status::from_bool(m.p0_dominates.pass),
        ),
        ConditionRow::from_check(
            &format!("deviation-order{sfx}"),
            m.deviation_order,
            Status::from_bool(m.deviation_order.pass),
        ),
    ])
}

fn lower_bound_rows(c: &Ctx, d: &Deviating) -> Vec<ConditionRow> {
    let Some((g, h1)) = d.lower_bound() else {
        return vec![
            ConditionRow::new("h1-positive-diagonal", Status::Indeterminate)
                .note("no lower bound g h1 known for this nonlinearity"),
            ConditionRow::new("h-lower-bound", Status::Indeterminate),
        ];
    };
    let k = d.kappa;
    let diag = (1..100)
        .map(|i| {
            let x = k * i as f64 / 100.0;
            h1(x, x)
        })
        .fold(f64::INFINITY, f64::min);
    let inner = c.interior();
    let lb = grid_min(c.s.exec, &c.s.left_grid(), &inner, &inner, |t, x, y| {
        d.h(t, x, y) - g.eval(t) * h1(x, y)
    });
    vec![
        ConditionRow::new("h1-positive-diagonal", Status::from_bool(diag > 0.0))
            .value(diag)
            .threshold(0.0),
        ConditionRow::new("h-lower-bound", Status::from_bool(lb >= -INEQ_TOL))
            .value(lb)
            .threshold(0.0),
    ]
}

fn lower_bound_scale(d: &Deviating) -> Option<CoeffFunction> {
    d.lower_bound().map(|(g, _)| g)
}

fn g_or_p0_divergent(c: &Ctx, d: &Deviating) -> Result<ConditionRow> {
    let p0 = c.divergence_row("p0-divergent", &d.p0, true)?;
    let g = match lower_bound_scale(d) {
        Some(g) => c.divergence_row("g-divergent", &g, true)?,
        None => ConditionRow::new("g-divergent", Status::Indeterminate),
    };
    let status = g.status.either(p0.status);
    Ok(ConditionRow::new("g-or-p0-divergent", status).note(format!(
        "g: {:?} {:?}; p0: {:?} {:?}",
        g.status, g.value, p0.status, p0.value
    )))
}

fn unit_window_rows(c: &Ctx, d: &Deviating) -> Result<Vec<ConditionRow>> {
    let lag = CoeffFunction::shift(1.0);
    let sup = sup_integral_on(&d.p1, &lag, &c.s, &c.s.left_grid())?;
    let bounded = ConditionRow::new("unit-window-p1-bounded", Status::on_window(sup.is_finite()))
        .value(sup);
    let old = oldest_third(&c.s);
    let diff = limsup_on(|x| d.p0.eval(x) - d.p1.eval(x), &lag, &c.s, &old)?;
    let g_val = match lower_bound_scale(d) {
        Some(g) => Some(limsup_on(|x| g.eval(x), &lag, &c.s, &old)?),
        None => None,
    };
    let pos = diff.positive || g_val.map(|l| l.positive).unwrap_or(false);
    let best = diff.value.max(g_val.map(|l| l.value).unwrap_or(f64::NEG_INFINITY));
    let limsup = ConditionRow::new("unit-window-limsup", Status::on_window(pos))
        .value(best)
        .threshold(crate::hypothesis::limits::LIMSUP_FLOOR)
        .note(format!(
            "p0 - p1: {}; g: {}",
            diff.value,
            g_val.map(|l| l.value.to_string()).unwrap_or_else(|| "n/a".into())
        ));
    Ok(vec![bounded, limsup])
}

fn existence_m_mu(c: &Ctx, d: &Deviating, derived: &mut Derived) -> Result<f64> {
    let e = std::f64::consts::E;
    let m = compute_m_mu(&d.p1, &d.mu0, &d.mu1, &c.s, e)?;
    derived.m_mu = Some(m);
    if let Some(l) = derived.lambda_star {
        derived.m_mu_sharpened = Some(compute_m_mu(&d.p1, &d.mu0, &d.mu1, &c.s, l)?);
    }
    Ok(m)
}

fn deviating_rows(
    c: &Ctx,
    which: TheoremId,
    derived: &mut Derived,
) -> Result<(Vec<ConditionRow>, Option<f64>)> {
    let d = Deviating::from_equation(c.eq)?;
    let mut rows = Vec::new();
    let mut m = None;
    use TheoremId::*;
    match which {
        BoundedExistence | BoundedExistenceGlobal => {
            let global = which == BoundedExistenceGlobal;
            rows.push(h_nonneg_left(c, &d));
            rows.extend(h_growth_majorant(c, &d));
            rows.push(h_zero_origin(c, &d));
            rows.push(retarded_row(c, &d, true)?);
            rows.push(one_over_e_row(c, &d, global)?);
            rows.push(comparison_row(c, &d, derived)?);
            rows.push(memory_bounded_row(c, &d)?);
            if global {
                rows.push(h_nonneg_right(c, &d));
            }
            m = Some(existence_m_mu(c, &d, derived)?);
        }
        MonotoneExistence => {
            rows.push(h_nonneg_left(c, &d));
            rows.extend(h_growth_majorant(c, &d));
            rows.push(h_zero_origin(c, &d));
            rows.push(retarded_row(c, &d, true)?);
            rows.extend(monotone_rows(c, &d, false)?);
        }
        MonotoneExistenceGlobal => {
            rows.push(h_nonneg_left(c, &d));
            rows.extend(h_band_right(c, &d));
            rows.push(h_zero_origin(c, &d));
            rows.push(retarded_row(c, &d, true)?);
            rows.extend(monotone_rows(c, &d, true)?);
        }
        LeftLimitIntegrable => {
            rows.push(h_nonneg_left(c, &d));
            rows.push(retarded_row(c, &d, false)?);
            rows.push(c.divergence_row("p1-integrable", &d.p1, false)?);
            rows.push(one_over_e_row(c, &d, false)?);
        }
        LeftLimitComparison => {
            rows.push(h_nonneg_left(c, &d));
            rows.push(one_over_e_row(c, &d, false)?);
            rows.push(comparison_row(c, &d, derived)?);
            rows.push(memory_bounded_row(c, &d)?);
            rows.push(retarded_row(c, &d, false)?);
        }
        LeftLimitDichotomy | LeftLimitZeroOrKappa => {
            rows.extend(lower_bound_rows(c, &d));
            rows.push(one_over_e_row(c, &d, false)?);
            rows.push(retarded_row(c, &d, false)?);
            rows.push(c.divergence_row("p1-integrable", &d.p1, false)?);
            rows.push(g_or_p0_divergent(c, &d)?);
            if which == LeftLimitZeroOrKappa {
                rows.push(monotone_rows(c, &d, false)?.remove(0));
            }
        }
        LeftLimitUnitWindow => {
            rows.extend(lower_bound_rows(c, &d));
            rows.push(one_over_e_row(c, &d, false)?);
            rows.push(comparison_row(c, &d, derived)?);
            rows.push(memory_bounded_row(c, &d)?);
            rows.push(retarded_row(c, &d, false)?);
            rows.extend(unit_window_rows(c, &d)?);
        }
        KappaRigidity => {
            let grid = c.s.left_grid();
            let diff = grid
                .iter()
                .map(|&t| (d.p0.eval(t) - d.p1.eval(t)).abs())
                .fold(0.0, f64::max);
            rows.push(
                ConditionRow::new("p0-equals-p1", Status::from_bool(diff <= INEQ_TOL))
                    .value(diff)
                    .threshold(0.0),
            );
            let k = d.kappa;
            let hk = grid_max(c.s.exec, &grid, &[k], &[k], |t, x, y| d.h(t, x, y).abs());
            rows.push(
                ConditionRow::new("h-zero-at-kappa", Status::from_bool(hk <= INEQ_TOL))
                    .value(hk)
                    .threshold(0.0),
            );
            let mem = sup_integral_on(&d.p1, &d.mu1, &c.s, &grid)?;
            rows.push(
                ConditionRow::new("memory-zero", Status::from_bool(mem <= INEQ_TOL))
                    .value(mem)
                    .threshold(0.0),
            );
        }
        DelayFront | LogisticDichotomy => unreachable!("handled by model-specific rows"),
    }
    Ok((rows, m))
}

fn delay_front_rows(c: &Ctx, derived: &mut Derived) -> Result<(Vec<ConditionRow>, f64)> {
    let eq = c.eq;
    let shape_err = || {
        Error::ShapeMismatch("T6.1 needs the delay equation u' = -u + G(u(t - tau))".into())
    };
    if eq.origin != Origin::DelayG {
        return Err(shape_err());
    }
    let d = Deviating::from_equation(eq)?;
    let g = d.h.and_then(|(h, _)| h.scalar_map()).ok_or_else(shape_err)?;
    let k = eq.kappa;
    let tau = |t: f64| t - d.mu0.eval(t);
    let whole = c.s.whole_grid();
    let tau_min = whole.iter().map(|&t| tau(t)).fold(f64::INFINITY, f64::min);
    let m_tau = c
        .s
        .left_grid()
        .iter()
        .map(|&t| tau(t))
        .fold(f64::NEG_INFINITY, f64::max);
    derived.m_tau = Some(m_tau);
    let mut rows = vec![
        ConditionRow::new("tau-positive", Status::from_bool(tau_min > 0.0))
            .value(tau_min)
            .threshold(0.0),
        ConditionRow::new("tau-bounded", Status::on_window(m_tau.is_finite())).value(m_tau),
    ];
    let g0 = g.eval(0.0).abs();
    rows.push(
        ConditionRow::new("g-zero-at-origin", Status::from_bool(g0 <= INEQ_TOL))
            .value(g0)
            .threshold(0.0),
    );
    let gmin = linspace(0.0, 4.0 * k, 4000)
        .into_iter()
        .map(|s| g.eval(s))
        .fold(f64::INFINITY, f64::min);
    rows.push(
        ConditionRow::new("g-nonneg", Status::from_bool(gmin >= -INEQ_TOL))
            .value(gmin)
            .threshold(0.0),
    );
    let above = (1..1000)
        .map(|i| {
            let s = k * i as f64 / 1000.0;
            g.eval(s) - s
        })
        .fold(f64::INFINITY, f64::min);
    rows.push(
        ConditionRow::new("g-above-diagonal", Status::from_bool(above > 0.0))
            .value(above)
            .threshold(0.0),
    );
    rows.push(match d.majorant {
        Some(q) => {
            let unit = Majorant {
                time: CoeffFunction::constant(1.0),
                level: q.level.clone(),
            };
            let gr = check_growth_35(&unit, 0.0, 1.0, &default_growth_points(k))?;
            ConditionRow::new("q0-sublinear", gr.status)
                .value(*gr.ratios.last().unwrap())
                .threshold(1e-3 * gr.ratios[0])
                .note(format!("q0(x)/x at x = kappa 10^k: {:?}", gr.ratios))
        }
        None => ConditionRow::new("q0-sublinear", Status::Indeterminate)
            .note("no q0 table supplied"),
    });
    Ok((rows, m_tau))
}

fn logistic_rows(c: &Ctx) -> Result<Vec<ConditionRow>> {
    let NonlinearityKind::Logistic(term) = &c.eq.f.kind else {
        return Err(Error::ShapeMismatch(
            "T6.2 needs the generalized logistic equation".into(),
        ));
    };
    let LogisticTerm { g0, kernel, .. } = term;
    let mut rows = vec![c.divergence_row("g0-divergent", g0, true)?];
    let left = c.s.left_grid();
    let mut kmin = f64::INFINITY;
    for &t in &left {
        kmin = kmin.min(kernel.total_mass(t)?);
    }
    rows.push(
        ConditionRow::new("kernel-mass-positive", Status::on_window(kmin > 0.0))
            .value(kmin)
            .threshold(0.0),
    );
    let right = c.s.right_grid();
    let mut lag = f64::NEG_INFINITY;
    for &t in &right {
        lag = lag.max(t - kernel.lower.eval_retarded("nu", t)?);
    }
    rows.push(
        ConditionRow::new("lag-bounded-forward", Status::on_window(lag <= 0.5 * c.s.window))
            .value(lag)
            .threshold(0.5 * c.s.window),
    );
    let newest = newest_third(&c.s);
    for &t in &newest {
        g0.eval_nonneg("g0", t)?;
    }
    let ls = limsup_on(
        |x| g0.eval(x) * kernel.total_mass(x).unwrap_or(0.0),
        &CoeffFunction::shift(1.0),
        &c.s,
        &newest,
    )?;
    rows.push(
        ConditionRow::new("forward-window-limsup", Status::on_window(ls.positive))
            .value(ls.value)
            .threshold(crate::hypothesis::limits::LIMSUP_FLOOR),
    );
    Ok(rows)
}

/// Evaluate every condition of `which` for `eq` and assemble the verdict.
pub fn theorem_verdict(
    eq: &Equation,
    which: TheoremId,
    opts: &VerdictOptions,
) -> Result<TheoremVerdict> {
    let s = Sampling::new(eq.t0, opts.window, opts.grid_step)?.with_exec(opts.exec);
    let ctx = Ctx { eq, s, opts };
    let mut derived = Derived::default();
    let (mut rows, m) = match which {
        TheoremId::DelayFront => {
            let (rows, m) = delay_front_rows(&ctx, &mut derived)?;
            (rows, Some(m))
        }
        TheoremId::LogisticDichotomy => (logistic_rows(&ctx)?, None),
        _ => deviating_rows(&ctx, which, &mut derived)?,
    };
    let c_interval = admissible_c_interval(which, eq.kappa, m.unwrap_or(0.0).max(0.0))?;
    let c_inside = c_interval.map(|iv| iv.contains(eq.c));
    if let (Some(iv), Some(inside)) = (c_interval, c_inside) {
        rows.push(
            ConditionRow::new("anchor-in-interval", Status::from_bool(inside))
                .value(eq.c)
                .threshold(iv.upper)
                .note(format!("c must lie in {iv}")),
        );
    }
    let status = rows
        .iter()
        .fold(Status::Pass, |acc, r| acc.both(r.status));
    Ok(TheoremVerdict {
        theorem: which,
        status,
        conditions: rows,
        derived,
        c: eq.c,
        c_interval,
        c_inside,
        window: opts.window,
        grid_step: opts.grid_step,
        caveat: format!(
            "conditions sampled with step {} on [t0 - {w}, t0] and, where required, (t0, t0 + {w}]; \
             limits at infinity judged from windows {:?}",
            opts.grid_step,
            opts.divergence_windows(),
            w = opts.window
        ),
    })
}
