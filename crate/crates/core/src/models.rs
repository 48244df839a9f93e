//! Constructors for the shipped model equations.
//!
//! Each returns a fully assembled [`Equation`] with its growth majorant
//! attached, tagged with the [`Origin`] the model-specific checks look for.

use crate::error::{Error, Result};
use crate::fde::{
    CoeffFunction, DelayTerm, DistributedTerm, Equation, Interp, LogisticTerm, Majorant,
    Nonlinearity, NonlinearityKind, Origin, PointwiseH, ScalarMap,
};
use crate::quad::adaptive_simpson;

/// Span of the `q0` table, in multiples of kappa.
const Q0_SPAN: f64 = 8.0;
/// Cells per kappa in the `q0` table.
const Q0_CELLS: usize = 500;

/// `G(s) = s^p (kappa - s) + s` on `[0, kappa]`, `kappa` above, `0` below.
pub fn make_power_monostable(p: f64, kappa: f64) -> Result<ScalarMap> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::InvalidParameter(format!("exponent p must be positive, got {p}")));
    }
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(Error::NonPositiveKappa(kappa));
    }
    Ok(ScalarMap::PowerMonostable { p, kappa })
}

/// `q0(s) = max { G(x) : x ∈ [0, s] }`, tabulated on `[0, 8 kappa]` with
/// step `kappa / 500`.
pub fn running_max_table(g: &ScalarMap, kappa: f64) -> Result<CoeffFunction> {
    let n = (Q0_SPAN as usize) * Q0_CELLS;
    let dx = kappa / Q0_CELLS as f64;
    let xs: Vec<f64> = (0..=n).map(|k| k as f64 * dx).collect();
    let mut best = f64::NEG_INFINITY;
    let vs = xs
        .iter()
        .map(|&x| {
            best = best.max(g.eval(x));
            best
        })
        .collect();
    CoeffFunction::from_columns(xs, vs, Interp::Linear)
}

/// The majorant `q(t, x) = scale * q0(x)`.
pub fn delay_majorant(g: &ScalarMap, kappa: f64, scale: f64) -> Result<Majorant> {
    Ok(Majorant {
        time: CoeffFunction::constant(scale),
        level: running_max_table(g, kappa)?,
    })
}

/// Sample points used to check that a non-constant lag stays positive.
fn lag_samples(tau: &CoeffFunction, t0: f64) -> Vec<f64> {
    match tau {
        CoeffFunction::Table(tab) => tab.knots().to_vec(),
        _ => (0..=8000).map(|k| t0 - 200.0 + 0.05 * k as f64).collect(),
    }
}

/// `u'(t) = -u(t) + G(u(t - tau(t)))`, written as
/// `p0 u(t - tau) - u(t) + h(t, u(t), u(t - tau))` with `p0 = 1` up to `t0`,
/// `0` after, and `h(t, x, y) = G(|y|) - p0(t) y`.
pub fn make_delay_eq(
    g: ScalarMap,
    tau: CoeffFunction,
    t0: f64,
    c: f64,
    kappa: f64,
) -> Result<Equation> {
    for t in lag_samples(&tau, t0) {
        let v = tau.eval(t);
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "tau must be positive and finite, got {v} at t = {t}"
            )));
        }
    }
    let p0 = CoeffFunction::step(t0, 1.0, 0.0);
    let dev = CoeffFunction::lagged(tau);
    let q = delay_majorant(&g, kappa, 1.0)?;
    let f = Nonlinearity::pointwise(
        PointwiseH::DelayReaction {
            g,
            p0: p0.clone(),
        },
        dev.clone(),
    )
    .with_majorant(q);
    Ok(Equation::new(
        vec![DelayTerm::new(p0, dev)],
        vec![DelayTerm::new(CoeffFunction::constant(1.0), CoeffFunction::identity())],
        f,
        kappa,
        t0,
        c,
    )?
    .with_origin(Origin::DelayG))
}

/// Travelling-wave profile equation `s u'(t) = -u(t) + G(u(t - s r))` for
/// wave speed `s`, as `p0 = p1 = 1/s`, `mu0 = nu = t - s r`, `mu1 = t` and
/// `h = (G(|y|) - |y|) / s`.
pub fn make_wavefront(
    g: ScalarMap,
    wave_speed: f64,
    r: f64,
    t0: f64,
    c: f64,
    kappa: f64,
) -> Result<Equation> {
    if !(wave_speed > 0.0) || !wave_speed.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "wave speed must be positive, got {wave_speed}"
        )));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidParameter(format!("r must be positive, got {r}")));
    }
    let inv = 1.0 / wave_speed;
    let dev = CoeffFunction::shift(wave_speed * r);
    let q = delay_majorant(&g, kappa, inv)?;
    let f = Nonlinearity::pointwise(PointwiseH::Wavefront { g, speed: wave_speed }, dev.clone())
        .with_majorant(q);
    Ok(Equation::new(
        vec![DelayTerm::new(CoeffFunction::constant(inv), dev)],
        vec![DelayTerm::new(CoeffFunction::constant(inv), CoeffFunction::identity())],
        f,
        kappa,
        t0,
        c,
    )?
    .with_origin(Origin::Wavefront))
}

/// Step of the tables behind the logistic ceiling and majorant.
const LOGISTIC_DT: f64 = 0.05;
/// Largest exponent kept in the ceiling before it is held constant.
const MAX_EXPONENT: f64 = 700.0;

/// `u'(t) = g0(t) u(t) ∫_{nu(t)}^t |1 - u(s)/kappa|^lam sgn(1 - u(s)/kappa) d_s K(t, s)`
/// with `nu` the kernel's lower limit.
///
/// The nonlinearity carries the ceiling
/// `U(t) = kappa exp(∫_{t0}^t g0 K)` for `t > t0` (`kappa` before),
/// tabulated on `[t0, t0 + horizon]`, and the majorant
/// `q(t, x) = g0(t) U(t) K(t)` tabulated on `[t0 - horizon, t0 + horizon]`.
/// Use [`raw_logistic`] for the equation without the ceiling.
pub fn make_logistic(
    g0: CoeffFunction,
    kernel: DistributedTerm,
    kappa: f64,
    lam_exp: f64,
    t0: f64,
    c: f64,
    horizon: f64,
) -> Result<Equation> {
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(Error::NonPositiveKappa(kappa));
    }
    if !(lam_exp > 0.0) || !lam_exp.is_finite() {
        return Err(Error::InvalidParameter(format!("lam_exp must be positive, got {lam_exp}")));
    }
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::InvalidParameter(format!("horizon must be positive, got {horizon}")));
    }
    let n = (horizon / LOGISTIC_DT).ceil() as usize;
    let ahead: Vec<f64> = (0..=n).map(|k| t0 + k as f64 * LOGISTIC_DT).collect();
    let mut rate = Vec::with_capacity(ahead.len());
    for &t in &ahead {
        rate.push(g0.eval_nonneg("g0", t)? * kernel.total_mass(t)?);
    }
    let mut behind = Vec::with_capacity(n + 1);
    for k in (1..=n).rev() {
        let t = t0 - k as f64 * LOGISTIC_DT;
        behind.push(g0.eval_nonneg("g0", t)? * kernel.total_mass(t)?);
    }
    let mut exponent = 0.0;
    let mut ceiling = vec![kappa];
    for k in 1..ahead.len() {
        let (a, b) = (ahead[k - 1], ahead[k]);
        exponent += adaptive_simpson(
            |t| g0.eval(t) * kernel.total_mass(t).unwrap_or(0.0),
            a,
            b,
            1e-12,
        );
        ceiling.push(kappa * exponent.min(MAX_EXPONENT).exp());
    }
    let q_time: Vec<f64> = behind
        .iter()
        .map(|r| r * kappa)
        .chain(rate.iter().zip(&ceiling).map(|(r, u)| r * u))
        .collect();
    let q_grid: Vec<f64> = (0..q_time.len())
        .map(|k| t0 + (k as f64 - n as f64) * LOGISTIC_DT)
        .collect();
    let majorant = Majorant {
        time: CoeffFunction::from_columns(q_grid, q_time, Interp::Linear)?,
        level: CoeffFunction::constant(1.0),
    };
    let ceiling = CoeffFunction::from_columns(ahead, ceiling, Interp::LogLinear)?;
    let term = LogisticTerm {
        g0,
        kappa,
        lam_exp,
        kernel,
        ceiling: Some(ceiling),
    };
    Ok(Equation::new(vec![], vec![], Nonlinearity::logistic(term).with_majorant(majorant), kappa, t0, c)?
        .with_origin(Origin::Logistic))
}

/// The logistic equation with its ceiling removed; other equations are
/// returned unchanged.
pub fn raw_logistic(eq: &Equation) -> Equation {
    let mut out = eq.clone();
    if let NonlinearityKind::Logistic(term) = &eq.f.kind {
        out.f.kind = NonlinearityKind::Logistic(term.raw());
    }
    out
}

/// Pieces of `u' = p0 u(mu0) - p1 u(mu1) + h(t, u(t), u(nu(t)))`.
#[derive(Debug, Clone)]
pub struct DeviatingParts {
    pub p0: CoeffFunction,
    pub mu0: CoeffFunction,
    pub p1: CoeffFunction,
    pub mu1: CoeffFunction,
    pub h: PointwiseH,
    pub nu: CoeffFunction,
    pub majorant: Option<Majorant>,
}

pub fn make_deviating_general(
    parts: DeviatingParts,
    t0: f64,
    c: f64,
    kappa: f64,
) -> Result<Equation> {
    let mut f = Nonlinearity::pointwise(parts.h, parts.nu);
    if let Some(q) = parts.majorant {
        f = f.with_majorant(q);
    }
    Ok(Equation::new(
        vec![DelayTerm::new(parts.p0, parts.mu0)],
        vec![DelayTerm::new(parts.p1, parts.mu1)],
        f,
        kappa,
        t0,
        c,
    )?
    .with_origin(Origin::DeviatingGeneral))
}

/// The delay equation with zero lag: `p0` steps from 1 to 0 at `t0`, all
/// deviations are the identity and `h(t, x, y) = G(|y|) - p0(t) y`.
pub fn make_instantaneous(g: ScalarMap, t0: f64, c: f64, kappa: f64) -> Result<Equation> {
    let p0 = CoeffFunction::step(t0, 1.0, 0.0);
    let majorant = Some(delay_majorant(&g, kappa, 1.0)?);
    make_deviating_general(
        DeviatingParts {
            p0: p0.clone(),
            mu0: CoeffFunction::identity(),
            p1: CoeffFunction::constant(1.0),
            mu1: CoeffFunction::identity(),
            h: PointwiseH::DelayReaction { g, p0 },
            nu: CoeffFunction::identity(),
            majorant,
        },
        t0,
        c,
        kappa,
    )
}

/// Nicholson's blowflies `u' = -u + beta u(t - tau) e^{-u(t - tau)}`,
/// with `kappa = ln beta`. Literature form.
pub fn make_nicholson(beta: f64, tau: CoeffFunction, t0: f64, c: f64) -> Result<Equation> {
    if !(beta > 1.0) || !beta.is_finite() {
        return Err(Error::InvalidParameter(format!("Nicholson needs beta > 1, got {beta}")));
    }
    make_delay_eq(ScalarMap::Nicholson { beta }, tau, t0, c, beta.ln())
}

/// Mackey-Glass `u' = -u + beta u(t - tau) / (1 + u(t - tau)^n)`, with
/// `kappa = (beta - 1)^{1/n}`. Literature form.
pub fn make_mackey_glass(beta: f64, n: f64, tau: CoeffFunction, t0: f64, c: f64) -> Result<Equation> {
    if !(beta > 1.0) || !beta.is_finite() || !(n > 0.0) || !n.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "Mackey-Glass needs beta > 1 and n > 0, got {beta}, {n}"
        )));
    }
    make_delay_eq(
        ScalarMap::MackeyGlass { beta, n },
        tau,
        t0,
        c,
        (beta - 1.0).powf(1.0 / n),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fde::{eval_rhs, Trajectory};

    fn sine_traj() -> Trajectory {
        Trajectory::from_fn(
            &(0..=400).map(|k| -20.0 + 0.05 * k as f64).collect::<Vec<_>>(),
            |t| 0.5 + 0.4 * t.sin(),
            |t| 0.4 * t.cos(),
        )
        .unwrap()
    }

    #[test]
    fn q0_is_running_max() {
        let g = make_power_monostable(1.0, 1.0).unwrap();
        let q0 = running_max_table(&g, 1.0).unwrap();
        assert!((q0.eval(0.5) - 0.75).abs() < 1e-15);
        assert_eq!(q0.eval(3.0), 1.0);
        assert_eq!(q0.eval(100.0), 1.0);
    }

    #[test]
    fn delay_eq_textbook_form() {
        let g = make_power_monostable(1.0, 1.0).unwrap();
        let eq = make_delay_eq(g.clone(), CoeffFunction::constant(0.25), 0.0, 0.3, 1.0).unwrap();
        let tr = sine_traj();
        for k in 0..100 {
            let t = -15.0 + 0.15 * k as f64;
            let want = -tr.eval(t) + g.eval(tr.eval(t - 0.25));
            assert!((eval_rhs(&eq, &tr, t, false).unwrap() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn delay_eq_rejects_nonpositive_lag() {
        let g = make_power_monostable(1.0, 1.0).unwrap();
        assert!(make_delay_eq(g.clone(), CoeffFunction::constant(0.0), 0.0, 0.3, 1.0).is_err());
        let tab = CoeffFunction::table(&[(-1.0, 0.5), (1.0, -0.1)], Interp::Linear).unwrap();
        assert!(make_delay_eq(g, tab, 0.0, 0.3, 1.0).is_err());
    }

    #[test]
    fn logistic_hand_value() {
        let eq = make_logistic(
            CoeffFunction::constant(1.0),
            DistributedTerm::point_mass(1.0, 1.0).unwrap(),
            1.0,
            1.0,
            0.0,
            0.3,
            10.0,
        )
        .unwrap();
        let half = Trajectory::constant(0.5, -5.0, 0.0).unwrap();
        assert!((eval_rhs(&eq, &half, -1.0, false).unwrap() - 0.25).abs() < 1e-15);
        let kappa = Trajectory::constant(1.0, -5.0, 0.0).unwrap();
        assert_eq!(eval_rhs(&eq, &kappa, -1.0, false).unwrap(), 0.0);
    }

    #[test]
    fn logistic_ceiling_grows_like_exponential() {
        let eq = make_logistic(
            CoeffFunction::constant(1.0),
            DistributedTerm::point_mass(1.0, 1.0).unwrap(),
            2.0,
            1.0,
            0.0,
            0.3,
            10.0,
        )
        .unwrap();
        let NonlinearityKind::Logistic(term) = &eq.f.kind else { panic!() };
        let u = term.ceiling.as_ref().unwrap();
        assert_eq!(u.eval(-3.0), 2.0);
        assert!((u.eval(3.0) / (2.0 * 3.0f64.exp()) - 1.0).abs() < 1e-10);
        let q = eq.f.majorant.as_ref().unwrap();
        assert!((q.eval(-3.0, 0.7) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn literature_models_sit_at_equilibrium() {
        let eq = make_nicholson(3.0, CoeffFunction::constant(1.0), 0.0, 0.5).unwrap();
        let k = Trajectory::constant(eq.kappa, -5.0, 0.0).unwrap();
        assert!(eval_rhs(&eq, &k, -1.0, false).unwrap().abs() < 1e-14);
        let eq = make_mackey_glass(2.0, 4.0, CoeffFunction::constant(1.0), 0.0, 0.5).unwrap();
        let k = Trajectory::constant(eq.kappa, -5.0, 0.0).unwrap();
        assert!(eval_rhs(&eq, &k, -1.0, false).unwrap().abs() < 1e-14);
    }
}
