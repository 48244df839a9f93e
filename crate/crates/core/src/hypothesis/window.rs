//! Windowed integrals, the 1/e test, the comparison exponent and `M_mu`.

use std::f64::consts::E;

use crate::error::{Error, Result};
use crate::fde::{CoeffFunction, Interp};
use crate::hypothesis::{Check, Sampling, INEQ_TOL};
use crate::par::try_map_range;
use crate::quad::{try_adaptive_simpson, DEFAULT_TOL};

/// `∫_a^b p(s) ds` for a non-negative coefficient.
pub(crate) fn integrate(p: &CoeffFunction, a: f64, b: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if let CoeffFunction::Constant(c) = *p {
        if c < 0.0 || c.is_nan() {
            return Err(Error::NegativeCoefficient {
                name: "p".into(),
                t: a,
                value: c,
            });
        }
        return Ok(c * (b - a));
    }
    try_adaptive_simpson(|s| p.eval_nonneg("p", s), a, b, DEFAULT_TOL)
}

/// `∫_a^b p(s) ds` for a coefficient of either sign.
pub(crate) fn integrate_signed<F: Fn(f64) -> f64>(p: F, a: f64, b: f64) -> f64 {
    crate::quad::adaptive_simpson(p, a, b, DEFAULT_TOL)
}

/// `∫_{lower(t)}^t p(s) ds`.
pub(crate) fn memory_integral(p: &CoeffFunction, lower: &CoeffFunction, t: f64) -> Result<f64> {
    let lo = lower.eval_retarded("lower map", t)?;
    integrate(p, lo, t)
}

fn max_over<F>(s: &Sampling, grid: &[f64], f: F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64> + Sync + Send,
{
    let vals = try_map_range(s.exec, grid.len(), |i| f(grid[i]))?;
    Ok(vals.into_iter().fold(f64::NEG_INFINITY, f64::max))
}

fn min_over<F>(s: &Sampling, grid: &[f64], f: F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64> + Sync + Send,
{
    let vals = try_map_range(s.exec, grid.len(), |i| f(grid[i]))?;
    Ok(vals.into_iter().fold(f64::INFINITY, f64::min))
}

/// Maximum over the sampled window of `∫_{lower_map(t)}^t p(s) ds`.
pub fn sup_window_integral(
    p: &CoeffFunction,
    lower_map: &CoeffFunction,
    s: &Sampling,
) -> Result<f64> {
    sup_integral_on(p, lower_map, s, &s.left_grid())
}

pub(crate) fn sup_integral_on(
    p: &CoeffFunction,
    lower_map: &CoeffFunction,
    s: &Sampling,
    grid: &[f64],
) -> Result<f64> {
    max_over(s, grid, |t| memory_integral(p, lower_map, t))
}

/// `sup ∫_{mu1(t)}^t p1 <= 1/e` on the window.
pub fn check_one_over_e(p1: &CoeffFunction, mu1: &CoeffFunction, s: &Sampling) -> Result<Check> {
    one_over_e_on(p1, mu1, s, &s.left_grid())
}

pub(crate) fn one_over_e_on(
    p1: &CoeffFunction,
    mu1: &CoeffFunction,
    s: &Sampling,
    grid: &[f64],
) -> Result<Check> {
    let value = sup_integral_on(p1, mu1, s, grid)?;
    let threshold = (-1.0f64).exp();
    Ok(Check {
        pass: value <= threshold + INEQ_TOL,
        value,
        threshold,
    })
}

/// The smallest `λ ∈ [1, e]` with `λ = exp(λ p*)`.
pub fn lambda_fixed_point(p_star: f64) -> Result<f64> {
    let inv_e = (-1.0f64).exp();
    if !(0.0..=inv_e + INEQ_TOL).contains(&p_star) {
        return Err(Error::InvalidParameter(format!(
            "p* must lie in [0, 1/e], got {p_star}"
        )));
    }
    if p_star == 0.0 {
        return Ok(1.0);
    }
    // At p* = 1/e the root is double and g never turns positive.
    let g = |l: f64| l - (l * p_star).exp();
    if p_star >= inv_e - 1e-16 || g(E) <= 0.0 {
        return Ok(E);
    }
    let b = crate::roots::bisect(g, 1.0, E, 0.0, 200);
    Ok(b.hi)
}

/// `γ(t) = exp(rate ∫_t^{t0} p1)` tabulated on the window (log-linear).
pub fn gamma_test(p1: &CoeffFunction, rate: f64, s: &Sampling) -> Result<CoeffFunction> {
    if !rate.is_finite() || rate < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "rate must be finite and non-negative, got {rate}"
        )));
    }
    let grid = s.left_grid();
    let cells = try_map_range(s.exec, grid.len() - 1, |i| {
        integrate(p1, grid[i], grid[i + 1])
    })?;
    let mut acc = vec![0.0; grid.len()];
    for i in (0..cells.len()).rev() {
        acc[i] = acc[i + 1] + cells[i];
    }
    let v = acc.iter().map(|&a| (rate * a).exp()).collect();
    CoeffFunction::from_columns(grid, v, Interp::LogLinear)
}

/// `p0(t) >= p1(t) exp(rate ∫_{mu1(t)}^t p1)`; `value` is the worst margin.
pub fn check_comparison_217(
    p0: &CoeffFunction,
    p1: &CoeffFunction,
    mu1: &CoeffFunction,
    s: &Sampling,
    rate: f64,
) -> Result<Check> {
    let value = min_over(s, &s.left_grid(), |t| {
        let a = p0.eval_nonneg("p0", t)?;
        let b = p1.eval_nonneg("p1", t)?;
        if b == 0.0 {
            return Ok(a);
        }
        Ok(a - b * (rate * memory_integral(p1, mu1, t)?).exp())
    })?;
    Ok(Check {
        pass: value >= -INEQ_TOL,
        value,
        threshold: 0.0,
    })
}

/// `sup_t ∫_{mu0(t)}^t p1(s) exp(rate ∫_{mu1(s)}^s p1) ds` over the window.
pub fn compute_m_mu(
    p1: &CoeffFunction,
    mu0: &CoeffFunction,
    mu1: &CoeffFunction,
    s: &Sampling,
    rate: f64,
) -> Result<f64> {
    let weighted = |x: f64| -> Result<f64> {
        let p = p1.eval_nonneg("p1", x)?;
        if p == 0.0 {
            return Ok(0.0);
        }
        Ok(p * (rate * memory_integral(p1, mu1, x)?).exp())
    };
    let v = max_over(s, &s.left_grid(), |t| {
        let lo = mu0.eval_retarded("mu0", t)?;
        try_adaptive_simpson(weighted, lo, t, DEFAULT_TOL)
    })?;
    Ok(v.max(0.0))
}

/// Outcome of the two monotone-case inequalities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotoneCheck {
    /// `p0 >= p1`; value is `min (p0 - p1)`.
    pub p0_dominates: Check,
    /// `p1 (mu0 - mu1) >= 0`; value is its minimum.
    pub deviation_order: Check,
}

pub fn check_monotone_conditions(
    p0: &CoeffFunction,
    p1: &CoeffFunction,
    mu0: &CoeffFunction,
    mu1: &CoeffFunction,
    s: &Sampling,
) -> Result<MonotoneCheck> {
    monotone_on(p0, p1, mu0, mu1, s, &s.left_grid())
}

pub(crate) fn monotone_on(
    p0: &CoeffFunction,
    p1: &CoeffFunction,
    mu0: &CoeffFunction,
    mu1: &CoeffFunction,
    s: &Sampling,
    grid: &[f64],
) -> Result<MonotoneCheck> {
    let dom = min_over(s, grid, |t| Ok(p0.eval(t) - p1.eval(t)))?;
    let order = min_over(s, grid, |t| {
        let p = p1.eval(t);
        if p == 0.0 {
            return Ok(0.0);
        }
        Ok(p * (mu0.eval(t) - mu1.eval(t)))
    })?;
    Ok(MonotoneCheck {
        p0_dominates: Check {
            pass: dom >= -INEQ_TOL,
            value: dom,
            threshold: 0.0,
        },
        deviation_order: Check {
            pass: order >= -INEQ_TOL,
            value: order,
            threshold: 0.0,
        },
    })
}

/// `max (map(t) - t)` over `grid`; retarded iff `<= 0` up to slack.
pub(crate) fn retardation_on(map: &CoeffFunction, s: &Sampling, grid: &[f64]) -> Result<Check> {
    let value = max_over(s, grid, |t| Ok(map.eval(t) - t))?;
    Ok(Check {
        pass: value <= INEQ_TOL,
        value,
        threshold: 0.0,
    })
}
