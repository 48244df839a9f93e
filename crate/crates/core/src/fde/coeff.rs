use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How a sampled table is interpolated between its knots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Interp {
    #[default]
    Linear,
    /// Linear in `ln v`; exact for exponentials. Requires positive samples.
    LogLinear,
}

/// Closed-form time functions used by the shipped models and checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Builtin {
    /// `t - delta`. With `delta = 0` this is the identity map.
    Shift { delta: f64 },
    /// `below` for `t <= at`, `above` for `t > at`.
    Step { at: f64, below: f64, above: f64 },
    /// `scale / (t0 + 1 - t)^2` for `t <= t0`, held at `scale` afterwards.
    InverseSquare { t0: f64, scale: f64 },
    /// `1 / (1 + |t - t0|)`.
    HarmonicDecay { t0: f64 },
    /// `mean + amplitude * sin(omega * t)`.
    Sine { mean: f64, amplitude: f64, omega: f64 },
}

impl Builtin {
    fn eval(&self, t: f64) -> f64 {
        match *self {
            Builtin::Shift { delta } => t - delta,
            Builtin::Step { at, below, above } => {
                if t <= at {
                    below
                } else {
                    above
                }
            }
            Builtin::InverseSquare { t0, scale } => {
                if t <= t0 {
                    let d = t0 + 1.0 - t;
                    scale / (d * d)
                } else {
                    scale
                }
            }
            Builtin::HarmonicDecay { t0 } => 1.0 / (1.0 + (t - t0).abs()),
            Builtin::Sine {
                mean,
                amplitude,
                omega,
            } => mean + amplitude * (omega * t).sin(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    t: Arc<[f64]>,
    v: Arc<[f64]>,
    interp: Interp,
}

impl Table {
    pub fn knots(&self) -> &[f64] {
        &self.t
    }

    pub fn values(&self) -> &[f64] {
        &self.v
    }

    pub fn interp(&self) -> Interp {
        self.interp
    }

    fn eval(&self, t: f64) -> f64 {
        let n = self.t.len();
        if t <= self.t[0] {
            return self.v[0];
        }
        if t >= self.t[n - 1] {
            return self.v[n - 1];
        }
        let i = self.t.partition_point(|&x| x <= t) - 1;
        let (t0, t1) = (self.t[i], self.t[i + 1]);
        let w = (t - t0) / (t1 - t0);
        match self.interp {
            Interp::Linear => self.v[i] + w * (self.v[i + 1] - self.v[i]),
            Interp::LogLinear => (self.v[i].ln() * (1.0 - w) + self.v[i + 1].ln() * w).exp(),
        }
    }
}

/// A scalar function of time: a coefficient, a deviation map, or a kernel
/// slice. Evaluable at every real `t`; tables hold their end values beyond
/// the sampled range.
#[derive(Debug, Clone, PartialEq)]
pub enum CoeffFunction {
    Constant(f64),
    Table(Table),
    Builtin(Builtin),
    /// The deviation `t - lag(t)`.
    Lagged(Arc<CoeffFunction>),
}

impl CoeffFunction {
    pub fn constant(v: f64) -> Self {
        CoeffFunction::Constant(v)
    }

    pub fn identity() -> Self {
        Self::shift(0.0)
    }

    /// The deviation `t - delta`.
    pub fn shift(delta: f64) -> Self {
        CoeffFunction::Builtin(Builtin::Shift { delta })
    }

    /// The deviation `t - lag(t)`; a plain shift when the lag is constant.
    pub fn lagged(lag: CoeffFunction) -> Self {
        match lag.as_constant() {
            Some(d) => Self::shift(d),
            None => CoeffFunction::Lagged(Arc::new(lag)),
        }
    }

    pub fn step(at: f64, below: f64, above: f64) -> Self {
        CoeffFunction::Builtin(Builtin::Step { at, below, above })
    }

    pub fn builtin(b: Builtin) -> Self {
        CoeffFunction::Builtin(b)
    }

    /// Build a table from `(t, value)` samples with strictly increasing `t`.
    pub fn table(points: &[(f64, f64)], interp: Interp) -> Result<Self> {
        let (t, v): (Vec<f64>, Vec<f64>) = points.iter().copied().unzip();
        Self::from_columns(t, v, interp)
    }

    pub fn from_columns(t: Vec<f64>, v: Vec<f64>, interp: Interp) -> Result<Self> {
        if t.is_empty() || t.len() != v.len() {
            return Err(Error::InvalidParameter(
                "table needs equally many, and at least one, knots and values".into(),
            ));
        }
        if t.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter(
                "table knots must be strictly increasing".into(),
            ));
        }
        if t.iter().chain(v.iter()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("table entries must be finite".into()));
        }
        if interp == Interp::LogLinear && v.iter().any(|&x| x <= 0.0) {
            return Err(Error::InvalidParameter(
                "log-linear tables need positive values".into(),
            ));
        }
        Ok(CoeffFunction::Table(Table {
            t: t.into(),
            v: v.into(),
            interp,
        }))
    }

    /// Sample `f` on `grid` into a table.
    pub fn tabulate<F>(grid: &[f64], interp: Interp, f: F) -> Result<Self>
    where
        F: Fn(f64) -> f64,
    {
        let v = grid.iter().map(|&t| f(t)).collect();
        Self::from_columns(grid.to_vec(), v, interp)
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            CoeffFunction::Constant(c) => *c,
            CoeffFunction::Table(tab) => tab.eval(t),
            CoeffFunction::Builtin(b) => b.eval(t),
            CoeffFunction::Lagged(lag) => t - lag.eval(t),
        }
    }

    /// Evaluate a coefficient that must be non-negative.
    pub fn eval_nonneg(&self, name: &str, t: f64) -> Result<f64> {
        let v = self.eval(t);
        if v < 0.0 || v.is_nan() {
            return Err(Error::NegativeCoefficient {
                name: name.to_string(),
                t,
                value: v,
            });
        }
        Ok(v)
    }

    /// Evaluate a deviation map, which must satisfy `map(t) <= t`.
    pub fn eval_retarded(&self, name: &str, t: f64) -> Result<f64> {
        let v = self.eval(t);
        if !(v <= t + retard_slack(t)) {
            return Err(Error::NotRetarded {
                name: name.to_string(),
                t,
                value: v,
            });
        }
        Ok(v.min(t))
    }

    /// True when the function is the identity map `t -> t`.
    pub fn is_identity(&self) -> bool {
        matches!(self, CoeffFunction::Builtin(Builtin::Shift { delta }) if *delta == 0.0)
    }

    /// True for constant functions, including single-knot tables.
    pub fn as_constant(&self) -> Option<f64> {
        match self {
            CoeffFunction::Constant(c) => Some(*c),
            CoeffFunction::Table(t) if t.v.iter().all(|&x| x == t.v[0]) => Some(t.v[0]),
            _ => None,
        }
    }
}

pub(crate) fn retard_slack(t: f64) -> f64 {
    1e-12 * (1.0 + t.abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lagged_follows_table() {
        let lag = CoeffFunction::table(&[(0.0, 1.0), (1.0, 2.0)], Interp::Linear).unwrap();
        let d = CoeffFunction::lagged(lag);
        assert_eq!(d.eval(0.5), -1.0);
        assert_eq!(d.eval(-10.0), -11.0);
        assert_eq!(CoeffFunction::lagged(CoeffFunction::constant(0.25)), CoeffFunction::shift(0.25));
    }

    #[test]
    fn table_extends_constantly() {
        let f = CoeffFunction::table(&[(0.0, 1.0), (1.0, 3.0)], Interp::Linear).unwrap();
        assert_eq!(f.eval(-5.0), 1.0);
        assert_eq!(f.eval(0.5), 2.0);
        assert_eq!(f.eval(9.0), 3.0);
    }

    #[test]
    fn log_linear_is_exact_for_exponentials() {
        let grid: Vec<f64> = (0..=10).map(|i| i as f64 * 0.5).collect();
        let f = CoeffFunction::tabulate(&grid, Interp::LogLinear, |t| (2.0 * t).exp()).unwrap();
        let t = 1.37;
        assert!((f.eval(t) / (2.0 * t).exp() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(CoeffFunction::table(&[(1.0, 0.0), (1.0, 1.0)], Interp::Linear).is_err());
        assert!(CoeffFunction::table(&[], Interp::Linear).is_err());
        assert!(CoeffFunction::table(&[(0.0, 0.0), (1.0, 1.0)], Interp::LogLinear).is_err());
    }

    #[test]
    fn retardation_is_enforced() {
        let ahead = CoeffFunction::shift(-0.5);
        assert!(matches!(
            ahead.eval_retarded("mu", 1.0),
            Err(Error::NotRetarded { .. })
        ));
        assert_eq!(CoeffFunction::identity().eval_retarded("mu", 2.0), Ok(2.0));
    }

    #[test]
    fn negativity_is_enforced() {
        let p = CoeffFunction::constant(-1.0);
        assert!(matches!(
            p.eval_nonneg("p0", 0.0),
            Err(Error::NegativeCoefficient { .. })
        ));
    }

    #[test]
    fn step_is_left_closed() {
        let p0 = CoeffFunction::step(0.0, 1.0, 0.0);
        assert_eq!(p0.eval(0.0), 1.0);
        assert_eq!(p0.eval(1e-12), 0.0);
    }
}
