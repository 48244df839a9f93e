use std::fmt;
use std::sync::Arc;

use crate::error::Result;
use crate::fde::coeff::CoeffFunction;
use crate::fde::terms::{logistic_integrand, DistributedTerm, State};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type PointwiseFn = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;

/// A scalar nonlinearity `G`.
#[derive(Clone)]
pub enum ScalarMap {
    /// `s^p (kappa - s) + s` on `[0, kappa]`, zero below, `kappa` above.
    PowerMonostable { p: f64, kappa: f64 },
    /// `slope * s` for `s >= 0`, zero below. Unbounded; used to provoke blow-up.
    Linear { slope: f64 },
    /// `beta s e^{-s}` for `s >= 0`.
    Nicholson { beta: f64 },
    /// `beta s / (1 + s^n)` for `s >= 0`.
    MackeyGlass { beta: f64, n: f64 },
    Custom(ScalarFn),
}

impl ScalarMap {
    pub fn eval(&self, s: f64) -> f64 {
        match self {
            ScalarMap::PowerMonostable { p, kappa } => {
                if s < 0.0 {
                    0.0
                } else if s <= *kappa {
                    s.powf(*p) * (kappa - s) + s
                } else {
                    *kappa
                }
            }
            ScalarMap::Linear { slope } => {
                if s < 0.0 {
                    0.0
                } else {
                    slope * s
                }
            }
            ScalarMap::Nicholson { beta } => {
                if s < 0.0 {
                    0.0
                } else {
                    beta * s * (-s).exp()
                }
            }
            ScalarMap::MackeyGlass { beta, n } => {
                if s < 0.0 {
                    0.0
                } else {
                    beta * s / (1.0 + s.powf(*n))
                }
            }
            ScalarMap::Custom(f) => f(s),
        }
    }

    /// The positive fixed point `G(kappa) = kappa`, when known in closed form.
    pub fn positive_equilibrium(&self) -> Option<f64> {
        match *self {
            ScalarMap::PowerMonostable { kappa, .. } => Some(kappa),
            ScalarMap::Nicholson { beta } if beta > 1.0 => Some(beta.ln()),
            ScalarMap::MackeyGlass { beta, n } if beta > 1.0 => Some((beta - 1.0).powf(1.0 / n)),
            _ => None,
        }
    }
}

impl fmt::Debug for ScalarMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarMap::PowerMonostable { p, kappa } => f
                .debug_struct("PowerMonostable")
                .field("p", p)
                .field("kappa", kappa)
                .finish(),
            ScalarMap::Linear { slope } => f.debug_struct("Linear").field("slope", slope).finish(),
            ScalarMap::Nicholson { beta } => {
                f.debug_struct("Nicholson").field("beta", beta).finish()
            }
            ScalarMap::MackeyGlass { beta, n } => f
                .debug_struct("MackeyGlass")
                .field("beta", beta)
                .field("n", n)
                .finish(),
            ScalarMap::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// The pointwise nonlinearity `h(t, x, y)` with `x = u(t)`, `y = u(nu(t))`.
#[derive(Clone)]
pub enum PointwiseH {
    /// `G(|y|) - p0(t) y`.
    DelayReaction { g: ScalarMap, p0: CoeffFunction },
    /// `(G(|y|) - |y|) / speed`.
    Wavefront { g: ScalarMap, speed: f64 },
    Custom(PointwiseFn),
}

impl PointwiseH {
    pub fn eval(&self, t: f64, x: f64, y: f64) -> f64 {
        match self {
            PointwiseH::DelayReaction { g, p0 } => g.eval(y.abs()) - p0.eval(t) * y,
            PointwiseH::Wavefront { g, speed } => (g.eval(y.abs()) - y.abs()) / speed,
            PointwiseH::Custom(h) => h(t, x, y),
        }
    }

    /// The scalar map `G` underneath, for the built-in forms.
    pub fn scalar_map(&self) -> Option<&ScalarMap> {
        match self {
            PointwiseH::DelayReaction { g, .. } | PointwiseH::Wavefront { g, .. } => Some(g),
            PointwiseH::Custom(_) => None,
        }
    }

    /// A lower bound `h(t, x, y) >= g(t) h1(x, y)` with `h1(x, y) = G(y) - y`,
    /// returned as `g`. Valid on `t <= t0` for the built-in forms.
    pub fn lower_bound_scale(&self) -> Option<CoeffFunction> {
        match self {
            PointwiseH::DelayReaction { .. } => Some(CoeffFunction::constant(1.0)),
            PointwiseH::Wavefront { speed, .. } => Some(CoeffFunction::constant(1.0 / speed)),
            PointwiseH::Custom(_) => None,
        }
    }
}

impl fmt::Debug for PointwiseH {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PointwiseH::DelayReaction { g, p0 } => f
                .debug_struct("DelayReaction")
                .field("g", g)
                .field("p0", p0)
                .finish(),
            PointwiseH::Wavefront { g, speed } => f
                .debug_struct("Wavefront")
                .field("g", g)
                .field("speed", speed)
                .finish(),
            PointwiseH::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// `g0(t) chi(t, u(t)) ∫ |1 - u(s)/kappa|^lam sgn(1 - u(s)/kappa) d_s K(t, s)`.
///
/// With a `ceiling` U, `chi(t, x) = (|x| + x)/2` below `U(t)` and `U(t)`
/// above it. Without one, `chi(t, x) = x` (the raw equation).
#[derive(Debug, Clone)]
pub struct LogisticTerm {
    pub g0: CoeffFunction,
    pub kappa: f64,
    pub lam_exp: f64,
    pub kernel: DistributedTerm,
    pub ceiling: Option<CoeffFunction>,
}

impl LogisticTerm {
    fn chi(&self, t: f64, x: f64) -> f64 {
        match &self.ceiling {
            None => x,
            Some(u) => {
                let cap = u.eval(t);
                if x < cap {
                    0.5 * (x.abs() + x)
                } else {
                    cap
                }
            }
        }
    }

    pub(crate) fn eval<S, C>(&self, u: &S, t: f64, transform: C) -> Result<f64>
    where
        S: State + ?Sized,
        C: Fn(f64) -> f64,
    {
        let g0 = self.g0.eval_nonneg("g0", t)?;
        let x = transform(u.value(t));
        let chi = self.chi(t, x);
        let integral = self.kernel.weighted_sum(u, t, |v| {
            logistic_integrand(transform(v), self.kappa, self.lam_exp)
        })?;
        if g0 == 0.0 || chi == 0.0 {
            return Ok(0.0);
        }
        Ok(g0 * chi * integral)
    }

    /// The same term with the scaffold removed.
    pub fn raw(&self) -> Self {
        Self {
            ceiling: None,
            ..self.clone()
        }
    }
}

/// Growth majorant `q(t, x) = time(t) * level(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Majorant {
    pub time: CoeffFunction,
    pub level: CoeffFunction,
}

impl Majorant {
    pub fn eval(&self, t: f64, x: f64) -> f64 {
        self.time.eval(t) * self.level.eval(x)
    }
}

#[derive(Debug, Clone)]
pub enum NonlinearityKind {
    Zero,
    Pointwise { h: PointwiseH, nu: CoeffFunction },
    Logistic(LogisticTerm),
}

/// The `f` of the equation together with its optional growth majorant.
#[derive(Debug, Clone)]
pub struct Nonlinearity {
    pub kind: NonlinearityKind,
    pub majorant: Option<Majorant>,
}

impl Nonlinearity {
    pub fn zero() -> Self {
        Self {
            kind: NonlinearityKind::Zero,
            majorant: Some(Majorant {
                time: CoeffFunction::constant(0.0),
                level: CoeffFunction::constant(0.0),
            }),
        }
    }

    pub fn pointwise(h: PointwiseH, nu: CoeffFunction) -> Self {
        Self {
            kind: NonlinearityKind::Pointwise { h, nu },
            majorant: None,
        }
    }

    pub fn logistic(term: LogisticTerm) -> Self {
        Self {
            kind: NonlinearityKind::Logistic(term),
            majorant: None,
        }
    }

    pub fn with_majorant(mut self, q: Majorant) -> Self {
        self.majorant = Some(q);
        self
    }

    /// Evaluate `f(u)(t)`, passing every `u`-argument through `transform`.
    pub(crate) fn eval<S, C>(&self, u: &S, t: f64, transform: C) -> Result<f64>
    where
        S: State + ?Sized,
        C: Fn(f64) -> f64,
    {
        match &self.kind {
            NonlinearityKind::Zero => Ok(0.0),
            NonlinearityKind::Pointwise { h, nu } => {
                let s = nu.eval_retarded("nu", t)?;
                let x = transform(u.value(t));
                let y = transform(u.value(s));
                Ok(h.eval(t, x, y))
            }
            NonlinearityKind::Logistic(term) => term.eval(u, t, transform),
        }
    }

    /// Times at which `f` reads `u` at evaluation time `t`.
    pub(crate) fn read_times(&self, t: f64) -> Result<Vec<f64>> {
        match &self.kind {
            NonlinearityKind::Zero => Ok(Vec::new()),
            NonlinearityKind::Pointwise { nu, .. } => Ok(vec![t, nu.eval_retarded("nu", t)?]),
            NonlinearityKind::Logistic(term) => {
                let mut out = vec![t];
                for atom in &term.kernel.atoms {
                    out.push(term.kernel.atom_at(atom, t)?.0);
                }
                Ok(out)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_monostable_shape() {
        let g = ScalarMap::PowerMonostable { p: 1.0, kappa: 1.0 };
        assert_eq!(g.eval(0.0), 0.0);
        assert_eq!(g.eval(1.0), 1.0);
        assert_eq!(g.eval(0.5), 0.75);
        assert_eq!(g.eval(3.0), 1.0);
        assert_eq!(g.eval(-2.0), 0.0);
    }

    #[test]
    fn literature_equilibria() {
        let n = ScalarMap::Nicholson { beta: 3.0 };
        let k = n.positive_equilibrium().unwrap();
        assert!((n.eval(k) - k).abs() < 1e-15);
        let m = ScalarMap::MackeyGlass { beta: 2.0, n: 4.0 };
        let k = m.positive_equilibrium().unwrap();
        assert!((m.eval(k) - k).abs() < 1e-15);
    }

    #[test]
    fn wavefront_scales_inversely() {
        let g = ScalarMap::PowerMonostable { p: 1.0, kappa: 1.0 };
        let a = PointwiseH::Wavefront { g: g.clone(), speed: 1.0 };
        let b = PointwiseH::Wavefront { g, speed: 2.0 };
        assert_eq!(a.eval(0.0, 0.3, 0.4), 2.0 * b.eval(0.0, 0.3, 0.4));
    }
}
