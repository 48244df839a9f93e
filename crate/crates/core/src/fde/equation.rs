use crate::error::{Error, Result};
use crate::fde::nonlinearity::{Nonlinearity, NonlinearityKind};
use crate::fde::terms::{DelayTerm, State};
use crate::fde::Trajectory;

/// Which built-in family an equation came from. Theorem checks that need a
/// particular structure look at this tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    General,
    DelayG,
    Wavefront,
    Logistic,
    DeviatingGeneral,
}

/// `u'(t) = Σ ℓ0 - Σ ℓ1 + f(u)(t)` with anchor `u(t0) = c` and band `[0, kappa]`.
#[derive(Debug, Clone)]
pub struct Equation {
    pub ell0: Vec<DelayTerm>,
    pub ell1: Vec<DelayTerm>,
    pub f: Nonlinearity,
    pub kappa: f64,
    pub t0: f64,
    pub c: f64,
    pub origin: Origin,
}

/// Right-hand side value plus whether the clamp changed any `f` argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rhs {
    pub value: f64,
    pub clipped: bool,
}

impl Equation {
    pub fn new(
        ell0: Vec<DelayTerm>,
        ell1: Vec<DelayTerm>,
        f: Nonlinearity,
        kappa: f64,
        t0: f64,
        c: f64,
    ) -> Result<Self> {
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(Error::NonPositiveKappa(kappa));
        }
        if !t0.is_finite() {
            return Err(Error::InvalidParameter(format!("t0 must be finite, got {t0}")));
        }
        if !(c >= 0.0) || !c.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "anchor value must be finite and >= 0, got {c}"
            )));
        }
        Ok(Self {
            ell0,
            ell1,
            f,
            kappa,
            t0,
            c,
            origin: Origin::General,
        })
    }

    pub fn with_origin(mut self, origin: Origin) -> Self {
        self.origin = origin;
        self
    }

    pub fn with_anchor(mut self, c: f64) -> Result<Self> {
        if !(c >= 0.0) || !c.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "anchor value must be finite and >= 0, got {c}"
            )));
        }
        self.c = c;
        Ok(self)
    }

    /// The RHS at `t`, reading `u` through `state`.
    pub fn rhs<S: State + ?Sized>(&self, state: &S, t: f64, clamped: bool) -> Result<Rhs> {
        let mut value = 0.0;
        for term in &self.ell0 {
            value += term.eval(state, t)?;
        }
        for term in &self.ell1 {
            value -= term.eval(state, t)?;
        }
        let mut clipped = false;
        let fv = if clamped {
            let kappa = self.kappa;
            let out = self.f.eval(state, t, |x| band(x, kappa))?;
            if !matches!(self.f.kind, NonlinearityKind::Zero) {
                clipped = self
                    .f
                    .read_times(t)?
                    .into_iter()
                    .any(|s| band(state.value(s), kappa) != state.value(s));
            }
            out
        } else {
            self.f.eval(state, t, |x| x)?
        };
        value += fv;
        if !value.is_finite() {
            return Err(Error::NonFinite { t });
        }
        Ok(Rhs { value, clipped })
    }

    /// Only the `f` contribution, for majorant and lower-bound checks.
    pub fn f_value<S: State + ?Sized>(&self, state: &S, t: f64, clamped: bool) -> Result<f64> {
        let kappa = self.kappa;
        if clamped {
            self.f.eval(state, t, |x| band(x, kappa))
        } else {
            self.f.eval(state, t, |x| x)
        }
    }
}

#[inline]
pub(crate) fn band(x: f64, kappa: f64) -> f64 {
    if x > kappa {
        kappa
    } else if x < 0.0 {
        0.0
    } else {
        x
    }
}

/// Projection onto `[0, kappa]`.
pub fn psi_clamp(x: f64, kappa: f64) -> Result<f64> {
    if !(kappa > 0.0) {
        return Err(Error::NonPositiveKappa(kappa));
    }
    Ok(band(x, kappa))
}

/// Evaluate the equation's right-hand side on `traj` at `t`. With `clamped`,
/// the arguments of `f` are projected onto `[0, kappa]`; the linear terms
/// never are.
pub fn eval_rhs(eq: &Equation, traj: &Trajectory, t: f64, clamped: bool) -> Result<f64> {
    Ok(eq.rhs(traj, t, clamped)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fde::coeff::CoeffFunction;
    use crate::fde::nonlinearity::{PointwiseH, ScalarMap};
    use proptest::prelude::*;

    fn delay_model(kappa: f64, p: f64, tau: f64) -> Equation {
        Equation::new(
            vec![DelayTerm::new(
                CoeffFunction::step(0.0, 1.0, 0.0),
                CoeffFunction::shift(tau),
            )],
            vec![DelayTerm::new(CoeffFunction::constant(1.0), CoeffFunction::identity())],
            Nonlinearity::pointwise(
                PointwiseH::DelayReaction {
                    g: ScalarMap::PowerMonostable { p, kappa },
                    p0: CoeffFunction::step(0.0, 1.0, 0.0),
                },
                CoeffFunction::shift(tau),
            ),
            kappa,
            0.0,
            0.5,
        )
        .unwrap()
    }

    fn flat(v: f64) -> Trajectory {
        Trajectory::constant(v, -5.0, 5.0).unwrap()
    }

    #[test]
    fn psi_examples() {
        assert_eq!(psi_clamp(1.5, 1.0), Ok(1.0));
        assert_eq!(psi_clamp(-0.2, 1.0), Ok(0.0));
        assert_eq!(psi_clamp(0.37, 1.0), Ok(0.37));
        assert!(psi_clamp(0.3, 0.0).is_err());
    }

    #[test]
    fn equal_terms_cancel_on_constants() {
        let eq = Equation::new(
            vec![DelayTerm::new(CoeffFunction::constant(1.0), CoeffFunction::shift(1.0))],
            vec![DelayTerm::new(CoeffFunction::constant(1.0), CoeffFunction::identity())],
            Nonlinearity::zero(),
            1.0,
            0.0,
            0.4,
        )
        .unwrap();
        assert_eq!(eval_rhs(&eq, &flat(0.4), 0.3, false).unwrap(), 0.0);
    }

    #[test]
    fn delay_model_examples() {
        let eq = delay_model(1.0, 1.0, 0.25);
        assert_eq!(eval_rhs(&eq, &flat(1.0), -1.0, false).unwrap(), 0.0);
        assert_eq!(eval_rhs(&eq, &flat(0.5), -1.0, false).unwrap(), 0.25);
    }

    #[test]
    fn clamp_touches_only_f() {
        let eq = delay_model(1.0, 1.0, 0.25);
        let u = flat(1.5);
        let r = eq.rhs(&u, -1.0, true).unwrap();
        // ell0 - ell1 = 1.5 - 1.5; h(psi) = G(1) - 1 = 0
        assert_eq!(r.value, 0.0);
        assert!(r.clipped);
        let r = eq.rhs(&flat(0.5), -1.0, true).unwrap();
        assert!(!r.clipped);
    }

    #[test]
    fn non_retarded_deviation_errors() {
        let eq = Equation::new(
            vec![DelayTerm::new(CoeffFunction::constant(1.0), CoeffFunction::shift(-0.5))],
            vec![],
            Nonlinearity::zero(),
            1.0,
            0.0,
            0.0,
        )
        .unwrap();
        assert!(matches!(
            eval_rhs(&eq, &flat(0.0), 0.0, false),
            Err(Error::NotRetarded { .. })
        ));
    }

    proptest! {
        #[test]
        fn psi_stays_in_band(x in -1e6f64..1e6, kappa in 1e-3f64..1e3) {
            let y = psi_clamp(x, kappa).unwrap();
            prop_assert!((0.0..=kappa).contains(&y));
            if (0.0..=kappa).contains(&x) {
                prop_assert_eq!(y, x);
            }
        }

        #[test]
        fn linear_terms_nonnegative_on_band(v in 0.0f64..=1.0, t in -20.0f64..0.0) {
            let eq = delay_model(1.0, 1.0, 0.25);
            let u = flat(v);
            for term in eq.ell0.iter().chain(eq.ell1.iter()) {
                prop_assert!(term.eval(&u, t).unwrap() >= 0.0);
            }
            prop_assert!(eq.f_value(&u, t, false).unwrap() >= 0.0);
        }
    }
}
