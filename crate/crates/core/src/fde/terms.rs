use crate::error::{Error, Result};
use crate::fde::coeff::CoeffFunction;

/// Read access to a solution history. Queries are always at times no later
/// than the evaluation time.
pub trait State {
    fn value(&self, t: f64) -> f64;
}

impl State for crate::fde::Trajectory {
    fn value(&self, t: f64) -> f64 {
        self.eval(t)
    }
}

/// `p(t) u(mu(t))` with `p >= 0` and `mu(t) <= t`.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayTerm {
    pub coefficient: CoeffFunction,
    pub deviation: CoeffFunction,
}

impl DelayTerm {
    pub fn new(coefficient: CoeffFunction, deviation: CoeffFunction) -> Self {
        Self {
            coefficient,
            deviation,
        }
    }

    pub fn eval<S: State + ?Sized>(&self, u: &S, t: f64) -> Result<f64> {
        let p = self.coefficient.eval_nonneg("p", t)?;
        let mu = self.deviation.eval_retarded("mu", t)?;
        if p == 0.0 {
            return Ok(0.0);
        }
        Ok(p * u.value(mu))
    }
}

/// One atom of a discrete Stieltjes kernel: mass `mass(t)` placed at
/// `node(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelAtom {
    pub node: CoeffFunction,
    pub mass: CoeffFunction,
}

/// A discrete measure on `[nu(t), t]` for every `t`.
///
/// Masses varying in time are tables in `t`, so slices given at a few
/// evaluation times are interpolated linearly in between.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributedTerm {
    pub lower: CoeffFunction,
    pub atoms: Vec<KernelAtom>,
    /// Declared absolute error of the atoms against the measure they stand for.
    pub accuracy: f64,
}

impl DistributedTerm {
    pub fn new(lower: CoeffFunction, atoms: Vec<KernelAtom>, accuracy: f64) -> Self {
        Self {
            lower,
            atoms,
            accuracy,
        }
    }

    /// Mass `mass` concentrated at `s = t - lag`, with `nu(t) = t - lag`.
    pub fn point_mass(lag: f64, mass: f64) -> Result<Self> {
        if !(lag >= 0.0) || !(mass >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "point mass needs lag >= 0 and mass >= 0 (lag {lag}, mass {mass})"
            )));
        }
        Ok(Self::new(
            CoeffFunction::shift(lag),
            vec![KernelAtom {
                node: CoeffFunction::shift(lag),
                mass: CoeffFunction::constant(mass),
            }],
            0.0,
        ))
    }

    /// Constant density on `[t - width, t]`, discretised by composite
    /// Simpson with `intervals` (even) panels. Exact for the total mass.
    pub fn uniform(width: f64, density: f64, intervals: usize) -> Result<Self> {
        if !(width > 0.0) || !(density >= 0.0) || intervals < 2 || !intervals.is_multiple_of(2) {
            return Err(Error::InvalidParameter(
                "uniform kernel needs width > 0, density >= 0 and an even panel count".into(),
            ));
        }
        let h = width / intervals as f64;
        let atoms = (0..=intervals)
            .map(|k| {
                let weight = if k == 0 || k == intervals {
                    1.0
                } else if k % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                KernelAtom {
                    node: CoeffFunction::shift(width - k as f64 * h),
                    mass: CoeffFunction::constant(density * weight * h / 3.0),
                }
            })
            .collect();
        Ok(Self::new(CoeffFunction::shift(width), atoms, 1e-14 * width * density))
    }

    /// `K(t) = ∫_{nu(t)}^t d_s K(t, s)`, the total mass at time `t`.
    pub fn total_mass(&self, t: f64) -> Result<f64> {
        let mut total = 0.0;
        for atom in &self.atoms {
            total += self.atom_at(atom, t)?.1;
        }
        Ok(total)
    }

    pub(crate) fn atom_at(&self, atom: &KernelAtom, t: f64) -> Result<(f64, f64)> {
        let mass = atom.mass.eval(t);
        if mass < 0.0 || mass.is_nan() {
            return Err(Error::NegativeMass { t, mass });
        }
        let lower = self.lower.eval_retarded("nu", t)?;
        let node = atom.node.eval(t);
        let slack = crate::fde::coeff::retard_slack(t);
        if node > t + slack || node < lower - slack {
            return Err(Error::NodeOutOfRange { t, node, lower });
        }
        Ok((node.min(t), mass))
    }

    /// Weighted sum of `integrand(u(s_j))` over the atoms at time `t`.
    pub(crate) fn weighted_sum<S, F>(&self, u: &S, t: f64, integrand: F) -> Result<f64>
    where
        S: State + ?Sized,
        F: Fn(f64) -> f64,
    {
        let mut acc = 0.0;
        for atom in &self.atoms {
            let (node, mass) = self.atom_at(atom, t)?;
            if mass != 0.0 {
                acc += mass * integrand(u.value(node));
            }
        }
        Ok(acc)
    }
}

/// `|1 - x/kappa|^lam * sgn(1 - x/kappa)`, with `sgn(0) = 0`.
pub fn logistic_integrand(x: f64, kappa: f64, lam_exp: f64) -> f64 {
    let d = 1.0 - x / kappa;
    if d == 0.0 {
        0.0
    } else {
        d.abs().powf(lam_exp) * d.signum()
    }
}

/// `Σ_j w_j |1 - u(s_j)/kappa|^lam sgn(1 - u(s_j)/kappa)` at time `t`.
pub fn eval_distributed<S: State + ?Sized>(
    term: &DistributedTerm,
    traj: &S,
    t: f64,
    kappa: f64,
    lam_exp: f64,
) -> Result<f64> {
    if !(kappa > 0.0) {
        return Err(Error::NonPositiveKappa(kappa));
    }
    if !(lam_exp > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "exponent must be positive, got {lam_exp}"
        )));
    }
    term.weighted_sum(traj, t, |x| logistic_integrand(x, kappa, lam_exp))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fde::Trajectory;

    fn flat(v: f64) -> Trajectory {
        Trajectory::constant(v, -10.0, 10.0).unwrap()
    }

    #[test]
    fn vanishes_at_kappa() {
        let k = DistributedTerm::uniform(1.5, 2.0, 8).unwrap();
        assert_eq!(eval_distributed(&k, &flat(3.0), 0.0, 3.0, 0.7).unwrap(), 0.0);
    }

    #[test]
    fn zero_state_gives_total_mass() {
        let k = DistributedTerm::point_mass(1.0, 2.0).unwrap();
        assert_eq!(eval_distributed(&k, &flat(0.0), 0.0, 1.0, 3.3).unwrap(), 2.0);
        let u = DistributedTerm::uniform(2.0, 1.0, 10).unwrap();
        let v = eval_distributed(&u, &flat(0.0), 0.0, 1.0, 0.5).unwrap();
        assert!((v - u.total_mass(0.0).unwrap()).abs() <= u.accuracy + 1e-15);
        assert!((v - 2.0).abs() < 1e-14);
    }

    #[test]
    fn half_kappa_squared() {
        let k = DistributedTerm::point_mass(1.0, 1.0).unwrap();
        let v = eval_distributed(&k, &flat(0.5), 0.0, 1.0, 2.0).unwrap();
        assert!((v - 0.25).abs() < 1e-15);
    }

    #[test]
    fn sign_flips_above_kappa() {
        let k = DistributedTerm::point_mass(0.5, 1.0).unwrap();
        let v = eval_distributed(&k, &flat(1.5), 0.0, 1.0, 1.0).unwrap();
        assert!((v + 0.5).abs() < 1e-15);
    }

    #[test]
    fn negative_mass_rejected() {
        let k = DistributedTerm::new(
            CoeffFunction::shift(1.0),
            vec![KernelAtom {
                node: CoeffFunction::shift(0.5),
                mass: CoeffFunction::constant(-1.0),
            }],
            0.0,
        );
        assert!(matches!(
            eval_distributed(&k, &flat(0.0), 0.0, 1.0, 1.0),
            Err(Error::NegativeMass { .. })
        ));
    }

    #[test]
    fn node_outside_memory_rejected() {
        let k = DistributedTerm::new(
            CoeffFunction::shift(1.0),
            vec![KernelAtom {
                node: CoeffFunction::shift(2.0),
                mass: CoeffFunction::constant(1.0),
            }],
            0.0,
        );
        assert!(matches!(
            k.total_mass(0.0),
            Err(Error::NodeOutOfRange { .. })
        ));
    }

    #[test]
    fn delay_term_positive_on_positive_state() {
        let term = DelayTerm::new(CoeffFunction::constant(2.0), CoeffFunction::shift(0.3));
        assert_eq!(term.eval(&flat(0.25), 1.0).unwrap(), 0.5);
        let bad = DelayTerm::new(CoeffFunction::constant(1.0), CoeffFunction::shift(-0.1));
        assert!(bad.eval(&flat(0.25), 1.0).is_err());
    }
}
