//! Operator forms, trajectories and right-hand-side evaluation.

pub mod coeff;
pub mod equation;
pub mod nonlinearity;
pub mod terms;
pub mod trajectory;

pub use coeff::{Builtin, CoeffFunction, Interp, Table};
pub use equation::{eval_rhs, psi_clamp, Equation, Origin, Rhs};
pub use nonlinearity::{
    LogisticTerm, Majorant, Nonlinearity, NonlinearityKind, PointwiseFn, PointwiseH, ScalarFn,
    ScalarMap,
};
pub use terms::{eval_distributed, logistic_integrand, DelayTerm, DistributedTerm, KernelAtom, State};
pub use trajectory::{theta_eval, Trajectory};
