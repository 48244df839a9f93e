//! Numerical tools for scalar retarded functional differential equations
//! `u'(t) = ℓ0(u)(t) - ℓ1(u)(t) + f(u)(t)` on the real line.
//!
//! Solutions bounded near minus infinity are built by shooting on truncated
//! intervals `[a_n, t0]` and letting `a_n` recede, then continued forward.

pub mod analysis;
pub mod error;
pub mod fde;
pub mod hypothesis;
pub mod models;
pub mod par;
pub mod quad;
pub mod roots;
pub mod solver;

pub use error::{Error, Result};
pub use par::Exec;
