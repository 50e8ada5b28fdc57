//! Numerics for the first self-similar profile of the fourth-order thin film
//! equation `u_t = -(|u|^n u_xxx)_x`.
//!
//! * [`ivp`]: adaptive Dormand-Prince integration with dense output and events.
//! * [`profile`]: regularized forward shooting in `mu = f''(0)`.
//! * [`oscillation`]: the oscillatory-component ODE and the heteroclinic exponent.
//! * [`expansion`]: interface-local expansions and backward shooting.
//! * [`special`]: the `n = 3` logarithmic fit and the `n = 4` nonexistence scan.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod expansion;
pub mod ivp;
pub mod oscillation;
pub mod profile;
pub mod roots;
pub mod special;

/// Regularization used throughout: `|f|^n` is replaced by `(eps^2 + f^2)^(n/2)`.
pub const DEFAULT_EPS: f64 = 1e-11;

/// `f * (eps^2 + f^2)^(-n/2)`, the regularized `f / |f|^n`.
#[inline]
pub fn reg_quotient(f: f64, n: f64, eps: f64) -> f64 {
    f * (eps * eps + f * f).powf(-0.5 * n)
}
