//! Mather's minimal average action `β(ω)` for standard-like twist maps.
//!
//! Two independent routes are provided:
//!
//! * [`variational`]: minimize the periodic discrete action at rational
//!   rotation numbers, then approach irrationals along continued-fraction
//!   convergents;
//! * [`conjugacy`] + [`beta`]: solve the conjugacy equation of an invariant
//!   curve spectrally at a fixed (possibly complex) frequency and integrate
//!   the action along it.
//!
//! [`diophantine`] describes the admissible frequency sets and certifies
//! membership up to a finite depth.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod beta;
pub mod conjugacy;
pub mod diophantine;
pub mod fourier;
pub mod io;
pub mod linalg;
pub mod twist_map;
pub mod variational;

pub use num_complex::Complex64;

/// `(√5 - 1)/2`.
pub fn golden_mean() -> f64 {
    (5f64.sqrt() - 1.0) / 2.0
}
