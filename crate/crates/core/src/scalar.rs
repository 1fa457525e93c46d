//! Scalar abstraction for the geometry kernels.
//!
//! Everything in this crate is written against [`Real`] so the same code runs
//! at `f32` and `f64`. Tolerances are specified as `f64` magnitudes calibrated
//! for double precision and rescaled by the ratio of machine epsilons, so an
//! `f32` instantiation gets proportionally looser checks instead of
//! impossible ones.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar usable by the geometry and solver kernels.
pub trait Real:
    Float
    + FromPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Convert a double-precision constant (losslessly for `f64`).
    fn c(value: f64) -> Self {
        Self::from_f64(value).expect("constant representable")
    }

    /// A tolerance stated for double precision, carried to this type's
    /// precision. For `f64` this returns `base` exactly; narrower types
    /// preserve the tolerance's position between one machine epsilon and
    /// one (`base = eps64^k` maps to `eps_self^k`), so e.g. `1e-12` at
    /// `f64` becomes about `5e-6` at `f32` rather than an unmeetable
    /// `1e-12` or a meaningless linear rescale.
    fn tol(base: f64) -> Self;

    /// Lossy view as `f64`, used only for formatting and reports.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    fn tol(base: f64) -> Self {
        base
    }
}

impl Real for f32 {
    fn tol(base: f64) -> Self {
        let exponent = base.ln() / (f64::EPSILON).ln();
        (f32::EPSILON as f64).powf(exponent) as f32
    }
}
