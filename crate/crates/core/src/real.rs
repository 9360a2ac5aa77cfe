//! Scalar abstraction for the numeric core.
//!
//! Everything downstream is generic over [`Real`] so the same solvers run at
//! `f32` or `f64`. Tolerances are supplied per type: the documented contract
//! tolerances (1e-12 / 1e-9 / 1e-13) are the `f64` values; the `f32`
//! instantiation uses scaled counterparts.

use std::fmt;
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar usable by the solvers and evaluators.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum<Self>
    + fmt::Debug
    + fmt::Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Tolerance for simplex-sum and normalization checks.
    fn tol_simplex() -> Self;
    /// Tolerance for first-order-condition and agreement checks.
    fn tol_agree() -> Self;
    /// Absolute bisection tolerance on KKT multipliers.
    fn tol_bisect() -> Self;

    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal must convert")
    }

    fn from_count(n: u64) -> Self {
        // u64 -> f64 truncates above 2^53; counts here stay far below that.
        Self::of(n as f64)
    }

    fn two() -> Self {
        Self::one() + Self::one()
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    fn tol_simplex() -> Self {
        1e-12
    }
    fn tol_agree() -> Self {
        1e-9
    }
    fn tol_bisect() -> Self {
        1e-13
    }
}

impl Real for f32 {
    fn tol_simplex() -> Self {
        1e-5
    }
    fn tol_agree() -> Self {
        1e-4
    }
    fn tol_bisect() -> Self {
        1e-6
    }
}
