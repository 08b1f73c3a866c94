//! Scalar abstraction shared by the exact and floating-point code paths.
//!
//! Algebraic routines (fixed points, Jacobians, Lyapunov coefficients, the
//! invariant-region chain) are written once against [`Scalar`] and run with
//! `f32`, `f64`, [`Rational`] or [`Surd`].

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub use crate::surd::Surd;

/// Arbitrary-precision rational number.
pub type Rational = BigRational;

/// Field operations plus the few extras the algorithms need.
pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialEq
    + PartialOrd
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    /// `num / den`, exact where the type allows it.
    fn from_ratio(num: i64, den: i64) -> Self;

    /// Conversion from a double. Exact types convert the binary value exactly.
    fn from_f64(x: f64) -> Self;

    fn to_f64(&self) -> f64;

    /// Square root, or `None` when negative or not representable in the type.
    fn sqrt(&self) -> Option<Self>;

    /// True for types whose arithmetic has no rounding.
    fn is_exact() -> bool;

    fn from_int(n: i64) -> Self {
        Self::from_ratio(n, 1)
    }

    fn abs(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    /// Exact types compare against zero exactly; floats use `|x| <= tol`.
    fn near_zero(&self, tol: f64) -> bool {
        if Self::is_exact() {
            self.is_zero()
        } else {
            self.to_f64().abs() <= tol
        }
    }

    /// -1, 0 or 1.
    fn signum_i8(&self) -> i8 {
        let z = Self::zero();
        if *self > z {
            1
        } else if *self < z {
            -1
        } else {
            0
        }
    }
}

macro_rules! impl_float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            fn from_ratio(num: i64, den: i64) -> Self {
                (num as f64 / den as f64) as $t
            }
            fn from_f64(x: f64) -> Self {
                x as $t
            }
            fn to_f64(&self) -> f64 {
                *self as f64
            }
            fn sqrt(&self) -> Option<Self> {
                (*self >= 0.0).then(|| <$t>::sqrt(*self))
            }
            fn is_exact() -> bool {
                false
            }
        }
    };
}

impl_float_scalar!(f32);
impl_float_scalar!(f64);

impl Scalar for Rational {
    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    fn from_f64(x: f64) -> Self {
        BigRational::from_float(x).expect("finite double")
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or_else(|| {
            // Very large numerators/denominators: fall back to a scaled ratio.
            let n = self.numer().to_f64().unwrap_or(f64::NAN);
            let d = self.denom().to_f64().unwrap_or(f64::NAN);
            n / d
        })
    }
    fn sqrt(&self) -> Option<Self> {
        if self.is_negative() {
            return None;
        }
        let n = self.numer();
        let d = self.denom();
        let rn = n.sqrt();
        let rd = d.sqrt();
        (&rn * &rn == *n && &rd * &rd == *d).then(|| BigRational::new(rn, rd))
    }
    fn is_exact() -> bool {
        true
    }
    fn abs(&self) -> Self {
        Signed::abs(self)
    }
}

/// Shorthand for an exact rational `n/d`.
pub fn q(n: i64, d: i64) -> Rational {
    Rational::from_ratio(n, d)
}

/// Render an exact rational as `n/d` (or `n` when integral).
pub fn rational_string(x: &Rational) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Floating-point scalars, usable by the integrator.
pub trait Real: Scalar + num_traits::Float + Copy {}
impl<T: Scalar + num_traits::Float + Copy> Real for T {}
