//! Scalar abstractions.
//!
//! Sequence code only needs an ordered field, so it is written against
//! [`Scalar`], which exact rationals also implement. Anything that takes
//! square roots or diagonalizes a matrix needs [`Real`].

use std::fmt::{Debug, Display};
use std::ops::Neg;

use nalgebra::RealField;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive, Zero};

/// Ordered field used by the sequence toolkit.
pub trait Scalar:
    Clone
    + PartialOrd
    + Debug
    + Display
    + Num
    + Neg<Output = Self>
    + FromPrimitive
    + ToPrimitive
    + Send
    + Sync
    + 'static
{
    /// Multiplier applied to the f64-calibrated tolerances. Exact types use 0.
    const TOL_SCALE: f64;

    fn magnitude(&self) -> Self;

    fn floor_val(&self) -> Self;

    /// Parses a decimal literal such as `"0.25"`, `"-3"`, `"1e-3"`.
    /// Exact types also accept `"p/q"`.
    fn parse_decimal(s: &str) -> Option<Self>;

    /// Converts an f64 literal. Exact types take the binary value exactly.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    fn ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num).expect("i64") / Self::from_i64(den).expect("i64")
    }

    /// An f64-calibrated tolerance rescaled for this type.
    fn tol(base: f64) -> Self {
        Self::lit(base * Self::TOL_SCALE)
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

macro_rules! float_scalar {
    ($t:ty, $scale:expr) => {
        impl Scalar for $t {
            const TOL_SCALE: f64 = $scale;

            fn magnitude(&self) -> Self {
                <$t>::abs(*self)
            }

            fn floor_val(&self) -> Self {
                <$t>::floor(*self)
            }

            fn parse_decimal(s: &str) -> Option<Self> {
                s.trim().parse::<$t>().ok().filter(|x| x.is_finite())
            }
        }
    };
}

float_scalar!(f64, 1.0);
// f32 carries ~9 fewer decimal digits than f64.
float_scalar!(f32, 1e7);

impl Scalar for BigRational {
    const TOL_SCALE: f64 = 0.0;

    fn magnitude(&self) -> Self {
        Signed::abs(self)
    }

    fn floor_val(&self) -> Self {
        self.floor()
    }

    fn parse_decimal(s: &str) -> Option<Self> {
        parse_rational(s.trim())
    }

    fn lit(x: f64) -> Self {
        BigRational::from_float(x).expect("finite literal")
    }

    fn tol(_base: f64) -> Self {
        Self::zero()
    }
}

fn parse_rational(s: &str) -> Option<BigRational> {
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(BigRational::new(p, q));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all: BigInt = format!("{int_part}{frac_part}0").parse::<BigInt>().ok()? / BigInt::from(10);
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = if scale >= 0 {
        BigRational::from_integer(all * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(all, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        value = -value;
    }
    Some(value)
}

/// Floating-point scalar for the matrix side of the library.
pub trait Real: Scalar + RealField + Copy {}

impl Real for f64 {}
impl Real for f32 {}

/// Nearest integer, ties away from zero.
pub(crate) fn round_val<S: Scalar>(x: &S) -> S {
    let half = S::ratio(1, 2);
    if *x >= S::zero() {
        (x.clone() + half).floor_val()
    } else {
        -((-x.clone()) + half).floor_val()
    }
}

/// `Some(n)` when `x` is within `tol` of the integer `n`.
pub(crate) fn near_integer<S: Scalar>(x: &S, tol: &S) -> Option<S> {
    let n = round_val(x);
    if (x.clone() - n.clone()).magnitude() <= *tol {
        Some(n)
    } else {
        None
    }
}

pub(crate) fn to_usize<S: Scalar>(x: &S) -> usize {
    x.to_f64_lossy().round().max(0.0) as usize
}
