//! Scalar abstraction for the probability and moment engines.
//!
//! Everything oracle-facing runs over [`crate::Rational`] so that equality
//! checks are bit-exact. The same engines instantiate with `f64` when speed
//! matters more than exactness (rational denominators grow with the step
//! count). The trait is intentionally minimal: ring operations from
//! `num_traits` plus conversion from integers and exact ratios.

use num::bigint::BigInt;
use num::rational::Ratio;
use num::ToPrimitive;

use crate::Rational;

/// Field-like scalar the engines are generic over.
pub trait Scalar:
    num::Num
    + Clone
    + PartialEq
    + std::ops::Neg<Output = Self>
    + std::fmt::Debug
    + std::fmt::Display
    + Send
    + Sync
    + 'static
{
    fn from_i64(v: i64) -> Self;

    fn from_bigint(v: &BigInt) -> Self;

    /// Exact-to-native conversion; lossless for [`Rational`], rounding for `f64`.
    fn from_ratio(q: &Rational) -> Self;
}

impl Scalar for Rational {
    fn from_i64(v: i64) -> Self {
        Ratio::from_integer(BigInt::from(v))
    }

    fn from_bigint(v: &BigInt) -> Self {
        Ratio::from_integer(v.clone())
    }

    fn from_ratio(q: &Rational) -> Self {
        q.clone()
    }
}

impl Scalar for f64 {
    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn from_bigint(v: &BigInt) -> Self {
        v.to_f64().unwrap_or(f64::NAN)
    }

    fn from_ratio(q: &Rational) -> Self {
        q.to_f64().unwrap_or(f64::NAN)
    }
}

/// Formats a rational as an explicit `p/q` string, including `q = 1`.
pub fn ratio_string(q: &Rational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// Parses the `p/q` form produced by [`ratio_string`]; bare integers also pass.
pub fn parse_ratio(s: &str) -> Option<Rational> {
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().ok()?;
            let q: BigInt = q.trim().parse().ok()?;
            if q == BigInt::from(0) {
                None
            } else {
                Some(Ratio::new(p, q))
            }
        }
        None => {
            let p: BigInt = s.trim().parse().ok()?;
            Some(Ratio::from_integer(p))
        }
    }
}
