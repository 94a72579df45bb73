//! Arbitrary-precision reals.
//!
//! `Real` wraps an MPFR float. Binary operations round to the larger of the
//! two operand precisions, so precision flows from the inputs: entry points
//! create values at guard precision (4x the requested bits) and exported
//! results are rounded back down. Rounding error is not tracked; the guard
//! factor plus the precision-doubling check (`tests`) stand in for it.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use rug::float::Round;
use rug::ops::Pow;
use rug::{Float, Integer, Rational};

use crate::error::{Error, Result};

/// Requested precision in bits, before the guard factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Prec(u32);

impl Prec {
    pub const DEFAULT_BITS: u32 = 256;
    /// MPFR accepts much more; this cap keeps runaway requests obvious.
    const MAX_BITS: u32 = 1 << 24;

    pub fn new(bits: u32) -> Result<Prec> {
        if bits == 0 || bits > Self::MAX_BITS {
            return Err(Error::InvalidInput(format!(
                "precision must be in 1..={} bits, got {bits}",
                Self::MAX_BITS
            )));
        }
        Ok(Prec(bits))
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    /// Working precision: 4x guard over the requested bits.
    pub fn guard_bits(self) -> u32 {
        self.0.saturating_mul(4).min(Self::MAX_BITS)
    }

    pub fn doubled(self) -> Prec {
        Prec(self.0.saturating_mul(2).min(Self::MAX_BITS))
    }

    /// Decimal digits that round-trip this precision.
    pub fn roundtrip_digits(self) -> usize {
        (self.0 as f64 * std::f64::consts::LOG10_2).ceil() as usize + 2
    }
}

impl Default for Prec {
    fn default() -> Self {
        Prec(Self::DEFAULT_BITS)
    }
}

/// An arbitrary-precision floating-point number.
///
/// Every finite `Real` is an exact dyadic rational; `to_rational` recovers it
/// losslessly, which is what lets zero-set membership of evaluation points
/// stay an exact question.
#[derive(Clone, PartialEq, PartialOrd)]
pub struct Real(Float);

impl Real {
    pub fn zero(bits: u32) -> Real {
        Real(Float::new(bits))
    }

    pub fn one(bits: u32) -> Real {
        Real(Float::with_val(bits, 1))
    }

    pub fn from_int(v: i64, bits: u32) -> Real {
        Real(Float::with_val(bits, v))
    }

    pub fn from_integer(v: &Integer, bits: u32) -> Real {
        Real(Float::with_val(bits, v))
    }

    pub fn from_rational(q: &Rational, bits: u32) -> Real {
        Real(Float::with_val(bits, q))
    }

    pub fn pi(bits: u32) -> Real {
        Real(Float::with_val(bits, rug::float::Constant::Pi))
    }

    pub fn prec(&self) -> u32 {
        self.0.prec()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        self.0.is_finite()
    }

    pub fn is_sign_positive(&self) -> bool {
        self.0.is_sign_positive()
    }

    /// Binary exponent of the leading bit, `None` for zero.
    pub fn exponent(&self) -> Option<i32> {
        self.0.get_exp()
    }

    /// Exact conversion; every finite float is a dyadic rational.
    pub fn to_rational(&self) -> Option<Rational> {
        self.0.to_rational()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }

    pub fn abs(&self) -> Real {
        Real(Float::with_val(self.prec(), self.0.abs_ref()))
    }

    pub fn neg_ref(&self) -> Real {
        Real(Float::with_val(self.prec(), -&self.0))
    }

    /// `self * 2^k`, exact.
    pub fn mul_2exp(&self, k: i32) -> Real {
        let mut f = self.0.clone();
        if k >= 0 {
            f <<= k as u32;
        } else {
            f >>= (-k) as u32;
        }
        Real(f)
    }

    /// 2^k at the given precision, exact.
    pub fn pow2(k: i32, bits: u32) -> Real {
        Real::one(bits).mul_2exp(k)
    }

    pub fn recip(&self) -> Real {
        Real(Float::with_val(self.prec(), self.0.recip_ref()))
    }

    pub fn sqrt(&self) -> Real {
        Real(Float::with_val(self.prec(), self.0.sqrt_ref()))
    }

    pub fn exp(&self) -> Real {
        Real(Float::with_val(self.prec(), self.0.exp_ref()))
    }

    /// `exp` that reports range trouble: `Err` on overflow to infinity,
    /// `(zero, true)` when the true value underflows the exponent range.
    pub fn exp_checked(&self) -> Result<(Real, bool)> {
        let v = self.exp();
        if !v.is_finite() {
            return Err(Error::ExponentOverflow);
        }
        if v.is_zero() && self.is_finite() {
            return Ok((Real::zero(self.prec()), true));
        }
        Ok((v, false))
    }

    pub fn ln(&self) -> Real {
        Real(Float::with_val(self.prec(), self.0.ln_ref()))
    }

    pub fn sin_cos(&self) -> (Real, Real) {
        let (s, c) = self
            .0
            .clone()
            .sin_cos(Float::new(self.prec()));
        (Real(s), Real(c))
    }

    pub fn powi(&self, e: i32) -> Real {
        Real(Float::with_val(self.prec(), (&self.0).pow(e)))
    }

    pub fn min(&self, other: &Real) -> Real {
        if self <= other {
            self.clone()
        } else {
            other.clone()
        }
    }

    pub fn max(&self, other: &Real) -> Real {
        if self >= other {
            self.clone()
        } else {
            other.clone()
        }
    }

    pub fn cmp_rational(&self, q: &Rational) -> Ordering {
        self.0.partial_cmp(q).expect("finite comparison")
    }

    pub fn eq_rational(&self, q: &Rational) -> bool {
        self.cmp_rational(q) == Ordering::Equal
    }

    /// Round to a (usually smaller) precision, ties to even.
    pub fn round_to(&self, bits: u32) -> Real {
        let mut f = self.0.clone();
        f.set_prec_round(bits, Round::Nearest);
        Real(f)
    }

    /// Nudge upward by a relative `2^-slack_bits`, for quasi-certified upper
    /// bounds computed in rounded arithmetic.
    pub fn bump_up(&self, slack_bits: u32) -> Real {
        let slack = self.abs().mul_2exp(-(slack_bits as i32));
        self + &slack
    }

    /// Decimal string with the round-trip digit count for `prec`.
    pub fn to_decimal(&self, prec: Prec) -> String {
        let rounded = self.round_to(prec.bits());
        rounded.0.to_string_radix(10, Some(prec.roundtrip_digits()))
    }
}

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.to_string_radix(10, Some(17)))
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.to_string_radix(10, None))
    }
}

fn out_prec(a: &Real, b: &Real) -> u32 {
    a.prec().max(b.prec())
}

macro_rules! binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&Real> for &Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                Real(Float::with_val(out_prec(self, rhs), &self.0 $op &rhs.0))
            }
        }
        impl $trait<Real> for Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                (&self) $op (&rhs)
            }
        }
        impl $trait<&Real> for Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                (&self) $op rhs
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);
binop!(Div, div, /);

impl Neg for &Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real(Float::with_val(self.prec(), -&self.0))
    }
}

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        -&self
    }
}

impl Mul<i64> for &Real {
    type Output = Real;
    fn mul(self, rhs: i64) -> Real {
        Real(Float::with_val(self.prec(), &self.0 * rhs))
    }
}
