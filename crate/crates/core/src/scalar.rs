//! Scalar abstraction shared by the evaluators and numeric routines.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FromPrimitive, One, ToPrimitive, Zero};

use crate::symcore::Func;

/// Field element an [`Expr`](crate::Expr) can be evaluated in.
///
/// Floating types evaluate every elementary function; exact rationals only
/// evaluate functions at arguments where the result stays rational.
pub trait Scalar:
    Clone
    + PartialEq
    + std::fmt::Debug
    + Zero
    + One
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Div<Output = Self>
    + std::ops::Neg<Output = Self>
{
    fn from_rational(r: &BigRational) -> Self;

    fn to_f64(&self) -> f64;

    fn abs_val(&self) -> Self;

    fn powi(&self, n: i64) -> Self;

    /// Applies an elementary function, `None` outside its real domain or
    /// when the result is not representable.
    fn apply(&self, f: Func) -> Option<Self>;

    /// True when the value cannot be used as a divisor.
    fn is_singular(&self) -> bool {
        self.is_zero()
    }
}

macro_rules! float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            fn from_rational(r: &BigRational) -> Self {
                match (r.numer().to_f64(), r.denom().to_f64()) {
                    (Some(n), Some(d)) if n.is_finite() && d.is_finite() => (n / d) as $t,
                    _ => ToPrimitive::to_f64(r).unwrap_or(f64::NAN) as $t,
                }
            }

            fn to_f64(&self) -> f64 {
                *self as f64
            }

            fn abs_val(&self) -> Self {
                Float::abs(*self)
            }

            fn powi(&self, n: i64) -> Self {
                match i32::try_from(n) {
                    Ok(n) => Float::powi(*self, n),
                    Err(_) => Float::powf(*self, n as $t),
                }
            }

            fn apply(&self, f: Func) -> Option<Self> {
                let v = *self;
                let out = match f {
                    Func::Sqrt if v < 0.0 => return None,
                    Func::Sqrt => v.sqrt(),
                    Func::Exp => v.exp(),
                    Func::Log if v <= 0.0 => return None,
                    Func::Log => v.ln(),
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                };
                out.is_finite().then_some(out)
            }

            fn is_singular(&self) -> bool {
                *self == 0.0 || !self.is_finite()
            }
        }
    };
}

float_scalar!(f32);
float_scalar!(f64);

impl Scalar for BigRational {
    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn abs_val(&self) -> Self {
        num_traits::Signed::abs(self)
    }

    fn powi(&self, n: i64) -> Self {
        crate::symcore::expr::rational_powi(self, n)
    }

    fn apply(&self, f: Func) -> Option<Self> {
        match f {
            Func::Sqrt => rational_sqrt(self),
            Func::Exp if self.is_zero() => Some(BigRational::one()),
            Func::Log if self.is_one() => Some(BigRational::zero()),
            Func::Sin if self.is_zero() => Some(BigRational::zero()),
            Func::Cos if self.is_zero() => Some(BigRational::one()),
            _ => None,
        }
    }
}

/// Exact square root of a nonnegative rational, if it is a perfect square.
pub fn rational_sqrt(r: &BigRational) -> Option<BigRational> {
    if num_traits::Signed::is_negative(r) {
        return None;
    }
    let n = exact_isqrt(r.numer())?;
    let d = exact_isqrt(r.denom())?;
    Some(BigRational::new(n, d))
}

fn exact_isqrt(n: &BigInt) -> Option<BigInt> {
    let s = n.sqrt();
    (&s * &s == *n).then_some(s)
}

/// Converts an `f64` to the nearest exact rational.
pub fn rational_from_f64(v: f64) -> BigRational {
    BigRational::from_f64(v).unwrap_or_else(BigRational::zero)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_sqrt_only_for_squares() {
        let r = BigRational::new(9.into(), 4.into());
        assert_eq!(rational_sqrt(&r), Some(BigRational::new(3.into(), 2.into())));
        assert_eq!(rational_sqrt(&BigRational::from_integer(2.into())), None);
    }

    #[test]
    fn float_domains() {
        assert_eq!(Scalar::apply(&-1.0f64, Func::Sqrt), None);
        assert_eq!(Scalar::apply(&4.0f32, Func::Sqrt), Some(2.0));
    }
}
