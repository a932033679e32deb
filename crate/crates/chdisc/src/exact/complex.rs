//! Exact complex scalars over a quadratic extension.
//!
//! [`ExactComplex`] pairs two [`QuadExt`] values as real and imaginary parts.
//! Both parts must live in the same extension ℚ(√d); the usual sentinel rules
//! apply (either part may be pure rational). These scalars implement the
//! generic [`Scalar`](crate::tensor::Scalar) trait, so every labeled-tensor
//! operation in this crate runs unchanged in exact arithmetic.

use super::quad::{ExactError, QuadExt, Rational, float_to_rational};
use crate::tensor::Scalar;
use num::BigInt;
use num_complex::Complex64;
use std::fmt;

/// Complex number `re + i·im` with exact parts in a common ℚ(√d).
#[derive(Clone, PartialEq, Eq)]
pub struct ExactComplex {
    pub re: QuadExt,
    pub im: QuadExt,
}

impl ExactComplex {
    pub fn new(re: QuadExt, im: QuadExt) -> Self {
        ExactComplex { re, im }
    }

    pub fn zero() -> Self {
        ExactComplex {
            re: QuadExt::zero(),
            im: QuadExt::zero(),
        }
    }

    pub fn one() -> Self {
        ExactComplex {
            re: QuadExt::one(),
            im: QuadExt::zero(),
        }
    }

    /// The imaginary unit.
    pub fn i() -> Self {
        ExactComplex {
            re: QuadExt::zero(),
            im: QuadExt::one(),
        }
    }

    pub fn from_rational(r: Rational) -> Self {
        ExactComplex {
            re: QuadExt::from_rational(r),
            im: QuadExt::zero(),
        }
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rational(Rational::from_integer(BigInt::from(n)))
    }

    pub fn from_quad(q: QuadExt) -> Self {
        ExactComplex {
            re: q,
            im: QuadExt::zero(),
        }
    }

    /// Exact value of a complex double (both components must be finite).
    pub fn from_c64(z: Complex64) -> Result<Self, ExactError> {
        Ok(ExactComplex {
            re: QuadExt::from_rational(float_to_rational(z.re)?),
            im: QuadExt::from_rational(float_to_rational(z.im)?),
        })
    }

    /// True when the value is real (imaginary part exactly zero).
    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    /// Radicand shared by both parts, or an error when they conflict.
    pub fn radicand(&self) -> Result<BigInt, ExactError> {
        self.re.join_radicand(&self.im)
    }

    pub fn add(&self, rhs: &Self) -> Self {
        ExactComplex {
            re: self.re.add(&rhs.re),
            im: self.im.add(&rhs.im),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        ExactComplex {
            re: self.re.sub(&rhs.re),
            im: self.im.sub(&rhs.im),
        }
    }

    pub fn neg(&self) -> Self {
        ExactComplex {
            re: self.re.neg(),
            im: self.im.neg(),
        }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        ExactComplex {
            re: self.re.mul(&rhs.re).sub(&self.im.mul(&rhs.im)),
            im: self.re.mul(&rhs.im).add(&self.im.mul(&rhs.re)),
        }
    }

    /// Complex conjugate.
    pub fn conj(&self) -> Self {
        ExactComplex {
            re: self.re.clone(),
            im: self.im.neg(),
        }
    }

    /// Squared modulus `re² + im²` (real, nonnegative, in the same field).
    pub fn norm_sqr(&self) -> QuadExt {
        self.re.mul(&self.re).add(&self.im.mul(&self.im))
    }

    /// Multiplies by a rational scalar.
    pub fn scale(&self, r: &Rational) -> Self {
        ExactComplex {
            re: self.re.scale(r),
            im: self.im.scale(r),
        }
    }

    /// Multiplies by a real field element.
    pub fn scale_quad(&self, q: &QuadExt) -> Self {
        ExactComplex {
            re: self.re.mul(q),
            im: self.im.mul(q),
        }
    }

    /// Divides by a nonzero real field element.
    pub fn div_real(&self, q: &QuadExt) -> Self {
        self.scale_quad(&q.inv())
    }

    /// Full complex division `self / rhs`; panics on zero divisor.
    pub fn div(&self, rhs: &Self) -> Self {
        let n = rhs.norm_sqr();
        self.mul(&rhs.conj()).div_real(&n)
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }
}

impl fmt::Debug for ExactComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} , {}i)", self.re, self.im)
    }
}

impl fmt::Display for ExactComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else {
            write!(f, "{} + ({})i", self.re, self.im)
        }
    }
}

impl Scalar for ExactComplex {
    fn zero() -> Self {
        ExactComplex::zero()
    }

    fn one() -> Self {
        ExactComplex::one()
    }

    fn is_zero(&self) -> bool {
        ExactComplex::is_zero(self)
    }

    fn add(&self, rhs: &Self) -> Self {
        ExactComplex::add(self, rhs)
    }

    fn sub(&self, rhs: &Self) -> Self {
        ExactComplex::sub(self, rhs)
    }

    fn mul(&self, rhs: &Self) -> Self {
        ExactComplex::mul(self, rhs)
    }

    fn neg(&self) -> Self {
        ExactComplex::neg(self)
    }

    fn conj(&self) -> Self {
        ExactComplex::conj(self)
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Self::from_rational(Rational::new(BigInt::from(num), BigInt::from(den)))
    }

    fn scale_ratio(&self, num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        self.scale(&Rational::new(BigInt::from(num), BigInt::from(den)))
    }

    fn to_c64(&self) -> Complex64 {
        ExactComplex::to_c64(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::quad::sqrt_rational;

    fn rat(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn complex_field_arithmetic() {
        let i = ExactComplex::i();
        assert_eq!(i.mul(&i), ExactComplex::from_int(-1));
        let z = ExactComplex::new(
            QuadExt::from_rational(rat(1, 2)),
            QuadExt::from_rational(rat(-3, 4)),
        );
        let w = z.mul(&z.conj());
        assert!(w.is_real());
        assert_eq!(w.re.as_rational().unwrap(), &(rat(1, 4) + rat(9, 16)));
        let q = z.div(&z);
        assert_eq!(q, ExactComplex::one());
    }

    #[test]
    fn quadratic_parts_stay_in_field() {
        let s = sqrt_rational(&rat(33, 100)).unwrap(); // (1/10)√33
        let z = ExactComplex::new(QuadExt::from_rational(rat(1, 1)), s.clone());
        let zz = z.mul(&z);
        // (1 + i·s)² = 1 − 33/100 + 2i·s.
        assert_eq!(zz.re.as_rational().unwrap(), &rat(67, 100));
        assert_eq!(zz.im, s.scale(&rat(2, 1)));
        assert_eq!(z.radicand().unwrap(), BigInt::from(33));
    }

    #[test]
    fn exact_from_double() {
        let z = ExactComplex::from_c64(Complex64::new(0.5, -0.25)).unwrap();
        assert_eq!(z.re.as_rational().unwrap(), &rat(1, 2));
        assert_eq!(z.im.as_rational().unwrap(), &rat(-1, 4));
        assert!(ExactComplex::from_c64(Complex64::new(f64::NAN, 0.0)).is_err());
    }
}
