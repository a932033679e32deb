//! Exact rationals and real quadratic extensions ℚ(√d).
//!
//! [`QuadExt`] stores a number `a + b·√d` with rational `a`, `b` and an
//! integer radicand `d`. Pure rationals use the sentinel `d = 0` (forcing
//! `b = 0`), so structural equality coincides with numerical equality.
//! Radicands produced by [`sqrt_rational`] are squarefree and ≥ 2, which is
//! what makes exact sign evaluation and cross-radicand independence sound.
//!
//! Scalars from *different* extensions must never meet in arithmetic; doing
//! so is a programming error and panics. Fallible entry points for data that
//! crosses an API boundary (deserialized matrices, user parameters) return
//! [`ExactError`] instead.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use std::fmt;
use thiserror::Error;

/// Arbitrary-precision rational number (ℚ).
pub type Rational = BigRational;

/// Errors produced by exact-arithmetic constructions and algorithms.
#[derive(Debug, Error)]
pub enum ExactError {
    /// A float that is NaN or infinite cannot be represented exactly.
    #[error("non-finite float {0} has no exact rational value")]
    NonFinite(f64),
    /// A rational literal such as `"2/3"` or `"0.25"` failed to parse.
    #[error("invalid rational literal {0:?}")]
    BadLiteral(String),
    /// Square roots of negative rationals leave the real field.
    #[error("square root of negative rational {0}")]
    NegativeRadicand(Rational),
    /// Squarefree extraction gave up; the radicand has no factor below the
    /// trial-division bound and is too large to certify squarefree.
    #[error("radicand {0} is too large to normalize to a squarefree core")]
    RadicandTooLarge(BigInt),
    /// A scalar or matrix mixes two distinct quadratic extensions.
    #[error("radicand mismatch: √{0} vs √{1}")]
    RadicandMismatch(BigInt, BigInt),
    /// A deserialized radicand is invalid (negative, one, or a perfect square).
    #[error("invalid radicand {0}: must be 0 or a squarefree integer ≥ 2")]
    InvalidRadicand(BigInt),
    /// Matrix algorithm invoked on a non-square matrix.
    #[error("matrix is not square ({rows}×{cols})")]
    NotSquare { rows: usize, cols: usize },
    /// Matrix algorithm requires an exactly Hermitian input.
    #[error("matrix is not Hermitian")]
    NotHermitian,
    /// Depolarization search failed: even the pure mixing target is not PSD.
    #[error("no feasible depolarization weight: mixing target is not positive semidefinite")]
    NoFeasibleEta,
}

/// Converts a finite `f64` to the exact rational it represents in IEEE-754.
///
/// No decimal rounding is applied: `0.1` maps to
/// `3602879701896397/36028797018963968`, the bit-exact value of the double.
pub fn float_to_rational(x: f64) -> Result<Rational, ExactError> {
    Rational::from_float(x).ok_or(ExactError::NonFinite(x))
}

/// Parses `"2/3"`, `"-7"`, or decimal strings like `"0.67"` into an exact
/// rational. Decimals are read literally: `"0.67"` becomes `67/100`.
pub fn rational_from_str(s: &str) -> Result<Rational, ExactError> {
    let bad = || ExactError::BadLiteral(s.to_string());
    let t = s.trim();
    if t.is_empty() {
        return Err(bad());
    }
    if let Some((num, den)) = t.split_once('/') {
        let n: BigInt = num.trim().parse().map_err(|_| bad())?;
        let d: BigInt = den.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((int, frac)) = t.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = int.starts_with('-');
        let int_part = if int.is_empty() || int == "-" || int == "+" {
            BigInt::zero()
        } else {
            int.parse().map_err(|_| bad())?
        };
        let frac_num: BigInt = frac.parse().map_err(|_| bad())?;
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let magnitude = int_part.magnitude().clone();
        let unsigned =
            Rational::new(BigInt::from(magnitude), BigInt::one()) + Rational::new(frac_num, scale);
        return Ok(if negative { -unsigned } else { unsigned });
    }
    let n: BigInt = t.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(n))
}

/// Renders a rational as `"num/den"` (or `"num"` when the denominator is 1).
pub fn rational_to_string(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Trial-division bound for squarefree extraction. Together with the final
/// perfect-square test this is complete for radicands up to 10^18.
const TRIAL_LIMIT: u64 = 1_000_000;

/// Splits a nonnegative integer as `n = m²·core` with `core` squarefree.
///
/// Returns `(m, core)`. Fails with [`ExactError::RadicandTooLarge`] when the
/// cofactor left after trial division is neither small enough to be certified
/// squarefree nor a perfect square.
fn extract_square_part(n: &BigInt) -> Result<(BigInt, BigInt), ExactError> {
    debug_assert!(!n.is_negative());
    if n.is_zero() {
        return Ok((BigInt::zero(), BigInt::zero()));
    }
    let mut m = BigInt::one();
    let mut core = BigInt::one();
    let mut rest = n.clone();
    let mut f: u64 = 2;
    while f <= TRIAL_LIMIT {
        let fb = BigInt::from(f);
        let fsq = &fb * &fb;
        if fsq > rest {
            break;
        }
        while (&rest % &fsq).is_zero() {
            rest /= &fsq;
            m *= &fb;
        }
        if (&rest % &fb).is_zero() {
            rest /= &fb;
            core *= &fb;
        }
        f += if f == 2 { 1 } else { 2 };
    }
    if !rest.is_one() {
        let s = rest.sqrt();
        if &s * &s == rest {
            m *= s;
        } else if rest <= BigInt::from(1_000_000_000_000u64) {
            // No factor below TRIAL_LIMIT and at most two prime factors:
            // squarefree unless a perfect square, which was just excluded.
            core *= rest;
        } else {
            return Err(ExactError::RadicandTooLarge(rest));
        }
    }
    Ok((m, core))
}

/// Exact square root of a nonnegative rational, as an element of ℚ(√core).
///
/// `√(p/q) = (m/q)·√core` where `p·q = m²·core` with `core` squarefree; the
/// result degrades to a pure rational whenever the root is rational.
pub fn sqrt_rational(x: &Rational) -> Result<QuadExt, ExactError> {
    if x.is_negative() {
        return Err(ExactError::NegativeRadicand(x.clone()));
    }
    if x.is_zero() {
        return Ok(QuadExt::zero());
    }
    let n = x.numer() * x.denom();
    let (m, core) = extract_square_part(&n)?;
    let coeff = Rational::new(m, x.denom().clone());
    if core.is_one() {
        Ok(QuadExt::from_rational(coeff))
    } else {
        Ok(QuadExt {
            a: Rational::zero(),
            b: coeff,
            d: core,
        })
    }
}

/// An element `a + b·√d` of a real quadratic extension of ℚ.
///
/// Invariants: `d = 0` iff `b = 0` (pure rational), otherwise `d` is a
/// squarefree integer ≥ 2. Arithmetic betwen elements of distinct extensions
/// panics; use [`QuadExt::join_radicand`] to test compatibility first.
#[derive(Clone, PartialEq, Eq)]
pub struct QuadExt {
    a: Rational,
    b: Rational,
    d: BigInt,
}

impl QuadExt {
    /// The zero element (pure rational).
    pub fn zero() -> Self {
        Self::from_rational(Rational::zero())
    }

    /// The unit element (pure rational).
    pub fn one() -> Self {
        Self::from_rational(Rational::one())
    }

    /// Embeds a rational as `r + 0·√d` with the sentinel radicand 0.
    pub fn from_rational(r: Rational) -> Self {
        QuadExt {
            a: r,
            b: Rational::zero(),
            d: BigInt::zero(),
        }
    }

    /// Embeds a small integer.
    pub fn from_int(n: i64) -> Self {
        Self::from_rational(Rational::from_integer(BigInt::from(n)))
    }

    /// Builds `a + b·√d`, normalizing the representation. `d` must be 0 or a
    /// squarefree integer ≥ 2 (as produced by [`sqrt_rational`]); `d = 1` is
    /// folded into the rational part. Perfect squares and negative values are
    /// rejected so that deserialized data cannot violate the invariants.
    pub fn from_parts(a: Rational, b: Rational, d: BigInt) -> Result<Self, ExactError> {
        if b.is_zero() || d.is_zero() {
            if !b.is_zero() {
                return Err(ExactError::InvalidRadicand(d));
            }
            return Ok(Self::from_rational(a));
        }
        if d.is_one() {
            return Ok(Self::from_rational(a + b));
        }
        if d.is_negative() {
            return Err(ExactError::InvalidRadicand(d));
        }
        let (m, core) = extract_square_part(&d)?;
        if core.is_zero() || core.is_one() {
            return Err(ExactError::InvalidRadicand(d));
        }
        if !m.is_one() {
            // d was not squarefree; normalize b·√(m²·core) = (b·m)·√core.
            return Ok(QuadExt {
                a,
                b: b * Rational::from_integer(m),
                d: core,
            });
        }
        Ok(QuadExt { a, b, d })
    }

    /// Rational part `a`.
    pub fn rational_part(&self) -> &Rational {
        &self.a
    }

    /// Radical coefficient `b`.
    pub fn radical_part(&self) -> &Rational {
        &self.b
    }

    /// Radicand `d` (0 for pure rationals).
    pub fn radicand(&self) -> &BigInt {
        &self.d
    }

    /// True when the value lies in ℚ.
    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    /// Returns the value as a rational if it is one.
    pub fn as_rational(&self) -> Option<&Rational> {
        if self.is_rational() {
            Some(&self.a)
        } else {
            None
        }
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    /// Radicand both operands can live in, or an error when they differ.
    pub fn join_radicand(&self, rhs: &Self) -> Result<BigInt, ExactError> {
        if self.d.is_zero() || self.d == rhs.d {
            Ok(rhs.d.clone())
        } else if rhs.d.is_zero() {
            Ok(self.d.clone())
        } else {
            Err(ExactError::RadicandMismatch(self.d.clone(), rhs.d.clone()))
        }
    }

    #[track_caller]
    fn joined(&self, rhs: &Self) -> BigInt {
        self.join_radicand(rhs)
            .expect("arithmetic across distinct quadratic extensions")
    }

    fn with_radicand(a: Rational, b: Rational, d: BigInt) -> Self {
        if b.is_zero() {
            Self::from_rational(a)
        } else {
            debug_assert!(!d.is_zero());
            QuadExt { a, b, d }
        }
    }

    #[track_caller]
    pub fn add(&self, rhs: &Self) -> Self {
        let d = self.joined(rhs);
        Self::with_radicand(&self.a + &rhs.a, &self.b + &rhs.b, d)
    }

    #[track_caller]
    pub fn sub(&self, rhs: &Self) -> Self {
        let d = self.joined(rhs);
        Self::with_radicand(&self.a - &rhs.a, &self.b - &rhs.b, d)
    }

    pub fn neg(&self) -> Self {
        Self::with_radicand(-&self.a, -&self.b, self.d.clone())
    }

    #[track_caller]
    pub fn mul(&self, rhs: &Self) -> Self {
        // Fast paths keep pure-rational work cheap; they dominate in practice.
        if self.b.is_zero() {
            return Self::with_radicand(&self.a * &rhs.a, &self.a * &rhs.b, rhs.d.clone());
        }
        if rhs.b.is_zero() {
            return Self::with_radicand(&self.a * &rhs.a, &self.b * &rhs.a, self.d.clone());
        }
        let d = self.joined(rhs);
        let rad = Rational::from_integer(d.clone());
        let a = &self.a * &rhs.a + (&self.b * &rhs.b) * rad;
        let b = &self.a * &rhs.b + &self.b * &rhs.a;
        Self::with_radicand(a, b, d)
    }

    /// Multiplies by a rational scalar.
    pub fn scale(&self, r: &Rational) -> Self {
        Self::with_radicand(&self.a * r, &self.b * r, self.d.clone())
    }

    /// Galois conjugate `a − b·√d`.
    pub fn conj_radical(&self) -> Self {
        Self::with_radicand(self.a.clone(), -&self.b, self.d.clone())
    }

    /// Multiplicative inverse. Panics on zero.
    pub fn inv(&self) -> Self {
        assert!(!self.is_zero(), "inverse of zero");
        if self.b.is_zero() {
            return Self::from_rational(self.a.recip());
        }
        // 1/(a+b√d) = (a−b√d)/(a²−b²d); the norm is nonzero because d is not
        // a perfect square.
        let norm = &self.a * &self.a - (&self.b * &self.b) * Rational::from_integer(self.d.clone());
        self.conj_radical().scale(&norm.recip())
    }

    #[track_caller]
    pub fn div(&self, rhs: &Self) -> Self {
        self.mul(&rhs.inv())
    }

    /// Exact sign: −1, 0, or +1.
    pub fn signum(&self) -> i32 {
        fn rat_sign(r: &Rational) -> i32 {
            if r.is_positive() {
                1
            } else if r.is_negative() {
                -1
            } else {
                0
            }
        }
        let (sa, sb) = (rat_sign(&self.a), rat_sign(&self.b));
        match (sa, sb) {
            (_, 0) => sa,
            (0, _) => sb,
            _ if sa == sb => sa,
            _ => {
                // a and b have opposite signs: compare a² against b²·d.
                let lhs = &self.a * &self.a;
                let rhs = (&self.b * &self.b) * Rational::from_integer(self.d.clone());
                match lhs.cmp(&rhs) {
                    std::cmp::Ordering::Greater => sa,
                    std::cmp::Ordering::Less => sb,
                    std::cmp::Ordering::Equal => 0,
                }
            }
        }
    }

    pub fn is_positive(&self) -> bool {
        self.signum() > 0
    }

    pub fn is_negative(&self) -> bool {
        self.signum() < 0
    }

    /// Nearest-double approximation (for display and float pre-screens only).
    pub fn to_f64(&self) -> f64 {
        let a = self.a.to_f64().unwrap_or(f64::NAN);
        if self.b.is_zero() {
            return a;
        }
        let b = self.b.to_f64().unwrap_or(f64::NAN);
        let d = self.d.to_f64().unwrap_or(f64::NAN);
        a + b * d.sqrt()
    }
}

impl PartialOrd for QuadExt {
    /// Ordering is defined within a single extension; `None` otherwise.
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        self.join_radicand(other).ok()?;
        Some(self.sub(other).signum().cmp(&0))
    }
}

impl fmt::Debug for QuadExt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for QuadExt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", rational_to_string(&self.a));
        }
        if self.a.is_zero() {
            return write!(f, "{}√{}", rational_to_string(&self.b), self.d);
        }
        let sign = if self.b.is_negative() { "-" } else { "+" };
        write!(
            f,
            "{} {} {}√{}",
            rational_to_string(&self.a),
            sign,
            rational_to_string(&self.b.abs()),
            self.d
        )
    }
}
