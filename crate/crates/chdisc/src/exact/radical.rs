//! Exact sums of square roots with rational weights.
//!
//! Certified bounds for an ensemble of channels accumulate one trace term per
//! channel, and each term may live in a different quadratic extension (for
//! example an amplitude-damping pair contributes √7 and √13). [`RadicalSum`]
//! represents `q₀ + Σⱼ cⱼ·√dⱼ` with distinct squarefree radicands dⱼ and
//! supports the only operations such bounds need: addition, rational scaling,
//! and exact sign evaluation.
//!
//! Sign evaluation uses interval refinement: √dⱼ is bracketed by dyadic
//! rationals from integer square roots and the precision is doubled until the
//! interval excludes zero. Termination is guaranteed because square roots of
//! distinct squarefree integers are linearly independent over ℚ, so a
//! canonical nonzero representation never denotes the number zero.

use super::quad::{QuadExt, Rational, rational_to_string};
use num::bigint::BigInt;
use num::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::fmt;

/// `base + Σ coeff·√radicand` with canonical, sorted, nonzero terms.
#[derive(Clone, PartialEq, Eq)]
pub struct RadicalSum {
    base: Rational,
    terms: Vec<(Rational, BigInt)>,
}

impl RadicalSum {
    pub fn zero() -> Self {
        RadicalSum {
            base: Rational::zero(),
            terms: Vec::new(),
        }
    }

    pub fn from_rational(r: Rational) -> Self {
        RadicalSum {
            base: r,
            terms: Vec::new(),
        }
    }

    pub fn from_quad(q: &QuadExt) -> Self {
        let mut s = Self::from_rational(q.rational_part().clone());
        if !q.radical_part().is_zero() {
            s.terms
                .push((q.radical_part().clone(), q.radicand().clone()));
        }
        s
    }

    pub fn base(&self) -> &Rational {
        &self.base
    }

    /// Terms `(coeff, radicand)` sorted by radicand.
    pub fn terms(&self) -> &[(Rational, BigInt)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.base.is_zero() && self.terms.is_empty()
    }

    /// True when the value lies in ℚ.
    pub fn is_rational(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        if self.terms.is_empty() {
            Some(&self.base)
        } else {
            None
        }
    }

    fn insert_term(&mut self, coeff: Rational, d: BigInt) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.binary_search_by(|(_, rd)| rd.cmp(&d)) {
            Ok(pos) => {
                self.terms[pos].0 += coeff;
                if self.terms[pos].0.is_zero() {
                    self.terms.remove(pos);
                }
            }
            Err(pos) => self.terms.insert(pos, (coeff, d)),
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let mut out = self.clone();
        out.base += &rhs.base;
        for (c, d) in &rhs.terms {
            out.insert_term(c.clone(), d.clone());
        }
        out
    }

    pub fn add_rational(&self, r: &Rational) -> Self {
        let mut out = self.clone();
        out.base += r;
        out
    }

    pub fn add_quad(&self, q: &QuadExt) -> Self {
        self.add(&Self::from_quad(q))
    }

    pub fn neg(&self) -> Self {
        RadicalSum {
            base: -&self.base,
            terms: self.terms.iter().map(|(c, d)| (-c, d.clone())).collect(),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    pub fn scale(&self, r: &Rational) -> Self {
        if r.is_zero() {
            return Self::zero();
        }
        RadicalSum {
            base: &self.base * r,
            terms: self.terms.iter().map(|(c, d)| (c * r, d.clone())).collect(),
        }
    }

    /// Exact sign: −1, 0, or +1.
    pub fn signum(&self) -> i32 {
        if self.terms.is_empty() {
            return if self.base.is_positive() {
                1
            } else if self.base.is_negative() {
                -1
            } else {
                0
            };
        }
        // Interval refinement; k is the number of bits after the binary point.
        let mut k: u32 = 32;
        while k <= 8192 {
            let scale = BigInt::one() << k;
            let scale_rat = Rational::from_integer(scale.clone());
            let mut lo = self.base.clone();
            let mut hi = self.base.clone();
            for (c, d) in &self.terms {
                // s ≤ √(d·4^k) < s+1  ⇒  s/2^k ≤ √d < (s+1)/2^k.
                let s = (d * (&scale * &scale)).sqrt();
                let root_lo = Rational::from_integer(s.clone()) / &scale_rat;
                let root_hi = Rational::from_integer(s + BigInt::one()) / &scale_rat;
                if c.is_positive() {
                    lo += c * &root_lo;
                    hi += c * &root_hi;
                } else {
                    lo += c * &root_hi;
                    hi += c * &root_lo;
                }
            }
            if lo.is_positive() {
                return 1;
            }
            if hi.is_negative() {
                return -1;
            }
            k *= 2;
        }
        // Unreachable for canonical representations: linear independence of
        // {√d} over ℚ guarantees a nonzero value, and 8192 bits of precision
        // far exceeds any magnitude this crate produces.
        unreachable!("radical sum sign undecided at 8192 bits");
    }

    pub fn is_positive(&self) -> bool {
        self.signum() > 0
    }

    pub fn is_negative(&self) -> bool {
        self.signum() < 0
    }

    pub fn to_f64(&self) -> f64 {
        let mut acc = self.base.to_f64().unwrap_or(f64::NAN);
        for (c, d) in &self.terms {
            acc += c.to_f64().unwrap_or(f64::NAN) * d.to_f64().unwrap_or(f64::NAN).sqrt();
        }
        acc
    }
}

impl PartialOrd for RadicalSum {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for RadicalSum {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sub(other).signum().cmp(&0)
    }
}

impl fmt::Debug for RadicalSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for RadicalSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", rational_to_string(&self.base))?;
        for (c, d) in &self.terms {
            let sign = if c.is_negative() { "-" } else { "+" };
            write!(f, " {} {}√{}", sign, rational_to_string(&c.abs()), d)?;
        }
        Ok(())
    }
}
