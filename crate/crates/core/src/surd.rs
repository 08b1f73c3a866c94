//! Exact numbers of the form `a + b·√d` with rational `a`, `b`, `d`.
//!
//! Irrational fixed points (the √17 example) and irrational Hopf frequencies
//! (ω² = 3/32) stay exact in a single quadratic field. Combining values from two
//! different fields panics: it signals a logic error, not a data condition.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::scalar::{Rational, Scalar};

#[derive(Clone, Debug)]
pub struct Surd {
    rat: Rational,
    irr: Rational,
    /// Positive, square-free integer radicand; `None` when `irr` is zero.
    radicand: Option<BigInt>,
}

fn strip_squares(mut n: BigInt) -> (BigInt, BigInt) {
    // n = out² · rest with rest square-free over the trial primes.
    let mut out = BigInt::one();
    let mut p = BigInt::from(2u32);
    let limit = BigInt::from(100_000u32);
    while p < limit && &p * &p <= n {
        let pp = &p * &p;
        while (&n % &pp).is_zero() {
            n /= &pp;
            out *= &p;
        }
        p += 1u32;
    }
    (out, n)
}

impl Surd {
    pub fn rational(r: Rational) -> Self {
        Surd { rat: r, irr: Rational::zero(), radicand: None }
    }

    /// `a + b·√d`.
    pub fn new(a: Rational, b: Rational, d: Rational) -> Self {
        assert!(!d.is_negative(), "negative radicand");
        if b.is_zero() || d.is_zero() {
            return Surd::rational(a);
        }
        // √(n/m) = √(n·m)/m, then pull square factors out.
        let nm = d.numer() * d.denom();
        let (outside, rest) = strip_squares(nm);
        let coef = b * Rational::new(outside, d.denom().clone());
        if rest.is_one() {
            return Surd::rational(a + coef);
        }
        Surd { rat: a, irr: coef, radicand: Some(rest) }
    }

    /// `√d` for a non-negative rational `d`.
    pub fn sqrt_of(d: Rational) -> Self {
        Surd::new(Rational::zero(), Rational::one(), d)
    }

    pub fn rational_part(&self) -> &Rational {
        &self.rat
    }

    pub fn irrational_part(&self) -> &Rational {
        &self.irr
    }

    pub fn radicand(&self) -> Option<&BigInt> {
        self.radicand.as_ref()
    }

    /// The value as a rational, when the irrational part vanishes.
    pub fn as_rational(&self) -> Option<Rational> {
        self.irr.is_zero().then(|| self.rat.clone())
    }

    fn field(a: &Surd, b: &Surd) -> Option<BigInt> {
        match (&a.radicand, &b.radicand) {
            (Some(x), Some(y)) => {
                assert!(x == y, "values from different quadratic fields: sqrt({x}) and sqrt({y})");
                Some(x.clone())
            }
            (Some(x), None) | (None, Some(x)) => Some(x.clone()),
            (None, None) => None,
        }
    }

    fn build(rat: Rational, irr: Rational, d: Option<BigInt>) -> Surd {
        if irr.is_zero() {
            Surd::rational(rat)
        } else {
            Surd { rat, irr, radicand: d }
        }
    }

    fn sign(&self) -> Ordering {
        let sa = self.rat.signum();
        let sb = self.irr.signum();
        if sb.is_zero() {
            return sa.cmp(&Rational::zero());
        }
        if sa.is_zero() || sa == sb {
            return sb.cmp(&Rational::zero());
        }
        let d = Rational::from_integer(self.radicand.clone().expect("radicand"));
        let a2 = &self.rat * &self.rat;
        let b2d = &self.irr * &self.irr * d;
        if a2 > b2d {
            sa.cmp(&Rational::zero())
        } else {
            sb.cmp(&Rational::zero())
        }
    }

    fn conjugate(&self) -> Surd {
        Surd { rat: self.rat.clone(), irr: -self.irr.clone(), radicand: self.radicand.clone() }
    }
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = crate::scalar::rational_string(&self.rat);
        match &self.radicand {
            None => write!(f, "{r}"),
            Some(d) => {
                let b = crate::scalar::rational_string(&self.irr);
                if self.rat.is_zero() {
                    write!(f, "{b}*sqrt({d})")
                } else {
                    write!(f, "{r} + {b}*sqrt({d})")
                }
            }
        }
    }
}

impl Add for Surd {
    type Output = Surd;
    fn add(self, o: Surd) -> Surd {
        let d = Surd::field(&self, &o);
        Surd::build(self.rat + o.rat, self.irr + o.irr, d)
    }
}

impl Sub for Surd {
    type Output = Surd;
    fn sub(self, o: Surd) -> Surd {
        self + (-o)
    }
}

impl Neg for Surd {
    type Output = Surd;
    fn neg(self) -> Surd {
        Surd { rat: -self.rat, irr: -self.irr, radicand: self.radicand }
    }
}

impl Mul for Surd {
    type Output = Surd;
    fn mul(self, o: Surd) -> Surd {
        let d = Surd::field(&self, &o);
        let dd = d.clone().map(Rational::from_integer).unwrap_or_else(Rational::zero);
        let rat = &self.rat * &o.rat + &self.irr * &o.irr * dd;
        let irr = &self.rat * &o.irr + &self.irr * &o.rat;
        Surd::build(rat, irr, d)
    }
}

impl Div for Surd {
    type Output = Surd;
    fn div(self, o: Surd) -> Surd {
        assert!(!o.is_zero(), "division by zero");
        let conj = o.conjugate();
        let den = (o * conj.clone()).as_rational().expect("norm is rational");
        let num = self * conj;
        Surd::build(num.rat / &den, num.irr / &den, num.radicand)
    }
}

impl Zero for Surd {
    fn zero() -> Self {
        Surd::rational(Rational::zero())
    }
    fn is_zero(&self) -> bool {
        self.rat.is_zero() && self.irr.is_zero()
    }
}

impl One for Surd {
    fn one() -> Self {
        Surd::rational(Rational::one())
    }
}

impl PartialEq for Surd {
    fn eq(&self, o: &Surd) -> bool {
        (self.clone() - o.clone()).is_zero()
    }
}

impl PartialOrd for Surd {
    fn partial_cmp(&self, o: &Surd) -> Option<Ordering> {
        Some((self.clone() - o.clone()).sign())
    }
}

impl From<Rational> for Surd {
    fn from(r: Rational) -> Self {
        Surd::rational(r)
    }
}

impl Scalar for Surd {
    fn from_ratio(num: i64, den: i64) -> Self {
        Surd::rational(Rational::from_ratio(num, den))
    }
    fn from_f64(x: f64) -> Self {
        Surd::rational(Rational::from_f64(x))
    }
    fn to_f64(&self) -> f64 {
        let a = Scalar::to_f64(&self.rat);
        match &self.radicand {
            None => a,
            Some(d) => {
                let d = Scalar::to_f64(&Rational::from_integer(d.clone()));
                a + Scalar::to_f64(&self.irr) * d.sqrt()
            }
        }
    }
    fn sqrt(&self) -> Option<Self> {
        if self.sign() == Ordering::Less {
            return None;
        }
        match &self.radicand {
            None => match Scalar::sqrt(&self.rat) {
                Some(r) => Some(Surd::rational(r)),
                None => Some(Surd::sqrt_of(self.rat.clone())),
            },
            Some(d) => {
                // Denest √(a + b√d) = x + y√d: x² = (a ± √(a² − b²d))/2.
                let d = Rational::from_integer(d.clone());
                let disc = &self.rat * &self.rat - &self.irr * &self.irr * &d;
                let root = Scalar::sqrt(&disc)?;
                let two = Rational::from_integer(2.into());
                for x2 in [(&self.rat + &root) / &two, (&self.rat - &root) / &two] {
                    if let Some(x) = Scalar::sqrt(&x2) {
                        if x.is_zero() {
                            continue;
                        }
                        let y = &self.irr / (&two * &x);
                        let cand = Surd::build(x, y, self.radicand.clone());
                        if cand.sign() != Ordering::Less && cand.clone() * cand.clone() == *self {
                            return Some(cand);
                        }
                    }
                }
                None
            }
        }
    }
    fn is_exact() -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::q;

    fn s17(a: i64, b: i64, den: i64) -> Surd {
        Surd::new(q(a, den), q(b, den), q(17, 1))
    }

    #[test]
    fn normalises_radicand() {
        let x = Surd::sqrt_of(q(3, 32));
        // √(3/32) = √6 / 8
        assert_eq!(x.radicand().unwrap(), &BigInt::from(6));
        assert_eq!(x.irrational_part(), &q(1, 8));
    }

    #[test]
    fn ordering_matches_floats() {
        let a = s17(47, -11, 64);
        assert!(a > Surd::zero());
        assert!((a.to_f64() - (47.0 - 11.0 * 17f64.sqrt()) / 64.0).abs() < 1e-15);
        let b = s17(173, -53, 512);
        assert!(b < Surd::zero());
    }

    #[test]
    fn field_arithmetic_round_trips() {
        let a = s17(7, -1, 16);
        let b = s17(3, 2, 5);
        let c = (a.clone() * b.clone()) / b.clone();
        assert_eq!(c, a);
        let r = (a.clone() * a.conjugate()).as_rational().unwrap();
        assert_eq!(r, q(49 - 17, 256));
    }

    #[test]
    fn sqrt_denests_when_possible() {
        // (1 + √2)² = 3 + 2√2
        let x = Surd::new(q(3, 1), q(2, 1), q(2, 1));
        assert_eq!(Scalar::sqrt(&x).unwrap(), Surd::new(q(1, 1), q(1, 1), q(2, 1)));
        assert_eq!(Scalar::sqrt(&Surd::rational(q(2, 1))).unwrap().to_f64(), 2f64.sqrt());
    }

    #[test]
    #[should_panic]
    fn mixing_fields_panics() {
        let _ = Surd::sqrt_of(q(2, 1)) + Surd::sqrt_of(q(3, 1));
    }
}
