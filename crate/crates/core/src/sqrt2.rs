//! Exact arithmetic in Q(√2), enough to compare rationals against the
//! irrational constants used by the dissolution algorithm and its analysis.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::rational::{ratio, Rational};

/// The number `a + b·√2`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Sqrt2Ext {
    pub a: Rational,
    pub b: Rational,
}

impl Sqrt2Ext {
    pub fn new(a: Rational, b: Rational) -> Self {
        Sqrt2Ext { a, b }
    }

    pub fn rational(a: Rational) -> Self {
        Sqrt2Ext { a, b: Rational::zero() }
    }

    /// Exact sign, decided by squaring when the two parts disagree.
    pub fn signum(&self) -> i32 {
        let sa = self.a.signum();
        let sb = self.b.signum();
        if sb == 0 {
            return sa;
        }
        if sa == 0 || sa == sb {
            return sb;
        }
        // opposite signs: compare a^2 against 2 b^2
        let a2 = &self.a * &self.a;
        let b2 = &(&self.b * &self.b) * &Rational::from(2);
        match a2.cmp(&b2) {
            Ordering::Greater => sa,
            Ordering::Less => sb,
            Ordering::Equal => 0,
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.a.to_f64() + self.b.to_f64() * std::f64::consts::SQRT_2
    }

    /// Multiplicative inverse via the conjugate. Panics on zero.
    pub fn recip(&self) -> Self {
        let norm = &(&self.a * &self.a) - &(&(&self.b * &self.b) * &Rational::from(2));
        assert!(!norm.is_zero(), "reciprocal of zero");
        Sqrt2Ext { a: &self.a / &norm, b: -(&self.b / &norm) }
    }

    pub fn scale(&self, k: &Rational) -> Self {
        Sqrt2Ext { a: &self.a * k, b: &self.b * k }
    }
}

/// `1 + √2`, the displacement threshold of the dissolution rule.
pub fn beta() -> Sqrt2Ext {
    Sqrt2Ext::new(Rational::one(), Rational::one())
}

/// `1/(3+2√2) = 3 − 2√2`, the competitive ratio of the dissolution matching rule.
pub fn matching_ratio() -> Sqrt2Ext {
    Sqrt2Ext::new(Rational::from(3), Rational::from(-2))
}

/// `c = 1/(6+4√2) = (3 − 2√2)/2`, the guaranteed ratio after lifting.
pub fn dissolution_floor() -> Sqrt2Ext {
    Sqrt2Ext::new(ratio(3, 2), Rational::from(-1))
}

/// Exact comparison of a rational against `a + b√2`.
pub fn cmp_rational(x: &Rational, y: &Sqrt2Ext) -> Ordering {
    let d = Sqrt2Ext::rational(x.clone()) - y.clone();
    d.signum().cmp(&0)
}

impl Ord for Sqrt2Ext {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.clone() - other.clone()).signum().cmp(&0)
    }
}

impl PartialOrd for Sqrt2Ext {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for Sqrt2Ext {
    type Output = Sqrt2Ext;
    fn add(self, o: Sqrt2Ext) -> Sqrt2Ext {
        Sqrt2Ext { a: self.a + o.a, b: self.b + o.b }
    }
}

impl Sub for Sqrt2Ext {
    type Output = Sqrt2Ext;
    fn sub(self, o: Sqrt2Ext) -> Sqrt2Ext {
        Sqrt2Ext { a: self.a - o.a, b: self.b - o.b }
    }
}

impl Mul for Sqrt2Ext {
    type Output = Sqrt2Ext;
    fn mul(self, o: Sqrt2Ext) -> Sqrt2Ext {
        let two = Rational::from(2);
        Sqrt2Ext {
            a: &(&self.a * &o.a) + &(&(&self.b * &o.b) * &two),
            b: &(&self.a * &o.b) + &(&self.b * &o.a),
        }
    }
}

impl Neg for Sqrt2Ext {
    type Output = Sqrt2Ext;
    fn neg(self) -> Sqrt2Ext {
        Sqrt2Ext { a: -self.a, b: -self.b }
    }
}

impl fmt::Display for Sqrt2Ext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}*sqrt2", self.a, self.b)
    }
}

impl fmt::Debug for Sqrt2Ext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_are_consistent() {
        let one = Sqrt2Ext::rational(Rational::one());
        // (3+2√2)(3−2√2) = 1
        let m = Sqrt2Ext::new(Rational::from(3), Rational::from(2));
        assert_eq!(m * matching_ratio(), one);
        assert_eq!(dissolution_floor().scale(&Rational::from(2)), matching_ratio());
        assert_eq!(beta().recip(), Sqrt2Ext::new(Rational::from(-1), Rational::one()));
        assert!((dissolution_floor().to_f64() - 1.0 / (6.0 + 4.0 * 2f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn threshold_comparisons() {
        // 2 < 1+√2 < 3
        assert_eq!(cmp_rational(&Rational::from(2), &beta()), Ordering::Less);
        assert_eq!(cmp_rational(&Rational::from(3), &beta()), Ordering::Greater);
        assert_eq!(cmp_rational(&ratio(18, 100), &matching_ratio()), Ordering::Greater);
        assert_eq!(cmp_rational(&ratio(17, 100), &matching_ratio()), Ordering::Less);
        assert_eq!(cmp_rational(&ratio(1, 12), &dissolution_floor()), Ordering::Less);
        assert_eq!(cmp_rational(&ratio(1, 11), &dissolution_floor()), Ordering::Greater);
    }

    #[test]
    fn signum_matches_float() {
        for a in -6i64..=6 {
            for b in -6i64..=6 {
                let v = Sqrt2Ext::new(ratio(a, 3), ratio(b, 2));
                let f = v.to_f64();
                let expect = if f.abs() < 1e-12 { 0 } else if f > 0.0 { 1 } else { -1 };
                assert_eq!(v.signum(), expect, "{v}");
            }
        }
    }
}
