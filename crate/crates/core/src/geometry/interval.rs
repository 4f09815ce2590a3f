//! Closed real intervals with round-to-nearest endpoint arithmetic.
//!
//! Endpoints are evaluated with the same operation order as the matching
//! point computation, so for monotone expressions the rounded point value
//! always lies inside the rounded interval. Transcendental functions are
//! widened by one ulp on each side since libm makes no monotonicity promise.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "reversed interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        // Exact for dyadic endpoints; avoids overflow for huge magnitudes.
        self.lo + 0.5 * (self.hi - self.lo)
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval::new(self.lo.min(other.lo), self.hi.max(other.hi))
    }

    /// Closed intersection, `None` when the intervals are disjoint.
    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }

    /// `c * self` with the product evaluated at both endpoints.
    pub fn scale(&self, c: f64) -> Interval {
        let a = c * self.lo;
        let b = c * self.hi;
        if a <= b {
            Interval { lo: a, hi: b }
        } else {
            Interval { lo: b, hi: a }
        }
    }

    pub fn sqr(&self) -> Interval {
        let a = self.lo * self.lo;
        let b = self.hi * self.hi;
        if self.lo >= 0.0 {
            Interval::new(a, b)
        } else if self.hi <= 0.0 {
            Interval::new(b, a)
        } else {
            Interval::new(0.0, a.max(b))
        }
    }

    /// Square root of the non-negative part.
    pub fn sqrt(&self) -> Interval {
        Interval::new(self.lo.max(0.0).sqrt(), self.hi.max(0.0).sqrt())
    }

    /// `1 / self`; the interval must not contain zero.
    pub fn recip(&self) -> Interval {
        debug_assert!(!self.contains(0.0), "reciprocal of {self}");
        Interval::new(1.0 / self.hi, 1.0 / self.lo)
    }

    pub fn cos(&self) -> Interval {
        if self.width() >= TAU {
            return Interval::new(-1.0, 1.0);
        }
        let (a, b) = (self.lo.cos(), self.hi.cos());
        let mut lo = a.min(b);
        let mut hi = a.max(b);
        // maxima at 2kπ, minima at (2k+1)π
        if contains_lattice_point(self, 0.0, TAU) {
            hi = 1.0;
        }
        if contains_lattice_point(self, PI, TAU) {
            lo = -1.0;
        }
        Interval::new(lo, hi).widen_ulp()
    }

    pub fn sin(&self) -> Interval {
        if self.width() >= TAU {
            return Interval::new(-1.0, 1.0);
        }
        let (a, b) = (self.lo.sin(), self.hi.sin());
        let mut lo = a.min(b);
        let mut hi = a.max(b);
        if contains_lattice_point(self, FRAC_PI_2, TAU) {
            hi = 1.0;
        }
        if contains_lattice_point(self, -FRAC_PI_2, TAU) {
            lo = -1.0;
        }
        Interval::new(lo, hi).widen_ulp()
    }

    /// Moves both endpoints outward by `slack`, then by one more ulp.
    pub fn inflate(&self, slack: f64) -> Interval {
        Interval {
            lo: self.lo - slack,
            hi: self.hi + slack,
        }
        .widen_ulp()
    }

    /// Moves both endpoints one ulp outward.
    pub fn widen_ulp(&self) -> Interval {
        Interval {
            lo: self.lo.next_down(),
            hi: self.hi.next_up(),
        }
    }
}

/// Whether `offset + k * period` lies in the interval for some integer `k`.
fn contains_lattice_point(iv: &Interval, offset: f64, period: f64) -> bool {
    let k = ((iv.lo - offset) / period).ceil();
    let p = offset + k * period;
    p <= iv.hi
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, rhs: Interval) -> Interval {
        Interval::new(self.lo + rhs.lo, self.hi + rhs.hi)
    }
}

impl Add<f64> for Interval {
    type Output = Interval;
    fn add(self, rhs: f64) -> Interval {
        Interval::new(self.lo + rhs, self.hi + rhs)
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, rhs: Interval) -> Interval {
        Interval::new(self.lo - rhs.hi, self.hi - rhs.lo)
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval::new(-self.hi, -self.lo)
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, rhs: Interval) -> Interval {
        let p = [
            self.lo * rhs.lo,
            self.lo * rhs.hi,
            self.hi * rhs.lo,
            self.hi * rhs.hi,
        ];
        let lo = p.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Interval::new(lo, hi)
    }
}

impl Mul<f64> for Interval {
    type Output = Interval;
    fn mul(self, rhs: f64) -> Interval {
        self.scale(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_sign_cases() {
        let a = Interval::new(-2.0, 3.0);
        let b = Interval::new(4.0, 5.0);
        assert_eq!(a * b, Interval::new(-10.0, 15.0));
        assert_eq!(a.sqr(), Interval::new(0.0, 9.0));
        assert_eq!(Interval::new(-3.0, -1.0).sqr(), Interval::new(1.0, 9.0));
    }

    #[test]
    fn cos_covers_extrema() {
        let c = Interval::new(-0.5, 0.5).cos();
        assert!(c.contains(1.0));
        assert!(c.contains(0.5f64.cos()));
        let s = Interval::new(-FRAC_PI_2, FRAC_PI_2).sin();
        assert!(s.lo <= -1.0 && s.hi >= 1.0);
        let c = Interval::new(3.0, 3.5).cos();
        assert!(c.lo <= -1.0);
    }

    #[test]
    fn trig_enclosures_contain_samples() {
        for i in 0..200 {
            let lo = -4.0 + i as f64 * 0.037;
            let iv = Interval::new(lo, lo + 0.9);
            let (c, s) = (iv.cos(), iv.sin());
            for j in 0..=20 {
                let t = lo + 0.9 * j as f64 / 20.0;
                assert!(c.contains(t.cos()), "cos {t} not in {c}");
                assert!(s.contains(t.sin()), "sin {t} not in {s}");
            }
        }
    }
}
