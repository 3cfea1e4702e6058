//! Closed intervals over f64. Every elementary operation widens its result by
//! a relative 1e-13 (plus the smallest normal) unless the `no-inflation`
//! feature is enabled.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

pub const INFLATION: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

#[inline]
fn widen(lo: f64, hi: f64) -> Interval {
    if cfg!(feature = "no-inflation") {
        Interval { lo, hi }
    } else {
        Interval {
            lo: lo - lo.abs() * INFLATION - f64::MIN_POSITIVE,
            hi: hi + hi.abs() * INFLATION + f64::MIN_POSITIVE,
        }
    }
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo <= hi {
            Ok(Self { lo, hi })
        } else {
            Err(Error::InvalidArgument(format!("interval [{lo}, {hi}] has lo > hi")))
        }
    }

    #[inline]
    pub const fn point(x: f64) -> Self {
        Self { lo: x, hi: x }
    }

    /// Smallest interval containing both endpoints, in either order.
    #[inline]
    pub fn span(a: f64, b: f64) -> Self {
        Self { lo: a.min(b), hi: a.max(b) }
    }

    #[inline]
    pub fn hull(self, o: Self) -> Self {
        Self { lo: self.lo.min(o.lo), hi: self.hi.max(o.hi) }
    }

    /// Intersection; both operands enclose the same quantity, so an empty
    /// result can only come from rounding and falls back to `self`.
    #[inline]
    pub fn meet(self, o: Self) -> Self {
        let lo = self.lo.max(o.lo);
        let hi = self.hi.min(o.hi);
        if lo <= hi {
            Self { lo, hi }
        } else {
            self
        }
    }

    #[inline]
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    #[inline]
    pub fn contains_zero(&self) -> bool {
        self.lo <= 0.0 && 0.0 <= self.hi
    }

    #[inline]
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    #[inline]
    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    /// max |x| over the interval.
    #[inline]
    pub fn mag(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    #[inline]
    pub fn abs(self) -> Self {
        if self.lo >= 0.0 {
            self
        } else if self.hi <= 0.0 {
            -self
        } else {
            Self { lo: 0.0, hi: self.mag() }
        }
    }

    #[inline]
    pub fn sqr(self) -> Self {
        let a = self.abs();
        widen(a.lo * a.lo, a.hi * a.hi)
    }

    /// x^n for even n ≥ 0.
    pub fn even_pow(self, n: u32) -> Result<Self> {
        if !n.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!("even_pow needs an even exponent, got {n}")));
        }
        let a = self.abs();
        Ok(widen(a.lo.powi(n as i32), a.hi.powi(n as i32)))
    }

    pub fn recip(self) -> Result<Self> {
        if self.contains_zero() {
            return Err(Error::Domain(format!("reciprocal of [{}, {}] which contains 0", self.lo, self.hi)));
        }
        Ok(widen(1.0 / self.hi, 1.0 / self.lo))
    }

    pub fn div(self, o: Self) -> Result<Self> {
        Ok(self * o.recip()?)
    }

    #[inline]
    pub fn exp(self) -> Self {
        widen(self.lo.exp(), self.hi.exp())
    }

    #[inline]
    pub fn scale(self, c: f64) -> Self {
        if c >= 0.0 {
            widen(self.lo * c, self.hi * c)
        } else {
            widen(self.hi * c, self.lo * c)
        }
    }

    /// Image under a monotone function.
    pub fn monotone(self, g: impl Fn(f64) -> f64, increasing: bool) -> Self {
        let (a, b) = (g(self.lo), g(self.hi));
        if increasing {
            widen(a, b)
        } else {
            widen(b, a)
        }
    }
}

impl Add for Interval {
    type Output = Interval;
    #[inline]
    fn add(self, o: Interval) -> Interval {
        widen(self.lo + o.lo, self.hi + o.hi)
    }
}

impl Add<f64> for Interval {
    type Output = Interval;
    #[inline]
    fn add(self, o: f64) -> Interval {
        widen(self.lo + o, self.hi + o)
    }
}

impl Sub for Interval {
    type Output = Interval;
    #[inline]
    fn sub(self, o: Interval) -> Interval {
        widen(self.lo - o.hi, self.hi - o.lo)
    }
}

impl Sub<Interval> for f64 {
    type Output = Interval;
    #[inline]
    fn sub(self, o: Interval) -> Interval {
        widen(self - o.hi, self - o.lo)
    }
}

impl Neg for Interval {
    type Output = Interval;
    #[inline]
    fn neg(self) -> Interval {
        Interval { lo: -self.hi, hi: -self.lo }
    }
}

impl Mul for Interval {
    type Output = Interval;
    #[inline]
    fn mul(self, o: Interval) -> Interval {
        let (a, b, c, d) = (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi);
        widen(a.min(b).min(c.min(d)), a.max(b).max(c.max(d)))
    }
}

impl Mul<f64> for Interval {
    type Output = Interval;
    #[inline]
    fn mul(self, c: f64) -> Interval {
        self.scale(c)
    }
}

pub fn iv_add(a: Interval, b: Interval) -> Interval {
    a + b
}
pub fn iv_neg(a: Interval) -> Interval {
    -a
}
pub fn iv_mul(a: Interval, b: Interval) -> Interval {
    a * b
}
pub fn iv_abs(a: Interval) -> Interval {
    a.abs()
}
pub fn iv_even_pow(a: Interval, n: u32) -> Result<Interval> {
    a.even_pow(n)
}
pub fn iv_recip(a: Interval) -> Result<Interval> {
    a.recip()
}
pub fn iv_monotone(a: Interval, g: impl Fn(f64) -> f64, increasing: bool) -> Interval {
    a.monotone(g, increasing)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(a: f64, b: f64) -> Interval {
        Interval::new(a, b).unwrap()
    }

    fn close(x: Interval, lo: f64, hi: f64) -> bool {
        (x.lo - lo).abs() < 1e-9 && (x.hi - hi).abs() < 1e-9
    }

    #[test]
    fn product_example() {
        assert!(close(iv(1.0, 2.0) * iv(-3.0, 3.0), -6.0, 6.0));
    }

    #[test]
    fn composite_examples() {
        let (x, y) = (iv(1.0, 2.0), iv(-3.0, 3.0));
        let d2 = (x - y).even_pow(2).unwrap();
        let naive = (d2 * x * y).div(x).unwrap();
        assert!(naive.lo >= -150.0 - 1e-9 && naive.hi <= 150.0 + 1e-9);
        assert!(naive.contains(-150.0 + 1e-6) || naive.lo <= -149.0);
        let simple = d2 * y;
        assert!(close(simple, -75.0, 75.0));
    }

    #[test]
    fn recip_rejects_zero() {
        assert!(matches!(iv(-1.0, 1.0).recip(), Err(Error::Domain(_))));
        assert!(close(iv(2.0, 4.0).recip().unwrap(), 0.25, 0.5));
    }

    #[test]
    fn abs_and_monotone() {
        assert!(close(iv(-3.0, 1.0).abs(), 0.0, 3.0));
        assert!(close(iv(0.0, 1.0).monotone(|x| -x, false), -1.0, 0.0));
        assert!(iv(-1.0, 2.0).even_pow(3).is_err());
    }
}
