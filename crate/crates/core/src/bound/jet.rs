//! Truncated Taylor series with interval coefficients. `c[k]` encloses
//! f^{(k)}(x)/k! over the whole argument box, so any coefficient is a valid
//! Lagrange-remainder enclosure.

use std::ops::{Add, Mul, Neg, Sub};

use super::interval::Interval;

#[derive(Debug, Clone, Copy)]
pub struct Jet<const N: usize> {
    pub c: [Interval; N],
}

const ZERO: Interval = Interval::point(0.0);

impl<const N: usize> Jet<N> {
    pub fn constant(v: Interval) -> Self {
        let mut c = [ZERO; N];
        c[0] = v;
        Self { c }
    }

    /// The identity function over the box `x`.
    pub fn var(x: Interval) -> Self {
        let mut c = [ZERO; N];
        c[0] = x;
        if N > 1 {
            c[1] = Interval::point(1.0);
        }
        Self { c }
    }

    /// k-th derivative enclosure.
    pub fn deriv(&self, k: usize) -> Interval {
        let f: f64 = (1..=k).map(|i| i as f64).product();
        self.c[k].scale(f)
    }

    pub fn scale(self, s: f64) -> Self {
        let mut c = self.c;
        for x in &mut c {
            *x = x.scale(s);
        }
        Self { c }
    }

    pub fn mul_iv(self, s: Interval) -> Self {
        let mut c = self.c;
        for x in &mut c {
            *x = *x * s;
        }
        Self { c }
    }

    pub fn exp(self) -> Self {
        let mut e = [ZERO; N];
        e[0] = self.c[0].exp();
        for k in 1..N {
            let mut acc = ZERO;
            for j in 1..=k {
                acc = acc + (self.c[j] * e[k - j]).scale(j as f64);
            }
            e[k] = acc.scale(1.0 / k as f64);
        }
        Self { c: e }
    }

    /// 1/f; None if the constant term contains zero.
    pub fn recip(self) -> Option<Self> {
        let r0 = self.c[0].recip().ok()?;
        let mut r = [ZERO; N];
        r[0] = r0;
        for k in 1..N {
            let mut acc = ZERO;
            for j in 1..=k {
                acc = acc + self.c[j] * r[k - j];
            }
            r[k] = -(acc * r0);
        }
        Some(Self { c: r })
    }

    /// Horner evaluation of Σ coef[k] x^k with x = self.
    pub fn poly(self, coef: &[f64]) -> Self {
        let mut acc = Self::constant(Interval::point(*coef.last().unwrap_or(&0.0)));
        for &a in coef.iter().rev().skip(1) {
            acc = acc * self;
            acc.c[0] = acc.c[0] + a;
        }
        acc
    }
}

impl<const N: usize> Add for Jet<N> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let mut c = self.c;
        for (x, y) in c.iter_mut().zip(o.c) {
            *x = *x + y;
        }
        Self { c }
    }
}

impl<const N: usize> Sub for Jet<N> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        let mut c = self.c;
        for (x, y) in c.iter_mut().zip(o.c) {
            *x = *x - y;
        }
        Self { c }
    }
}

impl<const N: usize> Neg for Jet<N> {
    type Output = Self;
    fn neg(self) -> Self {
        let mut c = self.c;
        for x in &mut c {
            *x = -*x;
        }
        Self { c }
    }
}

impl<const N: usize> Mul for Jet<N> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut c = [ZERO; N];
        for (k, ck) in c.iter_mut().enumerate() {
            let mut acc = ZERO;
            for j in 0..=k {
                acc = acc + self.c[j] * o.c[k - j];
            }
            *ck = acc;
        }
        Self { c }
    }
}
