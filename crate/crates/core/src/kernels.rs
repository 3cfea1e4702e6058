//! Gaussian and Ricker kernels, their derivatives, and the bump/wave
//! coefficient formulas.
//!
//! Everything is computed in σ-normalized coordinates; the public entry
//! points take absolute locations and rescale at the boundary.

use crate::error::{Error, Result};

/// Denominators below this (normalized units) are treated as singular.
pub const SINGULAR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelFamily {
    Gaussian,
    Ricker,
}

impl KernelFamily {
    /// Highest derivative order exposed by `kernel_eval`.
    pub fn max_order(self) -> usize {
        match self {
            KernelFamily::Gaussian => 4,
            KernelFamily::Ricker => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            KernelFamily::Gaussian => "gaussian",
            KernelFamily::Ricker => "ricker",
        }
    }
}

impl std::str::FromStr for KernelFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" | "gauss" | "g" => Ok(KernelFamily::Gaussian),
            "ricker" | "r" => Ok(KernelFamily::Ricker),
            other => Err(Error::InvalidArgument(format!("unknown kernel family '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub family: KernelFamily,
    pub sigma: f64,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidArgument(format!("sigma must be positive, got {sigma}")));
        }
        Ok(KernelSpec { family, sigma })
    }

    pub fn gaussian(sigma: f64) -> Self {
        Self::new(KernelFamily::Gaussian, sigma).expect("sigma > 0")
    }

    pub fn ricker(sigma: f64) -> Self {
        Self::new(KernelFamily::Ricker, sigma).expect("sigma > 0")
    }

    /// K^{(order)}(t) in absolute units, unchecked order.
    #[inline]
    pub fn eval(&self, t: f64, order: usize) -> f64 {
        k_norm(self.family, t / self.sigma, order) * self.sigma.powi(-(order as i32))
    }

    /// d^order/dt^order K(s − t).
    #[inline]
    pub fn shifted(&self, s: f64, t: f64, order: usize) -> f64 {
        let v = self.eval(s - t, order);
        if order % 2 == 1 {
            -v
        } else {
            v
        }
    }

    /// sup_t |K^{(order)}(t)| in absolute units (order ≤ 3).
    pub fn sup_abs(&self, order: usize) -> f64 {
        sup_abs_norm(self.family, order) * self.sigma.powi(-(order as i32))
    }
}

/// Polynomial part of the n-th Gaussian derivative: K_G^{(n)}(x) = p_n(x) e^{-x²/2}.
#[inline]
pub fn gauss_poly(n: usize, x: f64) -> f64 {
    let x2 = x * x;
    match n {
        0 => 1.0,
        1 => -x,
        2 => x2 - 1.0,
        3 => x * (3.0 - x2),
        4 => x2 * x2 - 6.0 * x2 + 3.0,
        5 => -x * (x2 * x2 - 10.0 * x2 + 15.0),
        6 => x2 * x2 * x2 - 15.0 * x2 * x2 + 45.0 * x2 - 15.0,
        _ => {
            // probabilists' Hermite recurrence, He_{n+1} = x He_n − n He_{n−1}
            let (mut a, mut b) = (1.0, x);
            for k in 1..n {
                let c = x * b - k as f64 * a;
                a = b;
                b = c;
            }
            if n % 2 == 1 {
                -b
            } else {
                b
            }
        }
    }
}

/// Normalized kernel derivative K^{(order)}(x) (σ = 1). Ricker is −K_G''.
#[inline]
pub fn k_norm(family: KernelFamily, x: f64, order: usize) -> f64 {
    let e = (-0.5 * x * x).exp();
    match family {
        KernelFamily::Gaussian => gauss_poly(order, x) * e,
        KernelFamily::Ricker => -gauss_poly(order + 2, x) * e,
    }
}

fn sup_abs_norm(family: KernelFamily, order: usize) -> f64 {
    match (family, order) {
        (KernelFamily::Gaussian, 0) => 1.0,
        // e^{-1/2}
        (KernelFamily::Gaussian, 1) => 0.606_530_659_712_633_5,
        (KernelFamily::Gaussian, 2) => 1.0,
        (KernelFamily::Ricker, 0) => 1.0,
        _ => {
            // coarse scan plus a safety margin; only used for bridging bounds
            let mut m: f64 = 0.0;
            let n = 20_000;
            for i in 0..=n {
                let x = -8.0 + 16.0 * i as f64 / n as f64;
                m = m.max(k_norm(family, x, order).abs());
            }
            m * 1.01
        }
    }
}

/// K^{(order)}(t) for a kernel spec, with σ scaling.
pub fn kernel_eval(k: &KernelSpec, t: f64, order: usize) -> Result<f64> {
    if order > k.family.max_order() {
        return Err(Error::InvalidArgument(format!(
            "order {order} unsupported for {} (max {})",
            k.family.name(),
            k.family.max_order()
        )));
    }
    Ok(k.eval(t, order))
}

/// Bump/wave denominator K(s2)K'(s1) − K'(s2)K(s1) in normalized coordinates.
/// `s1`, `s2` are offsets from the spike, in absolute units.
pub fn denom(k: &KernelSpec, s1: f64, s2: f64) -> f64 {
    denom_norm(k.family, s1 / k.sigma, s2 / k.sigma)
}

/// Closed forms D^G = (s2−s1)e^{−(s1²+s2²)/2} and
/// D^R = (s2−s1)(3−(s1−s2)²+s1²s2²)e^{−(s1²+s2²)/2}.
pub fn denom_norm(family: KernelFamily, s1: f64, s2: f64) -> f64 {
    let e = (-0.5 * (s1 * s1 + s2 * s2)).exp();
    match family {
        KernelFamily::Gaussian => (s2 - s1) * e,
        KernelFamily::Ricker => {
            let d = s1 - s2;
            (s2 - s1) * (3.0 - d * d + s1 * s1 * s2 * s2) * e
        }
    }
}

/// Coefficients of the bump B(t) = b1 K(s1−t) + b2 K(s2−t) (value 1, slope 0
/// at the centre) and the wave W (value 0, slope 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpWaveCoeffs {
    pub b1: f64,
    pub b2: f64,
    pub w1: f64,
    pub w2: f64,
    pub center: f64,
    pub s1: f64,
    pub s2: f64,
}

pub fn bump_wave_coeffs(k: &KernelSpec, t_i: f64, s1: f64, s2: f64) -> Result<BumpWaveCoeffs> {
    if s1 == s2 {
        return Err(Error::Singular(format!("coincident samples at {s1}")));
    }
    let u1 = (s1 - t_i) / k.sigma;
    let u2 = (s2 - t_i) / k.sigma;
    if k.family == KernelFamily::Ricker && (u1.abs() >= 1.0 || u2.abs() >= 1.0) {
        return Err(Error::Domain(format!(
            "Ricker samples must lie strictly within sigma of the spike (offsets {u1}, {u2})"
        )));
    }
    let den = denom_norm(k.family, u1, u2);
    if den.abs() < SINGULAR_TOL {
        return Err(Error::Singular(format!("denominator {den:e} for samples ({s1}, {s2})")));
    }
    let f = k.family;
    let (k1, k2) = (k_norm(f, u1, 0), k_norm(f, u2, 0));
    let (d1, d2) = (k_norm(f, u1, 1), k_norm(f, u2, 1));
    // the wave slope is 1 in absolute units, hence the factor σ
    Ok(BumpWaveCoeffs {
        b1: -d2 / den,
        b2: d1 / den,
        w1: -k2 / den * k.sigma,
        w2: k1 / den * k.sigma,
        center: t_i,
        s1,
        s2,
    })
}

/// order-th t-derivative of the bump.
pub fn eval_bump(c: &BumpWaveCoeffs, k: &KernelSpec, t: f64, order: usize) -> f64 {
    c.b1 * k.shifted(c.s1, t, order) + c.b2 * k.shifted(c.s2, t, order)
}

/// order-th t-derivative of the wave.
pub fn eval_wave(c: &BumpWaveCoeffs, k: &KernelSpec, t: f64, order: usize) -> f64 {
    c.w1 * k.shifted(c.s1, t, order) + c.w2 * k.shifted(c.s2, t, order)
}
