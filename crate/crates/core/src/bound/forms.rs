//! Interval enclosures of bump, wave and dampened-kernel derivatives over
//! boxes (t, s1, s2), in σ = 1 units with the spike at the origin.
//!
//! Writing ∂ₜⁱK(s − t) = e^{−t²/2} e^{−s²/2} Gᵢ(s) with Gᵢ(s) = Pᵢ(t − s)e^{st},
//! the bump is e^{−t²/2}·(c₁c₂/f) times the linear interpolant at 0 of
//! Hᵢ = Gᵢ/c through s₁, s₂, and the wave is e^{−t²/2}·(a₁a₂/f) times the
//! divided difference of Jᵢ = Gᵢ/a. Gaussian: c = a = f = 1. Ricker:
//! c = 3 − s², a = 1 − s², f = 3 − (s₁ − s₂)² + s₁²s₂².
//!
//! Two enclosures are intersected: the direct quotient (tight for wide pairs)
//! and a remainder form (tight for close pairs, no cancellation):
//! interp = H(0) − s₁s₂·H″(ξ)/2 and divided difference = J′(ξ).

use super::interval::Interval;
use super::jet::Jet;
use crate::kernels::KernelFamily;

/// Highest derivative order needed (value/slope/curvature plus one for the
/// centred form in t).
pub const MAX_ORDER: usize = 3;

/// Coefficients (ascending) of p_n with K_G^{(n)}(x) = p_n(x) e^{−x²/2}.
pub fn gauss_poly_coeffs(n: usize) -> Vec<f64> {
    let mut prev = vec![1.0];
    if n == 0 {
        return prev;
    }
    let mut cur = vec![0.0, -1.0];
    for k in 1..n {
        // p_{k+1} = −x p_k − k p_{k−1}
        let mut next = vec![0.0; k + 2];
        for (i, &c) in cur.iter().enumerate() {
            next[i + 1] -= c;
        }
        for (i, &c) in prev.iter().enumerate() {
            next[i] -= k as f64 * c;
        }
        prev = cur;
        cur = next;
    }
    cur
}

#[derive(Debug, Clone)]
pub struct Forms {
    pub family: KernelFamily,
    /// P_i for i = 0..=MAX_ORDER.
    polys: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy)]
pub struct CellPieces {
    pub g: [Interval; MAX_ORDER + 1],
    pub h2: [Interval; MAX_ORDER + 1],
    pub j1: [Interval; MAX_ORDER + 1],
    /// J‴/6, for the midpoint form of the divided difference.
    pub j3: [Interval; MAX_ORDER + 1],
}

#[derive(Debug, Clone, Copy)]
pub struct PairFactors {
    pub inv_direct: Option<Interval>,
    pub pb: Interval,
    pub pw: Interval,
    pub s2c2: Interval,
    pub s1c1: Interval,
    pub a1: Interval,
    pub a2: Interval,
    pub s12: Interval,
}

#[derive(Debug, Clone, Copy)]
pub struct BoxValues {
    pub bump: [Interval; MAX_ORDER + 1],
    pub wave: [Interval; MAX_ORDER + 1],
}

pub const WHOLE: Interval = Interval { lo: f64::NEG_INFINITY, hi: f64::INFINITY };

fn horner(coef: &[f64], x: Interval) -> Interval {
    let mut acc = Interval::point(*coef.last().unwrap());
    for &a in coef.iter().rev().skip(1) {
        acc = acc * x + a;
    }
    acc
}

impl Forms {
    pub fn new(family: KernelFamily) -> Self {
        let polys = (0..=MAX_ORDER)
            .map(|i| match family {
                KernelFamily::Gaussian => gauss_poly_coeffs(i),
                KernelFamily::Ricker => gauss_poly_coeffs(i + 2).into_iter().map(|c| -c).collect(),
            })
            .collect();
        Self { family, polys }
    }

    fn ricker(&self) -> bool {
        self.family == KernelFamily::Ricker
    }

    /// Gᵢ(s) for i = 0..=order.
    fn g_values(&self, t: Interval, s: Interval, order: usize) -> [Interval; MAX_ORDER + 1] {
        let e = (s * t).exp();
        let x = t - s;
        let mut out = [WHOLE; MAX_ORDER + 1];
        for (i, o) in out.iter_mut().enumerate().take(order + 1) {
            *o = horner(&self.polys[i], x) * e;
        }
        out
    }

    /// Taylor jets in s of Gᵢ over the box `s`.
    fn g_jets<const N: usize>(&self, t: Interval, s: Interval, order: usize) -> Vec<Jet<N>> {
        let e = Jet::<N>::var(s).mul_iv(t).exp();
        let x = Jet::<N>::constant(t) - Jet::var(s);
        (0..=order).map(|i| x.poly(&self.polys[i]) * e).collect()
    }

    /// Enclosures of B⁽ⁱ⁾ and W⁽ⁱ⁾ (i ≤ order) over t ∈ t, s₁ ∈ s1, s₂ ∈ s2 with s₁ < s₂.
    pub fn bump_wave(&self, t: Interval, s1: Interval, s2: Interval, order: usize) -> BoxValues {
        let et = t.sqr().scale(-0.5).exp();
        let mut bump = [WHOLE; MAX_ORDER + 1];
        let mut wave = [WHOLE; MAX_ORDER + 1];
        let ricker = self.ricker();
        let f = if ricker {
            3.0 - (s2 - s1).sqr() + (s1 * s2).sqr()
        } else {
            Interval::point(1.0)
        };
        let (c1, c2, a1, a2) = if ricker {
            (3.0 - s1.sqr(), 3.0 - s2.sqr(), 1.0 - s1.sqr(), 1.0 - s2.sqr())
        } else {
            let one = Interval::point(1.0);
            (one, one, one, one)
        };

        // direct quotient
        if s2.lo > s1.hi {
            let g1 = self.g_values(t, s1, order);
            let g2 = self.g_values(t, s2, order);
            let inv = ((s2 - s1) * f).recip().expect("separated boxes");
            let pre = et * inv;
            for i in 0..=order {
                bump[i] = (s2 * c2 * g1[i] - s1 * c1 * g2[i]) * pre;
                wave[i] = (a1 * g2[i] - a2 * g1[i]) * pre;
            }
        }

        // remainder forms
        let xi = s1.hull(s2).hull(Interval::point(0.0));
        let xw = s1.hull(s2);
        let hj = self.g_jets::<3>(t, xi, order);
        let jj = self.g_jets::<2>(t, xw, order);
        let c0 = if ricker { 3.0 } else { 1.0 };
        let inv_c = if ricker { Jet::<3>::var(xi).poly(&[3.0, 0.0, -1.0]).recip() } else { None };
        let inv_a = if ricker { Jet::<2>::var(xw).poly(&[1.0, 0.0, -1.0]).recip() } else { None };
        let pb = if ricker { et * (c1 * c2).div(f).unwrap_or(WHOLE) } else { et };
        let pw = if ricker { et * (a1 * a2).div(f).unwrap_or(WHOLE) } else { et };
        let s12 = s1 * s2;
        for i in 0..=order {
            let h0 = horner(&self.polys[i], t).scale(1.0 / c0);
            let h = match inv_c {
                Some(r) => hj[i] * r,
                None if ricker => Jet::constant(WHOLE),
                None => hj[i],
            };
            bump[i] = bump[i].meet(pb * (h0 - s12 * h.c[2]));
            let j = match inv_a {
                Some(r) => jj[i] * r,
                None if ricker => Jet::constant(WHOLE),
                None => jj[i],
            };
            wave[i] = wave[i].meet(pw * j.c[1]);
        }
        BoxValues { bump, wave }
    }

    /// Per-sample-cell pieces at fixed t-box: direct Gᵢ, the H″/2 Taylor
    /// coefficient and the J′ coefficient, for i ≤ order.
    pub fn cell_pieces(&self, t: Interval, s: Interval, order: usize) -> CellPieces {
        let g = self.g_values(t, s, order);
        let hj = self.g_jets::<4>(t, s, order);
        let ricker = self.ricker();
        let inv_c = if ricker { Jet::<4>::var(s).poly(&[3.0, 0.0, -1.0]).recip() } else { None };
        let inv_a = if ricker { Jet::<4>::var(s).poly(&[1.0, 0.0, -1.0]).recip() } else { None };
        let mut h2 = [WHOLE; MAX_ORDER + 1];
        let mut j1 = [WHOLE; MAX_ORDER + 1];
        let mut j3 = [WHOLE; MAX_ORDER + 1];
        for i in 0..=order {
            let h = match inv_c {
                Some(r) => hj[i] * r,
                None if ricker => Jet::constant(WHOLE),
                None => hj[i],
            };
            let j = match inv_a {
                Some(r) => hj[i] * r,
                None if ricker => Jet::constant(WHOLE),
                None => hj[i],
            };
            h2[i] = h.c[2];
            j1[i] = j.c[1];
            j3[i] = j.c[3];
        }
        CellPieces { g, h2, j1, j3 }
    }

    /// e^{−t²/2} and Hᵢ(0) = Pᵢ(t)/c(0) over a t-box.
    pub fn t_pieces(&self, t: Interval, order: usize) -> (Interval, [Interval; MAX_ORDER + 1]) {
        let et = t.sqr().scale(-0.5).exp();
        let c0 = if self.ricker() { 3.0 } else { 1.0 };
        let mut h0 = [WHOLE; MAX_ORDER + 1];
        for (i, h) in h0.iter_mut().enumerate().take(order + 1) {
            *h = horner(&self.polys[i], t).scale(1.0 / c0);
        }
        (et, h0)
    }

    /// Sample-only factors for the pair box: (1/((s₂−s₁)f) if separated,
    /// c₁c₂/f, a₁a₂/f, s₂c₂, s₁c₁, a₁, a₂, s₁s₂).
    pub fn pair_factors(&self, s1: Interval, s2: Interval) -> PairFactors {
        let one = Interval::point(1.0);
        if self.ricker() {
            let f = 3.0 - (s2 - s1).sqr() + (s1 * s2).sqr();
            let (c1, c2, a1, a2) = (3.0 - s1.sqr(), 3.0 - s2.sqr(), 1.0 - s1.sqr(), 1.0 - s2.sqr());
            let inv_f = f.recip().unwrap_or(WHOLE);
            PairFactors {
                inv_direct: if s2.lo > s1.hi { ((s2 - s1) * f).recip().ok() } else { None },
                pb: c1 * c2 * inv_f,
                pw: a1 * a2 * inv_f,
                s2c2: s2 * c2,
                s1c1: s1 * c1,
                a1,
                a2,
                s12: s1 * s2,
            }
        } else {
            PairFactors {
                inv_direct: if s2.lo > s1.hi { (s2 - s1).recip().ok() } else { None },
                pb: one,
                pw: one,
                s2c2: s2,
                s1c1: s1,
                a1: one,
                a2: one,
                s12: s1 * s2,
            }
        }
    }

    /// Enclosures of D⁽ⁱ⁾(t) = K⁽ⁱ⁾(t) − B⁽ⁱ⁾(t, −τ, τ), i ≤ order.
    pub fn dampened(&self, t: Interval, tau: Interval, order: usize) -> [Interval; MAX_ORDER + 1] {
        let et = t.sqr().scale(-0.5).exp();
        let gp = self.g_values(t, tau, order);
        let gm = self.g_values(t, -tau, order);
        let scale = if self.ricker() {
            (1.0 - tau.sqr()).recip().unwrap_or(WHOLE).scale(0.5)
        } else {
            Interval::point(0.5)
        };
        let mut out = [WHOLE; MAX_ORDER + 1];
        for i in 0..=order {
            out[i] = et * (horner(&self.polys[i], t) - (gp[i] + gm[i]) * scale);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{bump_wave_coeffs, eval_bump, eval_wave, KernelSpec};
    use crate::certificate::dampened_kernel;

    #[test]
    fn poly_coefficients() {
        assert_eq!(gauss_poly_coeffs(2), vec![-1.0, 0.0, 1.0]);
        assert_eq!(gauss_poly_coeffs(3), vec![0.0, 3.0, 0.0, -1.0]);
        assert_eq!(gauss_poly_coeffs(4), vec![3.0, 0.0, -6.0, 0.0, 1.0]);
    }

    #[test]
    fn point_boxes_match_closed_forms() {
        for fam in [KernelFamily::Gaussian, KernelFamily::Ricker] {
            let k = KernelSpec::new(fam, 1.0).unwrap();
            let forms = Forms::new(fam);
            for &(s1, s2) in &[(-0.3, 0.25), (0.05, 0.3), (-0.6, -0.2), (-0.02, 0.04)] {
                let c = bump_wave_coeffs(&k, 0.0, s1, s2).unwrap();
                for &t in &[0.0, 0.4, 1.3, 3.7, 7.9] {
                    let v = forms.bump_wave(
                        Interval::point(t),
                        Interval::point(s1),
                        Interval::point(s2),
                        2,
                    );
                    for i in 0..=2 {
                        let (b, w) = (eval_bump(&c, &k, t, i), eval_wave(&c, &k, t, i));
                        let tol = 1e-9 * (1.0 + b.abs());
                        assert!(v.bump[i].lo - tol <= b && b <= v.bump[i].hi + tol, "{fam:?} B{i} {t} {s1} {s2}");
                        let tol = 1e-9 * (1.0 + w.abs());
                        assert!(v.wave[i].lo - tol <= w && w <= v.wave[i].hi + tol, "{fam:?} W{i} {t}");
                    }
                }
            }
        }
    }

    #[test]
    fn dampened_matches_direct() {
        for fam in [KernelFamily::Gaussian, KernelFamily::Ricker] {
            let k = KernelSpec::new(fam, 1.0).unwrap();
            let forms = Forms::new(fam);
            for &tau in &[0.07, 0.2] {
                for &t in &[0.3, 2.0, 4.1] {
                    let v = forms.dampened(Interval::point(t), Interval::point(tau), 2);
                    for i in 0..=2 {
                        let d = dampened_kernel(&k, 0.0, -tau, tau, t, i).unwrap();
                        assert!((v[i].mid() - d).abs() < 1e-10 * (1.0 + d.abs()), "{fam:?} {i} {t} {tau}");
                    }
                }
            }
        }
    }
}
