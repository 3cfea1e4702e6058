//! Piecewise-constant tables over t-cells of [0, 10): suprema over all
//! admissible sample pairs (|s₁|, |s₂| ≤ γ, |s₁ − s₂| ≥ κ) of |B⁽ⁱ⁾|, |W⁽ⁱ⁾|
//! and B⁽ⁱ⁾, plus dampened-kernel tables |D⁽ⁱ⁾| for τ in a range.
//!
//! Per t-cell the sample square is bisected down to the configured sample
//! cell width. A box pair is dropped as soon as its enclosure cannot exceed
//! the best value already seen, so the result never exceeds the plain
//! fixed-partition maximum; it is just cheaper to obtain.

use rayon::prelude::*;

use super::forms::{BoxValues, Forms, MAX_ORDER, WHOLE};
use super::interval::Interval;
use crate::error::{Error, Result};
use crate::kernels::KernelFamily;

/// Tables cover t ∈ [0, T_MAX); beyond, the tail constant applies.
pub const T_MAX: f64 = 10.0;
/// Factor applied to 10⁻¹²/κ: 2p(10) for p(t) = 20t⁴e^{−t²/2+t} is ≈ 1.7·10⁻¹², not ≤ 10⁻¹².
pub const TAIL_SAFETY: f64 = 2.0;

/// Default sample-cell width: 1/500 (Gaussian), 0.7/500 (Ricker).
pub fn default_sample_width(family: KernelFamily) -> f64 {
    match family {
        KernelFamily::Gaussian => 1.0 / 500.0,
        KernelFamily::Ricker => 0.7 / 500.0,
    }
}

/// Default t-cell width 8/700.
pub const DEFAULT_T_WIDTH: f64 = 8.0 / 700.0;

pub fn tail_epsilon(kappa: f64) -> f64 {
    TAIL_SAFETY * 1e-12 / kappa
}

const N_Q: usize = 9;

#[derive(Debug, Clone, PartialEq)]
pub struct BoundTable {
    pub family: KernelFamily,
    pub gamma: f64,
    pub kappa: f64,
    pub sample_width: f64,
    pub t_width: f64,
    pub eps: f64,
    /// Cell-wise sup |B⁽ⁱ⁾|, i = 0..2.
    pub abs_b: [Vec<f64>; 3],
    pub abs_w: [Vec<f64>; 3],
    /// Cell-wise sup B⁽ⁱ⁾ (signed).
    pub sgn_b: [Vec<f64>; 3],
    pub mono_b: [Vec<f64>; 3],
    pub mono_w: [Vec<f64>; 3],
}

impl BoundTable {
    pub fn n_cells(&self) -> usize {
        self.abs_b[0].len()
    }

    pub fn cell_of(&self, t: f64) -> usize {
        cell_index(t, self.t_width, self.n_cells())
    }

    pub fn cell_range(&self, j: usize) -> (f64, f64) {
        (j as f64 * self.t_width, ((j + 1) as f64 * self.t_width).min(T_MAX))
    }

    /// Monotonized |B⁽ⁱ⁾| bound valid for all u ≥ |x|.
    pub fn smo_b(&self, i: usize, x: f64) -> f64 {
        mono_lookup(&self.mono_b[i], self.t_width, self.eps, x)
    }

    pub fn smo_w(&self, i: usize, x: f64) -> f64 {
        mono_lookup(&self.mono_w[i], self.t_width, self.eps, x)
    }

    /// Bounds on |b| and |w| over admissible pairs (coefficient magnitudes).
    pub fn coefficient_bounds(&self) -> (f64, f64) {
        let g = self.gamma;
        let e = (0.5 * g * g).exp();
        match self.family {
            KernelFamily::Gaussian => (g * e / self.kappa, e / self.kappa),
            KernelFamily::Ricker => {
                let f = 3.0 - 4.0 * g * g;
                (3.0 * g * e / (self.kappa * f), e / (self.kappa * f))
            }
        }
    }
}

pub(crate) fn n_cells_for(t_width: f64) -> usize {
    (T_MAX / t_width - 1e-9).ceil() as usize
}

pub(crate) fn cell_index(t: f64, w: f64, n: usize) -> usize {
    ((t.abs() / w).floor() as usize).min(n.saturating_sub(1))
}

pub(crate) fn mono_lookup(mono: &[f64], w: f64, eps: f64, x: f64) -> f64 {
    let x = x.abs();
    if x >= T_MAX {
        eps
    } else {
        mono[cell_index(x, w, mono.len())]
    }
}

/// Suffix maximum from the right, floored at `eps`; non-increasing output.
pub fn monotonize(table: &[f64], eps: f64) -> Vec<f64> {
    let mut out = vec![0.0; table.len()];
    let mut run = eps;
    for (o, &v) in out.iter_mut().zip(table).rev() {
        run = run.max(v);
        *o = run;
    }
    out
}

fn values_to_q(v: &BoxValues) -> [Interval; N_Q] {
    [v.bump[0], v.bump[1], v.bump[2], v.wave[0], v.wave[1], v.wave[2], v.bump[0], v.bump[1], v.bump[2]]
}

#[inline]
fn upper(q: usize, iv: Interval) -> f64 {
    if q < 6 {
        iv.mag()
    } else {
        iv.hi
    }
}

/// Range-hull queries over a fixed array (sparse table).
struct RangeHull {
    lv: Vec<Vec<Interval>>,
}

impl RangeHull {
    fn new(v: Vec<Interval>) -> Self {
        let n = v.len();
        let mut lv = vec![v];
        let mut k = 1;
        while (1usize << k) <= n {
            let prev = &lv[k - 1];
            let h = 1usize << (k - 1);
            let next = (0..=n - (1 << k)).map(|i| prev[i].hull(prev[i + h])).collect();
            lv.push(next);
            k += 1;
        }
        Self { lv }
    }

    #[inline]
    fn query(&self, a: usize, b: usize) -> Interval {
        let k = (usize::BITS - 1 - (b - a).leading_zeros()) as usize;
        self.lv[k][a].hull(self.lv[k][b - (1 << k)])
    }
}

struct TData {
    et: Interval,
    h0: [Interval; MAX_ORDER + 1],
    g: Vec<RangeHull>,
    h2: Vec<RangeHull>,
    j1: Vec<RangeHull>,
    j3: Vec<RangeHull>,
    /// J′ over half-width cells, indexed so that pair (k, l) has its
    /// midpoint in half-cells k + l and k + l + 1.
    j1_half: Vec<RangeHull>,
    order: usize,
}

impl TData {
    fn new(forms: &Forms, t: Interval, cells: &[Interval], order: usize) -> Self {
        let (et, h0) = forms.t_pieces(t, order);
        let pieces: Vec<_> = cells.iter().map(|&s| forms.cell_pieces(t, s, order)).collect();
        let half: Vec<_> = cells
            .iter()
            .flat_map(|c| [Interval { lo: c.lo, hi: c.mid() }, Interval { lo: c.mid(), hi: c.hi }])
            .map(|s| forms.cell_pieces(t, s, order))
            .collect();
        let j1_half = (0..=order).map(|i| RangeHull::new(half.iter().map(|p| p.j1[i]).collect())).collect();
        let build = |f: &dyn Fn(usize, usize) -> Interval| -> Vec<RangeHull> {
            (0..=order).map(|i| RangeHull::new((0..cells.len()).map(|k| f(i, k)).collect())).collect()
        };
        Self {
            et,
            h0,
            g: build(&|i, k| pieces[k].g[i]),
            h2: build(&|i, k| pieces[k].h2[i]),
            j1: build(&|i, k| pieces[k].j1[i]),
            j3: build(&|i, k| pieces[k].j3[i]),
            j1_half,
            order,
        }
    }
}

/// Sample-box ranges [a1, b1) × [a2, b2) of elementary cells.
#[derive(Clone, Copy)]
struct PairBox {
    a1: usize,
    b1: usize,
    a2: usize,
    b2: usize,
}

fn enclose_t(forms: &Forms, d: &TData, pb: PairBox, s1: Interval, s2: Interval, zero_cell: usize) -> BoxValues {
    let pf = forms.pair_factors(s1, s2);
    let mut out = BoxValues { bump: [WHOLE; MAX_ORDER + 1], wave: [WHOLE; MAX_ORDER + 1] };
    let xi = (pb.a1.min(pb.a2).min(zero_cell), pb.b1.max(pb.b2).max(zero_cell + 1));
    let xw = (pb.a1.min(pb.a2), pb.b1.max(pb.b2));
    let eb = d.et * pf.pb;
    let ew = d.et * pf.pw;
    let direct = pf.inv_direct.map(|inv| d.et * inv);
    let half_d2 = (s2 - s1).sqr().scale(0.25);
    let mid = (pb.a1 + pb.a2, pb.b1 + pb.b2);
    for i in 0..=d.order {
        let mut b = eb * (d.h0[i] - pf.s12 * d.h2[i].query(xi.0, xi.1));
        let jw = d.j1[i].query(xw.0, xw.1).meet(d.j1_half[i].query(mid.0, mid.1) + half_d2 * d.j3[i].query(xw.0, xw.1));
        let mut w = ew * jw;
        if let Some(e) = direct {
            let g1 = d.g[i].query(pb.a1, pb.b1);
            let g2 = d.g[i].query(pb.a2, pb.b2);
            b = b.meet(e * (pf.s2c2 * g1 - pf.s1c1 * g2));
            w = w.meet(e * (pf.a1 * g2 - pf.a2 * g1));
        }
        out.bump[i] = b;
        out.wave[i] = w;
    }
    out
}

fn point_values(forms: &Forms, t: f64, s1: f64, s2: f64) -> [f64; N_Q] {
    let v = forms.bump_wave(Interval::point(t), Interval::point(s1), Interval::point(s2), MAX_ORDER - 1);
    let q = values_to_q(&v);
    let mut out = [0.0; N_Q];
    for (k, o) in out.iter_mut().enumerate() {
        let m = q[k].mid();
        *o = if k < 6 { m.abs() } else { m };
    }
    out
}

/// Relative slack below which a box cannot raise a table entry enough to matter.
pub const PRUNE_REL: f64 = 1e-4;

struct CellSearch<'a> {
    forms: &'a Forms,
    gamma: f64,
    kappa: f64,
    max_gap: f64,
    straddle: bool,
    /// Number of sample cells across [−γ, γ].
    n: usize,
    floor: f64,
    t: Interval,
    whole: TData,
    centre: TData,
    zero_cell: usize,
    best: [f64; N_Q],
    acc: [f64; N_Q],
}

impl CellSearch<'_> {
    fn cells(&self, a: usize, b: usize) -> Interval {
        let w = 2.0 * self.gamma / self.n as f64;
        Interval { lo: -self.gamma + a as f64 * w, hi: if b == self.n { self.gamma } else { -self.gamma + b as f64 * w } }
    }

    fn enclose(&self, pb: PairBox, s1: Interval, s2: Interval) -> [Interval; N_Q] {
        let whole = enclose_t(self.forms, &self.whole, pb, s1, s2, self.zero_cell);
        let centre = enclose_t(self.forms, &self.centre, pb, s1, s2, self.zero_cell);
        let hw = Interval { lo: -0.5 * self.t.width(), hi: 0.5 * self.t.width() };
        let mut v = whole;
        for i in 0..MAX_ORDER {
            v.bump[i] = whole.bump[i].meet(centre.bump[i] + whole.bump[i + 1] * hw);
            v.wave[i] = whole.wave[i].meet(centre.wave[i] + whole.wave[i + 1] * hw);
        }
        values_to_q(&v)
    }

    fn admissible(&self, x: f64, y: f64) -> bool {
        let d = y - x;
        d >= self.kappa && d <= self.max_gap && (!self.straddle || (x <= 0.0 && y >= 0.0))
    }

    /// Whether the box [u] × [v] may contain an admissible pair.
    fn box_admissible(&self, u: Interval, v: Interval) -> bool {
        v.hi - u.lo >= self.kappa && v.lo - u.hi <= self.max_gap && (!self.straddle || (u.lo <= 0.0 && v.hi >= 0.0))
    }

    fn seed(&mut self) {
        let m = 24;
        let pts: Vec<f64> = (0..=m).map(|k| -self.gamma + 2.0 * self.gamma * k as f64 / m as f64).collect();
        let mut pairs = Vec::new();
        for (a, &x) in pts.iter().enumerate() {
            for &y in &pts[a + 1..] {
                pairs.push((x, y));
            }
            for g in [self.kappa, 0.5 * (self.kappa + self.max_gap.min(2.0 * self.gamma)), self.max_gap] {
                pairs.push((x, x + g));
            }
        }
        pairs.retain(|&(x, y)| y <= self.gamma && self.admissible(x, y));
        for t in [self.t.lo, self.t.mid(), self.t.hi] {
            for &(x, y) in &pairs {
                self.observe(point_values(self.forms, t, x, y));
            }
        }
    }

    fn observe(&mut self, v: [f64; N_Q]) {
        for (b, x) in self.best.iter_mut().zip(v) {
            *b = b.max(x);
        }
    }

    fn threshold(&self, q: usize) -> f64 {
        self.best[q] + PRUNE_REL * self.best[q].abs() + self.floor
    }

    fn run(&mut self) -> [f64; N_Q] {
        self.seed();
        // boxes are index ranges of sample cells [a1, b1) × [a2, b2)
        let mut stack = vec![(0usize, self.n, 0usize, self.n, (1u16 << N_Q) - 1)];
        while let Some((a1, b1, a2, b2, mask)) = stack.pop() {
            let (s1, s2) = (self.cells(a1, b1), self.cells(a2, b2));
            let enc = self.enclose(PairBox { a1, b1, a2, b2 }, s1, s2);
            let mut live = 0u16;
            for q in 0..N_Q {
                if mask & (1 << q) != 0 && upper(q, enc[q]) > self.threshold(q) {
                    live |= 1 << q;
                }
            }
            if live == 0 {
                continue;
            }
            if b1 - a1 == 1 && b2 - a2 == 1 {
                for q in 0..N_Q {
                    if live & (1 << q) != 0 {
                        self.acc[q] = self.acc[q].max(upper(q, enc[q]));
                    }
                }
                let (c1, c2) = (s1.mid(), s2.mid());
                if self.admissible(c1, c2) {
                    self.observe(point_values(self.forms, self.t.mid(), c1, c2));
                }
                continue;
            }
            let halves = |a: usize, b: usize| -> Vec<(usize, usize)> {
                if b - a == 1 {
                    vec![(a, b)]
                } else {
                    let m = (a + b) / 2;
                    vec![(a, m), (m, b)]
                }
            };
            for &(x1, y1) in &halves(a1, b1) {
                for &(x2, y2) in &halves(a2, b2) {
                    let (u, v) = (self.cells(x1, y1), self.cells(x2, y2));
                    // some s₁ < s₂ with s₂ − s₁ ≥ κ
                    if x1 < y2 && self.box_admissible(u, v) {
                        stack.push((x1, y1, x2, y2, live));
                    }
                }
            }
        }
        let mut out = [0.0; N_Q];
        for q in 0..N_Q {
            out[q] = self.acc[q].max(self.threshold(q));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableSpec {
    pub family: KernelFamily,
    pub gamma: f64,
    pub kappa: f64,
    pub sample_width: f64,
    pub t_width: f64,
    /// Upper limit on s₂ − s₁ (uniform-grid mode).
    pub max_gap: Option<f64>,
    /// Restrict to s₁ ≤ 0 ≤ s₂ (the two grid points bracketing the spike).
    pub straddle: bool,
}

impl TableSpec {
    pub fn new(family: KernelFamily, gamma: f64, kappa: f64) -> Self {
        Self {
            family,
            gamma,
            kappa,
            sample_width: default_sample_width(family),
            t_width: DEFAULT_T_WIDTH,
            max_gap: None,
            straddle: false,
        }
    }

    /// Pairs of adjacent points of a uniform grid with step in [τ₁, τ₂]
    /// bracketing the spike: s₁ ≤ 0 ≤ s₂, s₂ − s₁ ∈ [τ₁, τ₂].
    pub fn uniform_grid(family: KernelFamily, tau1: f64, tau2: f64) -> Self {
        Self { max_gap: Some(tau2), straddle: true, ..Self::new(family, tau2, tau1) }
    }

    pub fn validate(&self) -> Result<()> {
        let gmax = match self.family {
            KernelFamily::Gaussian => 1.0,
            KernelFamily::Ricker => 0.8,
        };
        if !(self.gamma > 0.0 && self.gamma <= gmax) {
            return Err(Error::Config(format!("gamma must lie in (0, {gmax}] for {}", self.family.name())));
        }
        if !(self.sample_width > 0.0 && self.t_width > 0.0) {
            return Err(Error::Config("partition widths must be positive".into()));
        }
        if !(self.kappa > 2.0 * self.sample_width) {
            return Err(Error::Config(format!(
                "kappa = {} must exceed twice the sample-cell width {}",
                self.kappa, self.sample_width
            )));
        }
        if self.max_gap.is_some_and(|g| g < self.kappa) {
            return Err(Error::Config("max_gap below kappa".into()));
        }
        if self.kappa > 2.0 * self.gamma {
            return Err(Error::Config("no admissible sample pairs: kappa > 2 gamma".into()));
        }
        Ok(())
    }
}

pub fn piecewise_tables(spec: &TableSpec) -> Result<BoundTable> {
    spec.validate()?;
    let forms = Forms::new(spec.family);
    let n = n_cells_for(spec.t_width);
    let n_s = (2.0 * spec.gamma / spec.sample_width - 1e-9).ceil().max(1.0) as usize;
    let floor = tail_epsilon(spec.kappa) / 8.0;
    let rows: Vec<[f64; N_Q]> = (0..n)
        .into_par_iter()
        .map(|j| {
            let t = Interval { lo: j as f64 * spec.t_width, hi: ((j + 1) as f64 * spec.t_width).min(T_MAX) };
            let w = 2.0 * spec.gamma / n_s as f64;
            let cells: Vec<Interval> = (0..n_s)
                .map(|k| Interval {
                    lo: -spec.gamma + k as f64 * w,
                    hi: if k + 1 == n_s { spec.gamma } else { -spec.gamma + (k + 1) as f64 * w },
                })
                .collect();
            let mut cs = CellSearch {
                whole: TData::new(&forms, t, &cells, MAX_ORDER),
                centre: TData::new(&forms, Interval::point(t.mid()), &cells, MAX_ORDER - 1),
                zero_cell: (n_s / 2).min(n_s - 1),
                forms: &forms,
                gamma: spec.gamma,
                kappa: spec.kappa,
                max_gap: spec.max_gap.unwrap_or(f64::INFINITY),
                straddle: spec.straddle,
                n: n_s,
                floor,
                t,
                best: [f64::NEG_INFINITY; N_Q],
                acc: [f64::NEG_INFINITY; N_Q],
            };
            cs.run()
        })
        .collect();
    let col = |q: usize| rows.iter().map(|r| r[q]).collect::<Vec<f64>>();
    let eps = tail_epsilon(spec.kappa);
    let abs_b = [col(0), col(1), col(2)];
    let abs_w = [col(3), col(4), col(5)];
    let sgn_b = [col(6), col(7), col(8)];
    let mono_b = [monotonize(&abs_b[0], eps), monotonize(&abs_b[1], eps), monotonize(&abs_b[2], eps)];
    let mono_w = [monotonize(&abs_w[0], eps), monotonize(&abs_w[1], eps), monotonize(&abs_w[2], eps)];
    Ok(BoundTable {
        family: spec.family,
        gamma: spec.gamma,
        kappa: spec.kappa,
        sample_width: spec.sample_width,
        t_width: spec.t_width,
        eps,
        abs_b,
        abs_w,
        sgn_b,
        mono_b,
        mono_w,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DampTable {
    pub family: KernelFamily,
    pub tau1: f64,
    pub tau2: f64,
    pub t_width: f64,
    pub eps: f64,
    pub abs_d: [Vec<f64>; 3],
    pub mono_d: [Vec<f64>; 3],
}

impl DampTable {
    pub fn smo_d(&self, i: usize, x: f64) -> f64 {
        mono_lookup(&self.mono_d[i], self.t_width, self.eps, x)
    }
}

/// |D⁽ⁱ⁾| tables for τ ∈ [τ₁, τ₂]: τ is split into steps of at most
/// `tau_step`, each t-cell into `t_sub` pieces, with the centred form in t.
pub fn damp_tables(family: KernelFamily, tau1: f64, tau2: f64, t_width: f64, tau_step: f64, t_sub: usize) -> Result<DampTable> {
    if !(tau1 > 0.0 && tau2 >= tau1) {
        return Err(Error::Config("need 0 < tau1 <= tau2".into()));
    }
    if tau2 >= 1.0 {
        return Err(Error::Config("tau2 must be < 1".into()));
    }
    let forms = Forms::new(family);
    let n = n_cells_for(t_width);
    let n_tau = ((tau2 - tau1) / tau_step).ceil().max(1.0) as usize;
    let taus: Vec<Interval> = (0..n_tau)
        .map(|k| {
            let a = tau1 + (tau2 - tau1) * k as f64 / n_tau as f64;
            let b = if k + 1 == n_tau { tau2 } else { tau1 + (tau2 - tau1) * (k + 1) as f64 / n_tau as f64 };
            Interval { lo: a, hi: b }
        })
        .collect();
    let t_sub = t_sub.max(1);
    let rows: Vec<[f64; 3]> = (0..n)
        .into_par_iter()
        .map(|j| {
            let lo = j as f64 * t_width;
            let hi = ((j + 1) as f64 * t_width).min(T_MAX);
            let mut m = [0.0f64; 3];
            for p in 0..t_sub {
                let t = Interval {
                    lo: lo + (hi - lo) * p as f64 / t_sub as f64,
                    hi: lo + (hi - lo) * (p + 1) as f64 / t_sub as f64,
                };
                let tc = Interval::point(t.mid());
                let hw = Interval { lo: -0.5 * t.width(), hi: 0.5 * t.width() };
                for &tau in &taus {
                    let whole = forms.dampened(t, tau, MAX_ORDER);
                    let centre = forms.dampened(tc, tau, MAX_ORDER - 1);
                    for i in 0..3 {
                        let v = whole[i].meet(centre[i] + whole[i + 1] * hw);
                        m[i] = m[i].max(v.mag());
                    }
                }
            }
            m
        })
        .collect();
    let eps = tail_epsilon(tau1);
    let col = |q: usize| rows.iter().map(|r| r[q]).collect::<Vec<f64>>();
    let abs_d = [col(0), col(1), col(2)];
    let mono_d = [monotonize(&abs_d[0], eps), monotonize(&abs_d[1], eps), monotonize(&abs_d[2], eps)];
    Ok(DampTable { family, tau1, tau2, t_width, eps, abs_d, mono_d })
}
