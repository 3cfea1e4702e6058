//! Block-norm and Schur bounds, piecewise bounds on Q and its derivatives,
//! and the region test that turns them into a recovery certificate.

use std::io::Write;

use rayon::prelude::*;

use super::tables::{
    damp_tables, default_sample_width, piecewise_tables, BoundTable, DampTable, TableSpec, DEFAULT_T_WIDTH,
};
use crate::error::{Error, Result};
use crate::kernels::KernelFamily;

/// Neighbour sums run over j = 1..=NEIGHBOURS; the remainder is the tail ε.
pub const NEIGHBOURS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundConfig {
    pub family: KernelFamily,
    pub delta: f64,
    pub gamma: f64,
    pub kappa: f64,
    pub sample_width: f64,
    pub t_width: f64,
}

impl BoundConfig {
    pub fn new(family: KernelFamily, delta: f64, gamma: f64, kappa: f64) -> Self {
        Self { family, delta, gamma, kappa, sample_width: default_sample_width(family), t_width: DEFAULT_T_WIDTH }
    }

    /// Coarsen both partitions by `factor` (4 = quarter resolution).
    pub fn coarsened(mut self, factor: f64) -> Self {
        self.sample_width *= factor;
        self.t_width *= factor;
        self
    }

    pub fn table_spec(&self) -> TableSpec {
        TableSpec { sample_width: self.sample_width, t_width: self.t_width, ..TableSpec::new(self.family, self.gamma, self.kappa) }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta >= 2.0) {
            return Err(Error::Config(format!("delta = {} must be at least 2", self.delta)));
        }
        self.table_spec().validate()
    }
}

/// Upper bounds on ‖I−𝓑‖, ‖𝓦‖, ‖𝓑⁽¹⁾‖, ‖I−𝓦⁽¹⁾‖ (∞-norms).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockNorms {
    pub i_b: f64,
    pub w: f64,
    pub b1: f64,
    pub i_w1: f64,
}

fn neighbour_sum(f: impl Fn(f64) -> f64, delta: f64) -> f64 {
    (1..=NEIGHBOURS).map(|j| f(j as f64 * delta)).sum()
}

pub fn block_norm_bounds(table: &BoundTable, delta: f64) -> BlockNorms {
    let e = 2.0 * table.eps;
    BlockNorms {
        i_b: 2.0 * neighbour_sum(|x| table.smo_b(0, x), delta) + e,
        w: 2.0 * neighbour_sum(|x| table.smo_w(0, x), delta) + e,
        b1: 2.0 * neighbour_sum(|x| table.smo_b(1, x), delta) + e,
        i_w1: 2.0 * neighbour_sum(|x| table.smo_w(1, x), delta) + e,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchurBounds {
    pub invertible: bool,
    pub norm_ic: f64,
    pub inv_c: f64,
    pub inv_w1: f64,
    pub alpha: f64,
    pub beta: f64,
    /// ‖α − ψ‖∞ (‖α − ρ‖∞ without noise).
    pub alpha_dev: f64,
}

/// Coefficient bounds for right-hand sides with ‖ψ‖∞ ≤ psi, ‖ζ‖∞ ≤ zeta;
/// `None` means the noiseless (ρ, 0).
pub fn schur_bounds(n: &BlockNorms, rhs: Option<(f64, f64)>) -> SchurBounds {
    let (psi, zeta) = rhs.unwrap_or((1.0, 0.0));
    let nan = SchurBounds {
        invertible: false,
        norm_ic: f64::INFINITY,
        inv_c: f64::INFINITY,
        inv_w1: f64::INFINITY,
        alpha: f64::INFINITY,
        beta: f64::INFINITY,
        alpha_dev: f64::INFINITY,
    };
    if !(n.i_w1 < 1.0) {
        return nan;
    }
    let inv_w1 = 1.0 / (1.0 - n.i_w1);
    let norm_ic = n.i_b + n.w * inv_w1 * n.b1;
    if !(norm_ic < 1.0) {
        return SchurBounds { inv_w1, norm_ic, ..nan };
    }
    let inv_c = 1.0 / (1.0 - norm_ic);
    let alpha = inv_c * (psi + n.w * inv_w1 * zeta);
    let beta = inv_w1 * (zeta + n.b1 * alpha);
    let alpha_dev = norm_ic * alpha + n.w * inv_w1 * zeta;
    SchurBounds { invertible: true, norm_ic, inv_c, inv_w1, alpha, beta, alpha_dev }
}

/// Cell-wise upper bounds on |Q|, Q′, Q″ over t-cells covering (0, Δ/2].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct QBounds {
    pub t_lo: Vec<f64>,
    pub t_hi: Vec<f64>,
    pub abs_q: Vec<f64>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QCoefficients {
    pub alpha: f64,
    pub beta: f64,
    /// Lower bound on each α_j (sign +1 spike).
    pub alpha_lb: f64,
    /// Bounds on |𝒟⁽ᵖ⁾| from the noise, p = 0..2.
    pub noise: [f64; 3],
}

pub fn q_function_bounds(table: &BoundTable, c: &QCoefficients, delta: f64) -> QBounds {
    let half = 0.5 * delta;
    let n = ((half / table.t_width - 1e-9).ceil() as usize).clamp(1, table.n_cells());
    let mut out = QBounds::default();
    for j in 0..n {
        let (lo, hi) = table.cell_range(j);
        let hi = hi.min(half);
        let e = 2.0 * table.eps;
        let around = |f: &dyn Fn(f64) -> f64| -> f64 {
            (1..=NEIGHBOURS).map(|k| f(lo + k as f64 * delta) + f(k as f64 * delta - hi)).sum::<f64>() + e
        };
        let nb: [f64; 3] = std::array::from_fn(|p| around(&|x| table.smo_b(p, x)));
        let nw: [f64; 3] = std::array::from_fn(|p| around(&|x| table.smo_w(p, x)));
        let wave = |p: usize| c.beta * (table.smo_w(p, lo) + nw[p]);
        let signed = |q: usize| -> f64 {
            let s = table.sgn_b[q][j];
            if c.alpha_lb >= 0.0 {
                if s <= 0.0 {
                    c.alpha_lb * s
                } else {
                    c.alpha * s
                }
            } else {
                c.alpha * table.smo_b(q, lo)
            }
        };
        out.t_lo.push(lo);
        out.t_hi.push(hi);
        out.abs_q.push(c.alpha * (table.smo_b(0, lo) + nb[0]) + wave(0) + c.noise[0]);
        out.d1.push(signed(1) + c.alpha * nb[1] + wave(1) + c.noise[1]);
        out.d2.push(signed(2) + c.alpha * nb[2] + wave(2) + c.noise[2]);
    }
    out
}

/// Outcome of the three-region test on (0, Δ/2].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionTest {
    pub ok: bool,
    /// End of the concave region (Q″ < 0 on [0, u1]).
    pub u1: f64,
    /// Start of the far region (|Q| < 1 on [u2, Δ/2]).
    pub u2: f64,
    /// sup Q″ on [0, u1].
    pub curvature: f64,
    /// 1 − sup |Q| on [u2, Δ/2].
    pub gap: f64,
}

pub fn region_test(q: &QBounds) -> RegionTest {
    let n = q.abs_q.len();
    let prefix = q.d2.iter().take_while(|&&v| v < 0.0).count();
    let far = n - q.abs_q.iter().rev().take_while(|&&v| v < 1.0).count();
    let near_ok = (prefix..far).all(|j| q.d1[j] < 0.0);
    let u1 = if prefix == 0 { 0.0 } else { q.t_hi[prefix - 1] };
    let u2 = if far < n { q.t_lo[far] } else { q.t_hi[n - 1] };
    let curvature = q.d2[..prefix].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let gap = 1.0 - q.abs_q[far..].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    RegionTest { ok: prefix > 0 && far < n && near_ok, u1, u2, curvature, gap }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionReport {
    pub delta: f64,
    pub gamma: f64,
    pub kappa: f64,
    pub invertible: bool,
    pub certified: bool,
    pub norms: BlockNorms,
    pub norm_ic: f64,
    pub inv_c: f64,
    pub alpha: f64,
    pub beta: f64,
    pub alpha_dev: f64,
    pub alpha_lb: f64,
    pub u1: f64,
    pub u2: f64,
    /// Smallest radius with Q″ < 0 on [0, η] and |Q| < 1 beyond it: min(u1, u2).
    pub eta: f64,
    /// Bound on ‖q‖∞ from the coefficient bounds.
    pub q_bound: f64,
    /// sup Q″ on [0, η] (negative when certified).
    pub curvature: f64,
    /// 1 − sup |Q| on the far region.
    pub gap: f64,
    pub sparse: Option<SparseExtras>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SparseExtras {
    pub lambda: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub psi: f64,
    pub zeta: f64,
    /// Lower bound on Q(s_i) under the hypothesis |q_i| ≥ λ; must exceed 1.
    pub contradiction: f64,
    /// The grid-neighbour coefficients stay above −λ.
    pub neighbour_ok: bool,
    /// The cancelling coefficients satisfy |b| < 1 (τ ≤ 0.6).
    pub cancel_ok: bool,
}

fn report(delta: f64, table: &BoundTable, norms: BlockNorms, s: SchurBounds, alpha_lb: f64, noise: [f64; 3]) -> RegionReport {
    let mut r = RegionReport {
        delta,
        gamma: table.gamma,
        kappa: table.kappa,
        invertible: s.invertible,
        certified: false,
        norms,
        norm_ic: s.norm_ic,
        inv_c: s.inv_c,
        alpha: s.alpha,
        beta: s.beta,
        alpha_dev: s.alpha_dev,
        alpha_lb,
        u1: f64::NAN,
        u2: f64::NAN,
        eta: f64::NAN,
        q_bound: f64::INFINITY,
        curvature: f64::NAN,
        gap: f64::NAN,
        sparse: None,
    };
    if !s.invertible {
        return r;
    }
    let (b, w) = table.coefficient_bounds();
    r.q_bound = s.alpha * b + s.beta * w;
    let q = q_function_bounds(table, &QCoefficients { alpha: s.alpha, beta: s.beta, alpha_lb, noise }, delta);
    let t = region_test(&q);
    r.certified = t.ok;
    r.u1 = t.u1;
    r.u2 = t.u2;
    r.eta = t.u1.min(t.u2);
    r.curvature = t.curvature;
    r.gap = t.gap;
    r
}

/// Runs norms → Schur → Q-bounds → region test on a prebuilt table.
pub fn certify_with_table(table: &BoundTable, delta: f64) -> RegionReport {
    let norms = block_norm_bounds(table, delta);
    let s = schur_bounds(&norms, None);
    report(delta, table, norms, s, 1.0 - s.alpha_dev, [0.0; 3])
}

pub fn certify_point(cfg: &BoundConfig) -> Result<RegionReport> {
    cfg.validate()?;
    let table = piecewise_tables(&cfg.table_spec())?;
    Ok(certify_with_table(&table, cfg.delta))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SparseConfig {
    pub family: KernelFamily,
    pub delta: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub lambda: f64,
    /// Number of equal sub-intervals of [τ₁, τ₂].
    pub tau_cells: usize,
    pub sample_width: f64,
    pub t_width: f64,
}

impl SparseConfig {
    pub fn new(family: KernelFamily, delta: f64, tau1: f64, tau2: f64, lambda: f64) -> Self {
        Self {
            family,
            delta,
            tau1,
            tau2,
            lambda,
            tau_cells: 24,
            sample_width: default_sample_width(family),
            t_width: DEFAULT_T_WIDTH,
        }
    }

    pub fn gaussian_default() -> Self {
        Self::new(KernelFamily::Gaussian, 3.751, 0.065, 0.2375, 2.0)
    }

    pub fn ricker_default() -> Self {
        Self::new(KernelFamily::Ricker, 5.056, 0.0775, 0.165, 2.0)
    }

    pub fn coarsened(mut self, factor: f64) -> Self {
        self.sample_width *= factor;
        self.t_width *= factor;
        self.tau_cells = ((self.tau_cells as f64 / factor).ceil() as usize).max(1);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta >= 2.0) {
            return Err(Error::Config("delta must be at least 2".into()));
        }
        if !(self.lambda > 0.0) {
            return Err(Error::Config("lambda must be positive".into()));
        }
        if self.tau_cells == 0 {
            return Err(Error::Config("tau_cells must be positive".into()));
        }
        if !(self.tau1 > 0.0 && self.tau2 >= self.tau1) {
            return Err(Error::Config("need 0 < tau1 <= tau2".into()));
        }
        Ok(())
    }
}

/// Sub-intervals of τ on which every bound is evaluated independently.
fn tau_cells(cfg: &SparseConfig) -> Vec<(f64, f64)> {
    let n = cfg.tau_cells;
    let at = |k: usize| if k == n { cfg.tau2 } else { cfg.tau1 + (cfg.tau2 - cfg.tau1) * k as f64 / n as f64 };
    (0..n).map(|k| (at(k), at(k + 1))).collect()
}

fn sparse_cell(cfg: &SparseConfig, ta: f64, tb: f64) -> Result<RegionReport> {
    let spec = TableSpec {
        sample_width: cfg.sample_width,
        t_width: cfg.t_width,
        ..TableSpec::uniform_grid(cfg.family, ta, tb)
    };
    let table = piecewise_tables(&spec)?;
    let damp = damp_tables(cfg.family, ta, tb, cfg.t_width, cfg.sample_width, 2)?;
    Ok(sparse_with_tables(cfg, &table, &damp))
}

/// Noise-term bound 2λ(Σ_{i=0}^{5} |D⁽ᵖ⁾|(iΔ) + ε).
fn noise_bound(d: &DampTable, p: usize, delta: f64, lambda: f64) -> f64 {
    let s: f64 = (0..=NEIGHBOURS).map(|i| d.smo_d(p, i as f64 * delta)).sum();
    2.0 * lambda * (s + d.eps)
}

pub fn sparse_with_tables(cfg: &SparseConfig, table: &BoundTable, damp: &DampTable) -> RegionReport {
    let (ta, tb) = (damp.tau1, damp.tau2);
    let delta = cfg.delta;
    let lambda = cfg.lambda;
    let noise: [f64; 3] = std::array::from_fn(|p| noise_bound(damp, p, delta, lambda));
    let psi = 1.0 + noise[0];
    let zeta = noise[1];
    let norms = block_norm_bounds(table, delta);
    let s = schur_bounds(&norms, Some((psi, zeta)));
    let alpha_lb = 1.0 - noise[0] - s.alpha_dev;
    let mut r = report(delta, table, norms, s, alpha_lb, noise);
    let ricker = cfg.family == KernelFamily::Ricker;
    // |w| of the bracketing pair, which multiplies β in the neighbour coefficient
    let w_scale = if ricker { 1.0 / (ta * (3.0 - ta * ta)) } else { 1.0 / ta };
    let mut neighbour_ok = s.beta * (0.5 * tb * tb).exp() * w_scale < lambda;
    if ricker {
        neighbour_ok &= tb.powi(3) - ta * (3.0 - 12.0 * tb * tb) < 0.0;
    }
    let cancel_ok = tb <= 0.6;
    let eps = table.eps.max(damp.eps);
    let far: f64 = (1..=NEIGHBOURS)
        .map(|i| {
            let x = i as f64 * delta - tb;
            s.alpha * table.smo_b(0, x) + s.beta * table.smo_w(0, x)
        })
        .sum();
    let dsum: f64 = (0..=NEIGHBOURS).map(|i| damp.smo_d(0, i as f64 * delta)).sum();
    let contradiction = lambda - s.beta * w_scale - 2.0 * (3.0 * eps + far + lambda * dsum);
    r.certified = r.certified && alpha_lb >= 0.0 && neighbour_ok && cancel_ok && contradiction > 1.0;
    r.sparse = Some(SparseExtras { lambda, tau1: ta, tau2: tb, psi, zeta, contradiction, neighbour_ok, cancel_ok });
    r
}

/// Worst case over all τ-cells of [τ₁, τ₂].
pub fn certify_sparse_point(cfg: &SparseConfig) -> Result<RegionReport> {
    Ok(merge_sparse(cfg, certify_sparse_cells(cfg)?))
}

/// Per-τ-cell reports, in increasing τ.
pub fn certify_sparse_cells(cfg: &SparseConfig) -> Result<Vec<RegionReport>> {
    cfg.validate()?;
    tau_cells(cfg).par_iter().map(|&(a, b)| sparse_cell(cfg, a, b)).collect()
}

fn merge_sparse(cfg: &SparseConfig, reports: Vec<RegionReport>) -> RegionReport {
    let max = |f: &dyn Fn(&RegionReport) -> f64| reports.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
    let min = |f: &dyn Fn(&RegionReport) -> f64| reports.iter().map(f).fold(f64::INFINITY, f64::min);
    let ex = |r: &RegionReport| r.sparse.expect("sparse report");
    let mut out = reports[0].clone();
    out.gamma = cfg.tau2;
    out.kappa = cfg.tau1;
    out.invertible = reports.iter().all(|r| r.invertible);
    out.certified = reports.iter().all(|r| r.certified);
    out.norms = BlockNorms {
        i_b: max(&|r| r.norms.i_b),
        w: max(&|r| r.norms.w),
        b1: max(&|r| r.norms.b1),
        i_w1: max(&|r| r.norms.i_w1),
    };
    out.norm_ic = max(&|r| r.norm_ic);
    out.inv_c = max(&|r| r.inv_c);
    out.alpha = max(&|r| r.alpha);
    out.beta = max(&|r| r.beta);
    out.alpha_dev = max(&|r| r.alpha_dev);
    out.alpha_lb = min(&|r| r.alpha_lb);
    out.u1 = min(&|r| r.u1);
    out.u2 = max(&|r| r.u2);
    out.eta = out.u1.min(out.u2);
    out.q_bound = max(&|r| r.q_bound);
    out.curvature = max(&|r| r.curvature);
    out.gap = min(&|r| r.gap);
    out.sparse = Some(SparseExtras {
        lambda: cfg.lambda,
        tau1: cfg.tau1,
        tau2: cfg.tau2,
        psi: max(&|r| ex(r).psi),
        zeta: max(&|r| ex(r).zeta),
        contradiction: min(&|r| ex(r).contradiction),
        neighbour_ok: reports.iter().all(|r| ex(r).neighbour_ok),
        cancel_ok: reports.iter().all(|r| ex(r).cancel_ok),
    });
    out
}

/// Certifies every (Δ, γ) grid point; one table per γ, shared across Δ.
/// Reports come back in row-major (γ outer, Δ inner) order.
pub fn region_sweep(
    family: KernelFamily,
    deltas: &[f64],
    gammas: &[f64],
    kappa: f64,
    coarsen: f64,
) -> Result<Vec<RegionReport>> {
    if deltas.is_empty() || gammas.is_empty() {
        return Err(Error::Config("sweep grids must be non-empty".into()));
    }
    for &d in deltas {
        BoundConfig::new(family, d, gammas[0], kappa).coarsened(coarsen).validate()?;
    }
    let mut out = Vec::with_capacity(deltas.len() * gammas.len());
    for &g in gammas {
        let cfg = BoundConfig::new(family, deltas[0], g, kappa).coarsened(coarsen);
        let table = piecewise_tables(&cfg.table_spec())?;
        out.extend(deltas.par_iter().map(|&d| certify_with_table(&table, d)).collect::<Vec<_>>());
    }
    Ok(out)
}

pub const REGION_CSV_HEADER: &str = "delta,gamma,kappa,invertible,certified,norm_IW1,norm_IC,alpha_inf,beta_inf,u1,u2,eta";

pub fn write_region_csv<W: Write>(mut w: W, reports: &[RegionReport]) -> Result<()> {
    writeln!(w, "{REGION_CSV_HEADER}")?;
    for r in reports {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.delta,
            r.gamma,
            r.kappa,
            r.invertible,
            r.certified,
            r.norms.i_w1,
            r.norm_ic,
            r.alpha,
            r.beta,
            r.u1,
            r.u2,
            r.eta
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neumann_example() {
        let n = BlockNorms { i_b: 0.5, w: 0.0, b1: 0.0, i_w1: 0.0 };
        let s = schur_bounds(&n, None);
        assert!(s.invertible);
        assert_eq!(s.inv_c, 2.0);
        assert_eq!(s.alpha, 2.0);
        assert_eq!(s.alpha_dev, 1.0);
    }

    #[test]
    fn not_invertible_is_reported() {
        let n = BlockNorms { i_b: 0.1, w: 0.1, b1: 0.1, i_w1: 1.0 };
        assert!(!schur_bounds(&n, None).invertible);
        let n = BlockNorms { i_b: 0.95, w: 0.5, b1: 0.5, i_w1: 0.5 };
        assert!(!schur_bounds(&n, None).invertible);
    }

    #[test]
    fn region_test_splits() {
        let q = QBounds {
            t_lo: vec![0.0, 1.0, 2.0, 3.0],
            t_hi: vec![1.0, 2.0, 3.0, 4.0],
            abs_q: vec![1.2, 1.1, 0.9, 0.5],
            d1: vec![0.1, -0.2, -0.1, 0.3],
            d2: vec![-1.0, 0.5, 0.5, 0.5],
        };
        let t = region_test(&q);
        assert!(t.ok);
        assert_eq!((t.u1, t.u2), (1.0, 2.0));
        assert_eq!(t.curvature, -1.0);
        assert!((t.gap - 0.1).abs() < 1e-15);
        let mut bad = q.clone();
        bad.d1[1] = 0.0;
        assert!(!region_test(&bad).ok);
    }
}
