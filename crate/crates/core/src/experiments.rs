//! Experiment runners: conditioning of the measurement operator, noiseless
//! phase diagrams (worst-case and uniform sampling) and sparse-noise sweeps.
//! Every trial draws from `rng::stream(seed, cell, trial)`, so results do not
//! depend on the order in which cells run.

use nalgebra::DMatrix;
use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernels::{KernelFamily, KernelSpec};
use crate::rng;
use crate::signal::{convolve_samples, design_matrix, worst_case_pattern, AtomicMeasure, Grid, SampleSet};
use crate::solver::{basis_pursuit, kkt_report, relative_error, sparse_bp, KktReport, SolveOptions};

/// Recovery thresholds on the relative amplitude error.
pub const NOISELESS_TOL: f64 = 1e-4;
pub const SPARSE_TOL: f64 = 1e-3;

#[derive(Debug, Clone)]
pub struct Instance {
    pub kernel: KernelSpec,
    pub grid: Grid,
    pub mu: AtomicMeasure,
    pub samples: SampleSet,
    /// True coefficients on the grid.
    pub truth: Vec<f64>,
    /// Sparse corruption per sample (zeros when clean).
    pub w: Vec<f64>,
    pub y: Vec<f64>,
}

impl Instance {
    fn assemble(kernel: KernelSpec, grid: Grid, spikes: Vec<(usize, f64)>, samples: SampleSet, w: Vec<f64>) -> Result<Self> {
        let mut truth = vec![0.0; grid.len()];
        for &(j, a) in &spikes {
            truth[j] += a;
        }
        let mu = AtomicMeasure::new(spikes.iter().map(|&(j, a)| (grid.points[j], a)).collect())?;
        let mut y = convolve_samples(&kernel, &mu, &samples);
        for (yi, wi) in y.iter_mut().zip(&w) {
            *yi += wi;
        }
        Ok(Instance { kernel, grid, mu, samples, truth, w, y })
    }

    pub fn design(&self) -> DMatrix<f64> {
        design_matrix(&self.kernel, &self.samples, &self.grid)
    }

    /// Same data with spike `j` removed (measurements recomputed).
    pub fn without_spike(&self, j: usize) -> Result<Self> {
        let spikes: Vec<(usize, f64)> = self
            .mu
            .spikes()
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != j)
            .map(|(_, &(t, a))| (self.grid.nearest(t), a))
            .collect();
        Self::assemble(self.kernel, self.grid.clone(), spikes, self.samples.clone(), self.w.clone())
    }

    /// Same data with the corruption on sample `i` removed.
    pub fn without_corruption(&self, i: usize) -> Result<Self> {
        let mut w = self.w.clone();
        w[i] = 0.0;
        let noise = self.samples.noise_indices().iter().copied().filter(|&k| k != i).collect();
        let samples = SampleSet::with_noise(self.samples.locations().to_vec(), noise)?;
        let spikes = self.mu.spikes().iter().map(|&(t, a)| (self.grid.nearest(t), a)).collect();
        Self::assemble(self.kernel, self.grid.clone(), spikes, samples, w)
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub rel_error: f64,
    pub recovered: bool,
    pub converged: bool,
    pub kkt: KktReport,
    pub x: Vec<f64>,
    pub w: Option<Vec<f64>>,
}

/// Centres `n` spikes spaced `spacing` apart (plus jitter) in [0, 1] and
/// snaps them to the grid.
fn layout_offset(n: usize, spacing: f64) -> f64 {
    0.5 - 0.5 * (n.saturating_sub(1)) as f64 * spacing
}

/// Worst-case pattern (Δ, γ in units of σ): spikes Δσ apart, two
/// samples at ±γσ per spike, ±`jitter` relative jitter on both.
#[allow(clippy::too_many_arguments)]
pub fn worst_case_instance(
    family: KernelFamily,
    sigma: f64,
    grid_points: usize,
    num_spikes: usize,
    delta: f64,
    gamma: f64,
    jitter: f64,
    seed: u64,
) -> Result<Instance> {
    let kernel = KernelSpec::new(family, sigma)?;
    let grid = Grid::uniform(0.0, 1.0, grid_points)?;
    let (mu, s) = worst_case_pattern(num_spikes, delta * sigma, gamma * sigma, jitter, seed)?;
    let off = layout_offset(num_spikes, delta * sigma);
    let mut spikes = Vec::new();
    let mut locs = Vec::new();
    for (k, &(t, a)) in mu.spikes().iter().enumerate() {
        let j = grid.nearest(t + off);
        let shift = grid.points[j] - t;
        spikes.push((j, a));
        locs.push(s.locations()[2 * k] + shift);
        locs.push(s.locations()[2 * k + 1] + shift);
    }
    let n = locs.len();
    Instance::assemble(kernel, grid, spikes, SampleSet::new(locs)?, vec![0.0; n])
}

/// Uniform sampling at step `step`·σ over [0, 1]; spikes Δσ apart with
/// jitter and random ±(1..1.5) amplitudes.
#[allow(clippy::too_many_arguments)]
pub fn uniform_instance(
    family: KernelFamily,
    sigma: f64,
    grid_points: usize,
    num_spikes: usize,
    delta: f64,
    step: f64,
    jitter: f64,
    seed: u64,
) -> Result<Instance> {
    let kernel = KernelSpec::new(family, sigma)?;
    let grid = Grid::uniform(0.0, 1.0, grid_points)?;
    let mut r = rng::stream(seed, 0x0f1f, num_spikes as u64);
    let spikes = spike_train(&mut r, &grid, num_spikes, delta * sigma, jitter, |r| {
        let s = if r.random::<bool>() { 1.0 } else { -1.0 };
        s * (1.0 + 0.5 * r.random::<f64>())
    })?;
    let samples = uniform_samples(step * sigma);
    let n = samples.len();
    Instance::assemble(kernel, grid, spikes, SampleSet::new(samples)?, vec![0.0; n])
}

fn uniform_samples(h: f64) -> Vec<f64> {
    let n = (1.0 / h + 1e-9).floor() as usize;
    (0..=n).map(|k| k as f64 * h).collect()
}

fn spike_train<R: Rng>(
    r: &mut R,
    grid: &Grid,
    n: usize,
    spacing: f64,
    jitter: f64,
    mut amp: impl FnMut(&mut R) -> f64,
) -> Result<Vec<(usize, f64)>> {
    if n == 0 || (n > 1 && (n - 1) as f64 * spacing * (1.0 + jitter) > 1.0) {
        return Err(Error::InvalidArgument(format!("{n} spikes at spacing {spacing} do not fit in [0, 1]")));
    }
    let off = layout_offset(n, spacing);
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(n);
    for k in 0..n {
        let t = off + k as f64 * spacing + jitter * spacing * r.random_range(-1.0..=1.0);
        let j = grid.nearest(t);
        if out.last().is_some_and(|&(p, _)| p >= j) {
            return Err(Error::InvalidArgument("spikes collide on the grid".into()));
        }
        let mut a = amp(r);
        while a == 0.0 {
            a = amp(r);
        }
        out.push((j, a));
    }
    Ok(out)
}

/// Sparse-noise instance: samples on a grid of width `width`·σ over [0, 1], spikes
/// Δσ apart (±1% jitter) with N(0,1) amplitudes, and `corruptions` samples
/// per segment of length Δσ replaced by N(0,1) outliers.
#[allow(clippy::too_many_arguments)]
pub fn sparse_instance(
    family: KernelFamily,
    sigma: f64,
    grid_points: usize,
    num_spikes: usize,
    delta: f64,
    corruptions: usize,
    width: f64,
    seed: u64,
) -> Result<Instance> {
    let kernel = KernelSpec::new(family, sigma)?;
    let grid = Grid::uniform(0.0, 1.0, grid_points)?;
    let mut r = rng::stream(seed, 0x5ba7, (num_spikes * 64 + corruptions) as u64);
    let spikes = spike_train(&mut r, &grid, num_spikes, delta * sigma, 0.01, |r| r.sample(StandardNormal))?;
    let locs = uniform_samples(width * sigma);
    let seg = delta * sigma;
    let n_seg = (1.0 / seg).ceil() as usize;
    let mut w = vec![0.0; locs.len()];
    let mut noise = Vec::new();
    for k in 0..n_seg {
        let members: Vec<usize> =
            (0..locs.len()).filter(|&i| locs[i] >= k as f64 * seg && locs[i] < (k + 1) as f64 * seg).collect();
        let c = corruptions.min(members.len());
        for pick in sample_indices(&mut r, members.len(), c) {
            let i = members[pick];
            let mut v: f64 = r.sample(StandardNormal);
            while v == 0.0 {
                v = r.sample(StandardNormal);
            }
            w[i] = v;
            noise.push(i);
        }
    }
    Instance::assemble(kernel, grid, spikes, SampleSet::with_noise(locs, noise)?, w)
}

pub fn solve_noiseless(inst: &Instance, opts: &SolveOptions) -> Result<Outcome> {
    let a = inst.design();
    let res = basis_pursuit(&a, &inst.y, opts)?;
    let kkt = kkt_report(&a, &inst.y, &res);
    let err = relative_error(&res.x, &inst.truth);
    Ok(Outcome { rel_error: err, recovered: err < NOISELESS_TOL, converged: res.converged, kkt, x: res.x, w: None })
}

pub fn solve_sparse(inst: &Instance, lambda: f64, opts: &SolveOptions) -> Result<Outcome> {
    let a = inst.design();
    let res = sparse_bp(&a, &inst.y, lambda, opts)?;
    let kkt = kkt_report(&a, &inst.y, &res);
    let err = relative_error(&res.x, &inst.truth);
    Ok(Outcome { rel_error: err, recovered: err < SPARSE_TOL, converged: res.converged, kkt, x: res.x, w: res.w })
}

/// Single spike at the origin with samples at ±γ₀ (units of σ = 1), solved on
/// a grid of step `grid_step` over [−3, 3].
pub fn single_spike_trial(family: KernelFamily, gamma0: f64, grid_step: f64, opts: &SolveOptions) -> Result<Outcome> {
    let kernel = KernelSpec::new(family, 1.0)?;
    let n = (3.0 / grid_step).round() as usize;
    let grid = Grid::new((0..=2 * n).map(|k| (k as f64 - n as f64) * grid_step).collect())?;
    let samples = SampleSet::new(vec![-gamma0, gamma0])?;
    let inst = Instance::assemble(kernel, grid, vec![(n, 1.0)], samples, vec![0.0; 2])?;
    solve_noiseless(&inst, opts)
}

/// Minimum-TV explanation of the two samples by two spikes placed on them.
pub fn two_spike_tv(family: KernelFamily, gamma0: f64) -> f64 {
    let k = KernelSpec::new(family, 1.0).expect("unit sigma");
    2.0 * (k.eval(gamma0, 0) / (1.0 + k.eval(2.0 * gamma0, 0))).abs()
}

// ---------------------------------------------------------------- conditioning

#[derive(Debug, Clone)]
pub struct ConditioningConfig {
    pub family: KernelFamily,
    pub spike_counts: Vec<usize>,
    pub delta0s: Vec<f64>,
    /// Samples per spike (n = ratio·m) when `sample_step` is unset.
    pub samples_per_spike: usize,
    /// Fixed sample spacing (units of σ) instead of n = ratio·m.
    pub sample_step: Option<f64>,
    /// Padding (units of σ) of the sample window beyond the support.
    pub pad: f64,
    pub perturbation: f64,
    pub trials: usize,
    pub seed: u64,
}

impl Default for ConditioningConfig {
    fn default() -> Self {
        Self {
            family: KernelFamily::Gaussian,
            spike_counts: vec![10, 20, 40],
            delta0s: (1..=20).map(|k| 0.1 * k as f64).collect(),
            samples_per_spike: 10,
            sample_step: None,
            pad: 3.0,
            perturbation: 0.025,
            trials: 5,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditioningRow {
    pub m: usize,
    pub delta0: f64,
    pub sample_step: f64,
    pub sv_min: f64,
    pub sv_mid: f64,
}

/// Smallest and middle singular value of [K(s_i − t_j)] for m points at
/// spacing Δ₀/2 (spacing perturbed by up to `perturbation`·Δ₀), σ = 1.
pub fn conditioning_point(cfg: &ConditioningConfig, m: usize, delta0: f64, cell: u64) -> Result<ConditioningRow> {
    if m < 2 || !(delta0 > 0.0) {
        return Err(Error::InvalidArgument("need m >= 2 and delta0 > 0".into()));
    }
    let k = KernelSpec::new(cfg.family, 1.0)?;
    let (mut smin, mut smid, mut step_used) = (0.0, 0.0, 0.0);
    for trial in 0..cfg.trials.max(1) {
        let mut r = rng::stream(cfg.seed, cell, trial as u64);
        let mut t = Vec::with_capacity(m);
        let mut x = 0.0;
        for j in 0..m {
            if j > 0 {
                x += 0.5 * delta0 + cfg.perturbation * delta0 * r.random_range(-0.5..=0.5);
            }
            t.push(x);
        }
        let (lo, hi) = (t[0] - cfg.pad, t[m - 1] + cfg.pad);
        let s: Vec<f64> = match cfg.sample_step {
            Some(h) => (0..=((hi - lo) / h).floor() as usize).map(|i| lo + i as f64 * h).collect(),
            None => {
                let n = cfg.samples_per_spike * m;
                (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
            }
        };
        step_used = s[1] - s[0];
        let a = DMatrix::from_fn(s.len(), m, |i, j| k.eval(s[i] - t[j], 0));
        let mut sv: Vec<f64> = a.singular_values().iter().copied().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        smin += sv[m - 1];
        smid += sv[m / 2];
    }
    let n = cfg.trials.max(1) as f64;
    Ok(ConditioningRow { m, delta0, sample_step: step_used, sv_min: smin / n, sv_mid: smid / n })
}

pub fn conditioning(cfg: &ConditioningConfig) -> Result<Vec<ConditioningRow>> {
    let cells: Vec<(usize, f64)> =
        cfg.spike_counts.iter().flat_map(|&m| cfg.delta0s.iter().map(move |&d| (m, d))).collect();
    if cells.is_empty() {
        return Err(Error::Config("conditioning grids must be non-empty".into()));
    }
    cells.par_iter().enumerate().map(|(c, &(m, d))| conditioning_point(cfg, m, d, c as u64)).collect()
}

/// Smallest Δ₀ from which the chosen singular value stays above
/// `frac`·(its value at the largest Δ₀). Rows must share one m, sorted by Δ₀.
pub fn transition_delta(rows: &[ConditioningRow], middle: bool, frac: f64) -> Option<f64> {
    let v = |r: &ConditioningRow| if middle { r.sv_mid } else { r.sv_min };
    let plateau = v(rows.last()?);
    let mut out = None;
    for r in rows.iter().rev() {
        if v(r) >= frac * plateau {
            out = Some(r.delta0);
        } else {
            break;
        }
    }
    out
}

// ---------------------------------------------------------------- phase diagrams

#[derive(Debug, Clone)]
pub struct PhaseConfig {
    pub family: KernelFamily,
    pub sigma: f64,
    pub grid_points: usize,
    pub num_spikes: usize,
    pub deltas: Vec<f64>,
    /// Sample proximities γ (worst-case) or grid widths (uniform), units of σ.
    pub second: Vec<f64>,
    pub jitter: f64,
    pub trials: usize,
    pub seed: u64,
    pub solver: SolveOptions,
}

impl Default for PhaseConfig {
    fn default() -> Self {
        Self {
            family: KernelFamily::Gaussian,
            sigma: 0.01,
            grid_points: 2000,
            num_spikes: 10,
            deltas: (0..7).map(|k| 1.0 + k as f64).collect(),
            second: (1..=8).map(|k| 0.2 * k as f64).collect(),
            jitter: 0.01,
            trials: 5,
            seed: 1,
            solver: SolveOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseRow {
    pub delta: f64,
    pub second: f64,
    pub fraction: f64,
    pub fraction_monotonized: f64,
}

fn fraction(trials: usize, f: impl Fn(usize) -> Result<bool> + Sync) -> Result<f64> {
    let ok = (0..trials).into_par_iter().map(&f).collect::<Result<Vec<bool>>>()?;
    Ok(ok.iter().filter(|&&b| b).count() as f64 / trials.max(1) as f64)
}

fn trial_seed(seed: u64, cell: u64, trial: u64) -> u64 {
    rng::stream(seed, cell, trial).random()
}

/// min over (Δ' ≥ Δ, p' ≤ p); cells absent from the grid are skipped.
pub fn monotonize_phase(rows: &mut [PhaseRow]) {
    let snapshot: Vec<PhaseRow> = rows.to_vec();
    for r in rows.iter_mut() {
        r.fraction_monotonized = snapshot
            .iter()
            .filter(|o| o.delta >= r.delta && o.second <= r.second)
            .map(|o| o.fraction)
            .fold(f64::INFINITY, f64::min);
    }
}

fn phase_generic(
    cfg: &PhaseConfig,
    skip: impl Fn(f64, f64) -> bool,
    make: impl Fn(f64, f64, u64) -> Result<Instance> + Sync,
) -> Result<Vec<PhaseRow>> {
    if cfg.deltas.is_empty() || cfg.second.is_empty() {
        return Err(Error::Config("phase grids must be non-empty".into()));
    }
    let mut rows = Vec::new();
    for (i, &d) in cfg.deltas.iter().enumerate() {
        for (j, &p) in cfg.second.iter().enumerate() {
            if skip(d, p) {
                continue;
            }
            let cell = (i * cfg.second.len() + j) as u64;
            let frac = fraction(cfg.trials, |t| match make(d, p, trial_seed(cfg.seed, cell, t as u64)) {
                Ok(inst) => Ok(solve_noiseless(&inst, &cfg.solver).map(|o| o.recovered).unwrap_or(false)),
                // layouts that do not fit count as failures
                Err(Error::InvalidArgument(_)) => Ok(false),
                Err(e) => Err(e),
            })?;
            rows.push(PhaseRow { delta: d, second: p, fraction: frac, fraction_monotonized: frac });
        }
    }
    monotonize_phase(&mut rows);
    Ok(rows)
}

/// Recovery fraction over (Δ, γ) with the worst-case two-sample pattern.
pub fn phase(cfg: &PhaseConfig) -> Result<Vec<PhaseRow>> {
    phase_generic(
        cfg,
        |d, g| !(d > 2.0 * g * (1.0 + cfg.jitter)),
        |d, g, seed| worst_case_instance(cfg.family, cfg.sigma, cfg.grid_points, cfg.num_spikes, d, g, cfg.jitter, seed),
    )
}

/// Recovery fraction over (Δ, grid width) with uniform samples; widths above
/// Δ/2 are omitted.
pub fn uniform_phase(cfg: &PhaseConfig) -> Result<Vec<PhaseRow>> {
    phase_generic(
        cfg,
        |d, h| h > 0.5 * d,
        |d, h, seed| uniform_instance(cfg.family, cfg.sigma, cfg.grid_points, cfg.num_spikes, d, h, cfg.jitter, seed),
    )
}

// ---------------------------------------------------------------- sparse noise

#[derive(Debug, Clone)]
pub struct SparsePhaseConfig {
    pub family: KernelFamily,
    pub grid_points: usize,
    pub width: f64,
    pub trials: usize,
    pub seed: u64,
    pub solver: SolveOptions,
    /// λ × corruptions sweep (fixed σ, spikes, Δ).
    pub lambda_sigma: f64,
    pub lambda_spikes: usize,
    pub lambda_delta: f64,
    pub lambdas: Vec<f64>,
    pub corruptions: Vec<usize>,
    /// Δ × spike-count sweep (fixed corruptions, λ).
    pub count_sigma: f64,
    pub count_corruptions: usize,
    pub spike_counts: Vec<usize>,
    /// Δ × corruptions sweep (fixed spikes, λ).
    pub sep_sigma: f64,
    pub sep_spikes: usize,
    pub deltas: Vec<f64>,
    pub lambda: f64,
}

impl Default for SparsePhaseConfig {
    fn default() -> Self {
        Self {
            family: KernelFamily::Gaussian,
            grid_points: 1000,
            width: 0.2,
            trials: 5,
            seed: 1,
            solver: SolveOptions::default(),
            lambda_sigma: 0.02,
            lambda_spikes: 10,
            lambda_delta: 4.5,
            lambdas: vec![0.5, 1.0, 2.0, 3.0, 5.0],
            corruptions: vec![0, 1, 2, 3],
            count_sigma: 0.01,
            count_corruptions: 2,
            spike_counts: vec![2, 5, 10],
            sep_sigma: 0.01,
            sep_spikes: 10,
            deltas: vec![3.0, 4.0, 5.0, 6.0, 8.0],
            lambda: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseSweeps {
    /// (λ, corruptions, fraction)
    pub lambda_vs_noise: Vec<(f64, usize, f64)>,
    /// (Δ, spikes, fraction)
    pub delta_vs_spikes: Vec<(f64, usize, f64)>,
    /// (Δ, corruptions, fraction)
    pub delta_vs_noise: Vec<(f64, usize, f64)>,
}

fn sparse_fraction(
    cfg: &SparsePhaseConfig,
    sweep: u64,
    cell: u64,
    make: impl Fn(u64) -> Result<Instance> + Sync,
    lambda: f64,
) -> Result<f64> {
    fraction(cfg.trials, |t| {
        let seed = trial_seed(cfg.seed ^ (sweep << 48), cell, t as u64);
        match make(seed) {
            Ok(inst) => Ok(solve_sparse(&inst, lambda, &cfg.solver).map(|o| o.recovered).unwrap_or(false)),
            Err(Error::InvalidArgument(_)) => Ok(false),
            Err(e) => Err(e),
        }
    })
}

pub fn sparse_phase(cfg: &SparsePhaseConfig) -> Result<SparseSweeps> {
    let fam = cfg.family;
    let mut out = SparseSweeps { lambda_vs_noise: vec![], delta_vs_spikes: vec![], delta_vs_noise: vec![] };
    let mut cell = 0u64;
    for &l in &cfg.lambdas {
        for &c in &cfg.corruptions {
            // same instances across λ: the seed ignores the λ index
            let cseed = c as u64;
            let f = sparse_fraction(
                cfg,
                1,
                cseed,
                |s| sparse_instance(fam, cfg.lambda_sigma, cfg.grid_points, cfg.lambda_spikes, cfg.lambda_delta, c, cfg.width, s),
                l,
            )?;
            out.lambda_vs_noise.push((l, c, f));
        }
    }
    for &d in &cfg.deltas {
        for &n in &cfg.spike_counts {
            cell += 1;
            let f = sparse_fraction(
                cfg,
                2,
                cell,
                |s| sparse_instance(fam, cfg.count_sigma, cfg.grid_points, n, d, cfg.count_corruptions, cfg.width, s),
                cfg.lambda,
            )?;
            out.delta_vs_spikes.push((d, n, f));
        }
    }
    for &d in &cfg.deltas {
        for &c in &cfg.corruptions {
            cell += 1;
            let f = sparse_fraction(
                cfg,
                3,
                cell,
                |s| sparse_instance(fam, cfg.sep_sigma, cfg.grid_points, cfg.sep_spikes, d, c, cfg.width, s),
                cfg.lambda,
            )?;
            out.delta_vs_noise.push((d, c, f));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monotonized_fractions_are_monotone() {
        let mut rows = vec![
            PhaseRow { delta: 1.0, second: 0.1, fraction: 1.0, fraction_monotonized: 0.0 },
            PhaseRow { delta: 2.0, second: 0.1, fraction: 0.4, fraction_monotonized: 0.0 },
            PhaseRow { delta: 2.0, second: 0.2, fraction: 1.0, fraction_monotonized: 0.0 },
            PhaseRow { delta: 1.0, second: 0.2, fraction: 0.8, fraction_monotonized: 0.0 },
        ];
        monotonize_phase(&mut rows);
        let m: Vec<f64> = rows.iter().map(|r| r.fraction_monotonized).collect();
        assert_eq!(m, vec![0.4, 0.4, 0.4, 0.4]);
    }

    #[test]
    fn worst_case_instance_geometry() {
        let inst = worst_case_instance(KernelFamily::Gaussian, 0.01, 2000, 10, 4.0, 0.3, 0.0, 3).unwrap();
        assert_eq!(inst.mu.len(), 10);
        assert_eq!(inst.samples.len(), 20);
        for (k, &(t, _)) in inst.mu.spikes().iter().enumerate() {
            assert!((t - inst.samples.locations()[2 * k] - 0.003).abs() < 1e-12);
        }
        assert_eq!(inst.truth.iter().filter(|v| **v != 0.0).count(), 10);
    }

    #[test]
    fn sparse_instance_corrupts_per_segment() {
        let inst = sparse_instance(KernelFamily::Gaussian, 0.02, 1000, 10, 4.5, 1, 0.2, 5).unwrap();
        let n_seg = (1.0f64 / 0.09).ceil() as usize;
        assert_eq!(inst.samples.noise_indices().len(), n_seg);
        assert_eq!(inst.w.iter().filter(|v| **v != 0.0).count(), n_seg);
        let t = inst.without_corruption(inst.samples.noise_indices()[0]).unwrap();
        assert_eq!(t.samples.noise_indices().len(), n_seg - 1);
    }

    #[test]
    fn two_spike_tv_crosses_one() {
        let g = (2.0f64 * 2f64.ln()).sqrt();
        assert!(two_spike_tv(KernelFamily::Gaussian, 0.9 * g) > 1.0);
        assert!(two_spike_tv(KernelFamily::Gaussian, 0.95 * g) < 1.0);
        assert!(two_spike_tv(KernelFamily::Ricker, 0.95 * 0.7811) > 1.0);
        assert!(two_spike_tv(KernelFamily::Ricker, 1.05 * 0.7811) < 1.0);
    }
}
