//! Atomic measures, sample sets, geometry (Δ, γ, κ), forward model, design
//! matrices and support-error metrics.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::kernels::KernelSpec;
use crate::rng;

/// Finite sum of Diracs, locations strictly increasing, amplitudes nonzero.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AtomicMeasure {
    spikes: Vec<(f64, f64)>,
}

impl AtomicMeasure {
    pub fn new(mut spikes: Vec<(f64, f64)>) -> Result<Self> {
        spikes.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in spikes.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::InvalidArgument(format!("duplicate spike location {}", w[0].0)));
            }
        }
        for &(t, a) in &spikes {
            if !t.is_finite() || !a.is_finite() || a == 0.0 {
                return Err(Error::InvalidArgument(format!("bad spike ({t}, {a})")));
            }
        }
        Ok(AtomicMeasure { spikes })
    }

    pub fn empty() -> Self {
        AtomicMeasure::default()
    }

    /// Collects the nonzero entries of a grid coefficient vector.
    pub fn from_grid(grid: &Grid, coeffs: &[f64], threshold: f64) -> Self {
        let spikes = grid
            .points
            .iter()
            .zip(coeffs)
            .filter(|(_, a)| a.abs() > threshold && **a != 0.0)
            .map(|(&t, &a)| (t, a))
            .collect();
        AtomicMeasure { spikes }
    }

    pub fn spikes(&self) -> &[(f64, f64)] {
        &self.spikes
    }
    pub fn locations(&self) -> Vec<f64> {
        self.spikes.iter().map(|s| s.0).collect()
    }
    pub fn amplitudes(&self) -> Vec<f64> {
        self.spikes.iter().map(|s| s.1).collect()
    }
    pub fn len(&self) -> usize {
        self.spikes.len()
    }
    pub fn is_empty(&self) -> bool {
        self.spikes.is_empty()
    }
    /// TV norm = ℓ1 norm of the amplitudes.
    pub fn tv_norm(&self) -> f64 {
        self.spikes.iter().map(|s| s.1.abs()).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    locations: Vec<f64>,
    noise: Vec<usize>,
}

impl SampleSet {
    pub fn new(locations: Vec<f64>) -> Result<Self> {
        Self::with_noise(locations, Vec::new())
    }

    pub fn with_noise(locations: Vec<f64>, mut noise: Vec<usize>) -> Result<Self> {
        for w in locations.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidArgument("sample locations must be strictly increasing".into()));
            }
        }
        if locations.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidArgument("non-finite sample location".into()));
        }
        noise.sort_unstable();
        noise.dedup();
        if noise.last().is_some_and(|&i| i >= locations.len()) {
            return Err(Error::InvalidArgument("noise index out of range".into()));
        }
        Ok(SampleSet { locations, noise })
    }

    pub fn locations(&self) -> &[f64] {
        &self.locations
    }
    pub fn noise_indices(&self) -> &[usize] {
        &self.noise
    }
    pub fn len(&self) -> usize {
        self.locations.len()
    }
    pub fn is_empty(&self) -> bool {
        self.locations.is_empty()
    }
    pub fn is_noise(&self, i: usize) -> bool {
        self.noise.binary_search(&i).is_ok()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub points: Vec<f64>,
}

impl Grid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        for w in points.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidArgument("grid points must be strictly increasing".into()));
            }
        }
        Ok(Grid { points })
    }

    /// `n` equispaced points on [a, b] inclusive.
    pub fn uniform(a: f64, b: f64, n: usize) -> Result<Self> {
        if n == 0 || (n > 1 && !(b > a)) {
            return Err(Error::InvalidArgument(format!("bad uniform grid [{a}, {b}] with {n} points")));
        }
        if n == 1 {
            return Ok(Grid { points: vec![a] });
        }
        let h = (b - a) / (n - 1) as f64;
        Ok(Grid { points: (0..n).map(|j| a + h * j as f64).collect() })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Index of the grid point nearest to `t`.
    pub fn nearest(&self, t: f64) -> usize {
        let i = self.points.partition_point(|&g| g < t);
        if i == 0 {
            0
        } else if i == self.points.len() {
            i - 1
        } else if (self.points[i] - t) < (t - self.points[i - 1]) {
            i
        } else {
            i - 1
        }
    }
}

/// Minimum separation Δ(T); +∞ for fewer than two spikes.
pub fn min_separation(mu: &AtomicMeasure) -> f64 {
    mu.spikes.windows(2).map(|w| w[1].0 - w[0].0).fold(f64::INFINITY, f64::min)
}

/// Smallest γ such that every spike has two distinct samples within γ.
pub fn sample_proximity(s: &SampleSet, mu: &AtomicMeasure) -> Result<f64> {
    if s.len() < 2 {
        return Err(Error::InsufficientSamples(format!("need at least 2 samples, have {}", s.len())));
    }
    let mut g: f64 = 0.0;
    for &(t, _) in &mu.spikes {
        let mut d: Vec<f64> = s.locations.iter().map(|x| (x - t).abs()).collect();
        d.sort_by(f64::total_cmp);
        g = g.max(d[1]);
    }
    Ok(g)
}

/// Largest κ such that every spike has two samples within `gamma` that are at
/// least κ apart.
pub fn sample_separation(s: &SampleSet, mu: &AtomicMeasure, gamma: f64) -> Result<f64> {
    let g0 = sample_proximity(s, mu)?;
    let slack = 1e-12 * gamma.abs().max(1.0);
    if gamma + slack < g0 {
        return Err(Error::InvalidArgument(format!("gamma {gamma} below sample proximity {g0}")));
    }
    let mut kappa = f64::INFINITY;
    for &(t, _) in &mu.spikes {
        let near: Vec<f64> = s.locations.iter().copied().filter(|x| (x - t).abs() <= gamma + slack).collect();
        let gap = near.last().unwrap() - near.first().unwrap();
        kappa = kappa.min(gap);
    }
    Ok(kappa)
}

/// y_i = Σ_j a_j K(s_i − t_j).
pub fn convolve_samples(k: &KernelSpec, mu: &AtomicMeasure, s: &SampleSet) -> Vec<f64> {
    s.locations
        .iter()
        .map(|&si| mu.spikes.iter().map(|&(t, a)| a * k.eval(si - t, 0)).sum())
        .collect()
}

/// A[i][j] = K(s_i − g_j).
pub fn design_matrix(k: &KernelSpec, s: &SampleSet, g: &Grid) -> DMatrix<f64> {
    DMatrix::from_fn(s.len(), g.len(), |i, j| k.eval(s.locations[i] - g.points[j], 0))
}

pub fn to_dvector(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

/// Left-hand sides of the robustness bounds, for an estimate against the truth.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    /// |a_j − Σ_{|t̂−t_j| ≤ r} â| per true spike.
    pub amplitude_errors: Vec<f64>,
    /// Σ |â_l| (t̂_l − t_j)² over estimate/truth pairs within r.
    pub clustered_mass: f64,
    /// Σ |â_l| over estimates farther than r from every true spike.
    pub far_mass: f64,
    /// Distance from each true spike to its nearest estimated spike (+∞ if none).
    pub nearest_distances: Vec<f64>,
    pub eta_sigma: f64,
}

impl ErrorReport {
    pub fn max_amplitude_error(&self) -> f64 {
        self.amplitude_errors.iter().copied().fold(0.0, f64::max)
    }
}

pub fn error_report(mu_hat: &AtomicMeasure, mu: &AtomicMeasure, eta_sigma: f64) -> Result<ErrorReport> {
    if !(eta_sigma >= 0.0) || eta_sigma >= min_separation(mu) / 2.0 {
        return Err(Error::InvalidArgument(format!(
            "radius {eta_sigma} must be below half the minimum separation"
        )));
    }
    let truth = mu.locations();
    let mut cluster_sum = vec![0.0; truth.len()];
    let mut clustered = 0.0;
    let mut far = 0.0;
    for &(th, ah) in &mu_hat.spikes {
        // nearest true spike, ties to the left
        let mut best: Option<(usize, f64)> = None;
        for (j, &t) in truth.iter().enumerate() {
            let d = (th - t).abs();
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((j, d));
            }
        }
        match best {
            Some((j, d)) if d <= eta_sigma => {
                cluster_sum[j] += ah;
                clustered += ah.abs() * d * d;
            }
            _ => far += ah.abs(),
        }
    }
    let amplitude_errors = mu.spikes.iter().zip(&cluster_sum).map(|(&(_, a), &c)| (a - c).abs()).collect();
    let nearest_distances = truth
        .iter()
        .map(|&t| mu_hat.spikes.iter().map(|&(th, _)| (th - t).abs()).fold(f64::INFINITY, f64::min))
        .collect();
    Ok(ErrorReport { amplitude_errors, clustered_mass: clustered, far_mass: far, nearest_distances, eta_sigma })
}

/// Spikes Δ apart, each with two samples at ±γ; both locations jittered
/// uniformly by ±jitter_frac of Δ and γ respectively.
pub fn worst_case_pattern(
    num_spikes: usize,
    delta: f64,
    gamma: f64,
    jitter_frac: f64,
    seed: u64,
) -> Result<(AtomicMeasure, SampleSet)> {
    if num_spikes == 0 {
        return Err(Error::InvalidArgument("need at least one spike".into()));
    }
    if !(delta > 2.0 * gamma) || !(gamma > 0.0) || !(0.0..1.0).contains(&jitter_frac) {
        return Err(Error::InvalidArgument(format!(
            "need delta > 2 gamma > 0 and jitter in [0,1), got ({delta}, {gamma}, {jitter_frac})"
        )));
    }
    let mut r = rng::stream(seed, 0x5eed, num_spikes as u64);
    let mut spikes = Vec::with_capacity(num_spikes);
    let mut samples = Vec::with_capacity(2 * num_spikes);
    for j in 0..num_spikes {
        let t = j as f64 * delta + jitter_frac * delta * r.random_range(-1.0..=1.0);
        let sign = if r.random::<bool>() { 1.0 } else { -1.0 };
        let amp = sign * (1.0 + 0.5 * r.random::<f64>());
        let gl = gamma * (1.0 + jitter_frac * r.random_range(-1.0..=1.0));
        let gr = gamma * (1.0 + jitter_frac * r.random_range(-1.0..=1.0));
        spikes.push((t, amp));
        samples.push(t - gl);
        samples.push(t + gr);
    }
    for w in samples.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::InvalidArgument("jittered sample pairs overlap".into()));
        }
    }
    Ok((AtomicMeasure::new(spikes)?, SampleSet::new(samples)?))
}
