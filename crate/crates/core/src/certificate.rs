//! Dual certificates: bump/wave interpolation for noiseless recovery, the
//! dampened-kernel construction for sparse noise, and grid-plus-bridge
//! verification of |Q| < 1 off the support.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::kernels::{bump_wave_coeffs, eval_bump, eval_wave, BumpWaveCoeffs, KernelSpec};
use crate::signal::SampleSet;

/// Systems with a condition estimate above this are rejected.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub support: Vec<f64>,
    /// Sample pair (s1 < s2) per spike.
    pub pairs: Vec<(f64, f64)>,
    pub coeffs: Vec<BumpWaveCoeffs>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    /// Target values at the spikes.
    pub rho: Vec<f64>,
    /// Sample locations carrying q (pairs flattened).
    pub samples: Vec<f64>,
    pub q: Vec<f64>,
    pub condition: f64,
}

/// Per spike, the within-γ pair with the largest mutual distance.
pub fn select_certificate_samples(s: &SampleSet, support: &[f64], gamma: f64, kappa: f64) -> Result<Vec<(f64, f64)>> {
    let slack = 1e-12 * gamma.abs().max(1.0);
    let mut pairs = Vec::with_capacity(support.len());
    for &t in support {
        let near: Vec<f64> = s.locations().iter().copied().filter(|x| (x - t).abs() <= gamma + slack).collect();
        if near.len() < 2 {
            return Err(Error::Selection { location: t });
        }
        // extremes maximize the gap; among equal gaps the extremes are unique
        let (a, b) = (near[0], near[near.len() - 1]);
        if b - a + slack < kappa {
            return Err(Error::Selection { location: t });
        }
        pairs.push((a, b));
    }
    Ok(pairs)
}

fn interpolation_matrix(k: &KernelSpec, support: &[f64], coeffs: &[BumpWaveCoeffs]) -> DMatrix<f64> {
    let n = support.len();
    DMatrix::from_fn(2 * n, 2 * n, |r, c| {
        let (ti, deriv) = if r < n { (support[r], 0) } else { (support[r - n], 1) };
        if c < n {
            eval_bump(&coeffs[c], k, ti, deriv)
        } else {
            eval_wave(&coeffs[c - n], k, ti, deriv)
        }
    })
}

fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = m.singular_values();
    let max = sv.max();
    let min = sv.min();
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

fn solve_interpolation(
    k: &KernelSpec,
    support: &[f64],
    coeffs: &[BumpWaveCoeffs],
    rhs_val: &[f64],
    rhs_der: &[f64],
) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    let n = support.len();
    let m = interpolation_matrix(k, support, coeffs);
    let cond = condition_number(&m);
    if !(cond < MAX_CONDITION) {
        return Err(Error::Singular(format!("interpolation system condition estimate {cond:e}")));
    }
    let rhs = DVector::from_iterator(2 * n, rhs_val.iter().chain(rhs_der).copied());
    let sol = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Singular(format!("interpolation system singular (condition {cond:e})")))?;
    Ok((sol.rows(0, n).iter().copied().collect(), sol.rows(n, n).iter().copied().collect(), cond))
}

fn validate_support(support: &[f64], pairs: &[(f64, f64)], rho: &[f64]) -> Result<()> {
    if support.len() != pairs.len() || support.len() != rho.len() {
        return Err(Error::InvalidArgument("support, pairs and rho must have equal length".into()));
    }
    if support.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("support must be strictly increasing".into()));
    }
    if rho.iter().any(|r| ![-1.0, 0.0, 1.0].contains(r)) {
        return Err(Error::InvalidArgument("rho entries must be in {-1, 0, 1}".into()));
    }
    Ok(())
}

/// Solves [[𝓑, 𝓦], [𝓑', 𝓦']](α, β) = (ρ, 0) and expands to sample coefficients.
pub fn build_certificate(k: &KernelSpec, support: &[f64], pairs: &[(f64, f64)], rho: &[f64]) -> Result<Certificate> {
    validate_support(support, pairs, rho)?;
    let coeffs = support
        .iter()
        .zip(pairs)
        .map(|(&t, &(s1, s2))| bump_wave_coeffs(k, t, s1, s2))
        .collect::<Result<Vec<_>>>()?;
    let zeros = vec![0.0; support.len()];
    let (alpha, beta, condition) = solve_interpolation(k, support, &coeffs, rho, &zeros)?;
    Ok(assemble(support, pairs, coeffs, alpha, beta, rho.to_vec(), condition))
}

/// Bumps only: α solves 𝓑α = ρ, β = 0, derivative constraints dropped.
pub fn build_bumps_only(k: &KernelSpec, support: &[f64], pairs: &[(f64, f64)], rho: &[f64]) -> Result<Certificate> {
    validate_support(support, pairs, rho)?;
    let n = support.len();
    let coeffs = support
        .iter()
        .zip(pairs)
        .map(|(&t, &(s1, s2))| bump_wave_coeffs(k, t, s1, s2))
        .collect::<Result<Vec<_>>>()?;
    let m = DMatrix::from_fn(n, n, |r, c| eval_bump(&coeffs[c], k, support[r], 0));
    let condition = condition_number(&m);
    let alpha = m
        .lu()
        .solve(&DVector::from_column_slice(rho))
        .ok_or_else(|| Error::Singular("bump system singular".into()))?;
    Ok(assemble(support, pairs, coeffs, alpha.iter().copied().collect(), vec![0.0; n], rho.to_vec(), condition))
}

fn assemble(
    support: &[f64],
    pairs: &[(f64, f64)],
    coeffs: Vec<BumpWaveCoeffs>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    rho: Vec<f64>,
    condition: f64,
) -> Certificate {
    let mut samples = Vec::with_capacity(2 * support.len());
    let mut q = Vec::with_capacity(2 * support.len());
    for (j, c) in coeffs.iter().enumerate() {
        samples.push(c.s1);
        q.push(alpha[j] * c.b1 + beta[j] * c.w1);
        samples.push(c.s2);
        q.push(alpha[j] * c.b2 + beta[j] * c.w2);
    }
    Certificate {
        support: support.to_vec(),
        pairs: pairs.to_vec(),
        coeffs,
        alpha,
        beta,
        rho,
        samples,
        q,
        condition,
    }
}

/// Q^{(order)}(t) for Q(t) = Σ q_i K(s_i − t).
pub fn eval_combination(k: &KernelSpec, samples: &[f64], q: &[f64], t: f64, order: usize) -> f64 {
    samples.iter().zip(q).map(|(&s, &c)| c * k.shifted(s, t, order)).sum()
}

pub fn eval_q(cert: &Certificate, k: &KernelSpec, t: f64, order: usize) -> f64 {
    eval_combination(k, &cert.samples, &cert.q, t, order)
}

/// Σ α_j B_j(t) + β_j W_j(t); equals `eval_q` by construction.
pub fn eval_q_bumps(cert: &Certificate, k: &KernelSpec, t: f64, order: usize) -> f64 {
    cert.coeffs
        .iter()
        .enumerate()
        .map(|(j, c)| cert.alpha[j] * eval_bump(c, k, t, order) + cert.beta[j] * eval_wave(c, k, t, order))
        .sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    /// Continuum upper bound on |Q| off the exclusion balls (grid max + bridge).
    pub max_abs_q: f64,
    /// Largest |Q| at a grid node off the exclusion balls.
    pub grid_max: f64,
    pub worst_location: f64,
    pub grid_step: f64,
    /// Σ|q_i|·sup|K''| used to bridge between nodes.
    pub second_derivative_bound: f64,
    /// Bound on |Q| outside the evaluation window.
    pub tail_bound: f64,
    pub interpolation_residual: f64,
    /// max_j |Q'(t_j)|·σ.
    pub derivative_residual: f64,
    pub interpolation_ok: bool,
    pub concavity_ok: bool,
    pub bound_ok: bool,
    /// Spikes whose exclusion ball failed the concavity check.
    pub concavity_failures: Vec<f64>,
    /// Sparse mode: q_l = λρ'_l on 𝒩 and |q_l| < λ elsewhere.
    pub noise_conditions_ok: Option<bool>,
    pub max_clean_q: Option<f64>,
    pub pass: bool,
}

/// Interpolation residual tolerance.
pub const INTERP_TOL: f64 = 1e-8;

/// Grid-plus-bridge check of |Q| < 1 off the support for the combination
/// (samples, q) with targets rho at `support`.
pub fn verify_combination(
    k: &KernelSpec,
    samples: &[f64],
    q: &[f64],
    support: &[f64],
    rho: &[f64],
    grid_step: f64,
    excl_radius: f64,
) -> VerificationReport {
    let sigma = k.sigma;
    let l1: f64 = q.iter().map(|c| c.abs()).sum();
    let m2 = l1 * k.sup_abs(2);
    let m3 = l1 * k.sup_abs(3);
    let active: Vec<f64> = samples.iter().zip(q).filter(|(_, c)| **c != 0.0).map(|(s, _)| *s).collect();
    let lo_all = support.iter().chain(&active).copied().fold(f64::INFINITY, f64::min);
    let hi_all = support.iter().chain(&active).copied().fold(f64::NEG_INFINITY, f64::max);
    let (w_lo, w_hi) = (lo_all - 10.0 * sigma, hi_all + 10.0 * sigma);
    // every sample is at least 10σ away beyond the window; both kernels decay there
    let tail_bound = 2.0 * l1 * k.eval(10.0 * sigma, 0).abs().max(crate::kernels::k_norm(k.family, 10.0, 0).abs());

    let mut interp: f64 = 0.0;
    let mut deriv: f64 = 0.0;
    for (&t, &r) in support.iter().zip(rho) {
        interp = interp.max((eval_combination(k, samples, q, t, 0) - r).abs());
        deriv = deriv.max(eval_combination(k, samples, q, t, 1).abs() * sigma);
    }
    let interpolation_ok = interp < INTERP_TOL && deriv < INTERP_TOL;

    // exclusion balls only around ±1 targets
    let mut balls: Vec<(f64, f64, f64)> = support
        .iter()
        .zip(rho)
        .filter(|(_, r)| **r != 0.0)
        .map(|(&t, &r)| (t - excl_radius, t + excl_radius, r))
        .collect();
    balls.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut concavity_failures = Vec::new();
    for &(a, b, r) in &balls {
        let n = ((b - a) / grid_step).ceil().max(1.0) as usize;
        let h = (b - a) / n as f64;
        let mut worst = f64::NEG_INFINITY;
        for i in 0..=n {
            let t = a + h * i as f64;
            worst = worst.max(r * eval_combination(k, samples, q, t, 2));
        }
        if !(worst + 0.5 * h * m3 < 0.0) {
            concavity_failures.push(0.5 * (a + b));
        }
    }

    // off-support segments
    let mut segments = Vec::new();
    let mut cur = w_lo;
    for &(a, b, _) in &balls {
        if a > cur {
            segments.push((cur, a));
        }
        cur = cur.max(b);
    }
    if w_hi > cur {
        segments.push((cur, w_hi));
    }
    let mut grid_max: f64 = 0.0;
    let mut bound: f64 = 0.0;
    let mut worst_location = f64::NAN;
    let mut used_step: f64 = 0.0;
    for &(a, b) in &segments {
        let n = ((b - a) / grid_step).ceil().max(1.0) as usize;
        let h = (b - a) / n as f64;
        used_step = used_step.max(h);
        let bridge = h * h / 8.0 * m2;
        let mut prev = eval_combination(k, samples, q, a, 0).abs();
        if prev > grid_max {
            grid_max = prev;
            worst_location = a;
        }
        for i in 1..=n {
            let t = a + h * i as f64;
            let v = eval_combination(k, samples, q, t, 0).abs();
            if v > grid_max {
                grid_max = v;
                worst_location = t;
            }
            bound = bound.max(prev.max(v) + bridge);
            prev = v;
        }
    }
    let max_abs_q = bound.max(tail_bound);
    let bound_ok = max_abs_q < 1.0;
    let concavity_ok = concavity_failures.is_empty();
    VerificationReport {
        max_abs_q,
        grid_max,
        worst_location,
        grid_step: used_step,
        second_derivative_bound: m2,
        tail_bound,
        interpolation_residual: interp,
        derivative_residual: deriv,
        interpolation_ok,
        concavity_ok,
        bound_ok,
        concavity_failures,
        noise_conditions_ok: None,
        max_clean_q: None,
        pass: interpolation_ok && concavity_ok && bound_ok,
    }
}

/// Checks |Q(t)| < 1 off `support` (minus exclusion balls), interpolation, and
/// concavity inside each ball. Defaults: grid_step = 1e-3σ, excl_radius = 1e-2σ.
pub fn verify_certificate(
    cert: &Certificate,
    k: &KernelSpec,
    support: &[f64],
    grid_step: f64,
    excl_radius: f64,
) -> VerificationReport {
    verify_combination(k, &cert.samples, &cert.q, support, &cert.rho, grid_step, excl_radius)
}

/// K(s_i − t) − B_{s_i}(t, s_prev, s_next), order-th derivative in t.
pub fn dampened_kernel(k: &KernelSpec, s_i: f64, s_prev: f64, s_next: f64, t: f64, order: usize) -> Result<f64> {
    let c = bump_wave_coeffs(k, s_i, s_prev, s_next)?;
    Ok(k.shifted(s_i, t, order) - eval_bump(&c, k, t, order))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseCertificate {
    /// The Q_ℐ part; its α, β solve the system with right-hand side (ψ, ζ).
    pub base: Certificate,
    pub noise_indices: Vec<usize>,
    pub rho_prime: Vec<f64>,
    pub lambda: f64,
    /// Indices of 𝒞 (neighbours of each noise sample) in sample order.
    pub cancel_indices: Vec<usize>,
    /// Indices of ℐ (two nearest samples per spike).
    pub interp_indices: Vec<usize>,
    /// Full coefficient vector aligned with the sample set.
    pub q: Vec<f64>,
    pub psi: Vec<f64>,
    pub zeta: Vec<f64>,
}

/// Two samples nearest to each spike (ties to the left), as sorted index pairs.
fn nearest_pairs(locs: &[f64], support: &[f64]) -> Vec<(usize, usize)> {
    support
        .iter()
        .map(|&t| {
            let mut idx: Vec<usize> = (0..locs.len()).collect();
            idx.sort_by(|&a, &b| (locs[a] - t).abs().total_cmp(&(locs[b] - t).abs()).then(a.cmp(&b)));
            let (a, b) = (idx[0], idx[1]);
            (a.min(b), a.max(b))
        })
        .collect()
}

pub fn build_sparse_certificate(
    k: &KernelSpec,
    support: &[f64],
    s: &SampleSet,
    rho: &[f64],
    rho_prime: &[f64],
    lambda: f64,
) -> Result<SparseCertificate> {
    let locs = s.locations();
    let noise = s.noise_indices().to_vec();
    if rho_prime.len() != noise.len() {
        return Err(Error::InvalidArgument("rho_prime must have one entry per noise sample".into()));
    }
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument("lambda must be positive".into()));
    }
    if locs.len() < 2 {
        return Err(Error::InsufficientSamples("need at least two samples".into()));
    }
    let pairs_idx = nearest_pairs(locs, support);
    let mut interp: Vec<usize> = pairs_idx.iter().flat_map(|&(a, b)| [a, b]).collect();
    interp.sort_unstable();
    interp.dedup();
    let mut cancel = Vec::new();
    for &l in &noise {
        if l == 0 || l + 1 >= locs.len() {
            return Err(Error::Structure(format!("noise sample {l} lacks two neighbours")));
        }
        cancel.push(l - 1);
        cancel.push(l + 1);
    }
    cancel.sort_unstable();
    cancel.dedup();
    let overlap = |a: &[usize], b: &[usize]| a.iter().any(|i| b.binary_search(i).is_ok());
    if interp.len() != 2 * support.len()
        || cancel.len() != 2 * noise.len()
        || overlap(&cancel, &interp)
        || overlap(&noise, &interp)
        || overlap(&noise, &cancel)
    {
        return Err(Error::Structure(
            "need |I| = 2|T|, |C| = 2|N| and I, C, N pairwise disjoint".into(),
        ));
    }

    // dampened-kernel sum R_C and its bump coefficients on 𝒞
    let damp = noise
        .iter()
        .map(|&l| bump_wave_coeffs(k, locs[l], locs[l - 1], locs[l + 1]))
        .collect::<Result<Vec<_>>>()?;
    let r_c = |t: f64, order: usize| -> f64 {
        noise
            .iter()
            .zip(&damp)
            .zip(rho_prime)
            .map(|((&l, c), &rp)| lambda * rp * (k.shifted(locs[l], t, order) - eval_bump(c, k, t, order)))
            .sum()
    };
    let psi: Vec<f64> = support.iter().zip(rho).map(|(&t, &r)| r - r_c(t, 0)).collect();
    let zeta: Vec<f64> = support.iter().map(|&t| -r_c(t, 1)).collect();

    let pairs: Vec<(f64, f64)> = pairs_idx.iter().map(|&(a, b)| (locs[a], locs[b])).collect();
    validate_support(support, &pairs, rho)?;
    let coeffs = support
        .iter()
        .zip(&pairs)
        .map(|(&t, &(s1, s2))| bump_wave_coeffs(k, t, s1, s2))
        .collect::<Result<Vec<_>>>()?;
    let (alpha, beta, condition) = solve_interpolation(k, support, &coeffs, &psi, &zeta)?;
    let base = assemble(support, &pairs, coeffs, alpha, beta, rho.to_vec(), condition);

    let mut q = vec![0.0; locs.len()];
    for (j, &(a, b)) in pairs_idx.iter().enumerate() {
        q[a] += base.q[2 * j];
        q[b] += base.q[2 * j + 1];
    }
    for ((&l, c), &rp) in noise.iter().zip(&damp).zip(rho_prime) {
        q[l] = lambda * rp;
        q[l - 1] -= lambda * rp * c.b1;
        q[l + 1] -= lambda * rp * c.b2;
    }
    Ok(SparseCertificate {
        base,
        noise_indices: noise,
        rho_prime: rho_prime.to_vec(),
        lambda,
        cancel_indices: cancel,
        interp_indices: interp,
        q,
        psi,
        zeta,
    })
}

/// Q(t) for the full sparse combination.
pub fn eval_sparse_q(sc: &SparseCertificate, k: &KernelSpec, s: &SampleSet, t: f64, order: usize) -> f64 {
    eval_combination(k, s.locations(), &sc.q, t, order)
}

pub fn verify_sparse_certificate(
    sc: &SparseCertificate,
    k: &KernelSpec,
    support: &[f64],
    s: &SampleSet,
    grid_step: f64,
    excl_radius: f64,
) -> VerificationReport {
    let mut rep = verify_combination(k, s.locations(), &sc.q, support, &sc.base.rho, grid_step, excl_radius);
    let mut noise_ok = true;
    let mut max_clean: f64 = 0.0;
    for (i, &qi) in sc.q.iter().enumerate() {
        match sc.noise_indices.iter().position(|&l| l == i) {
            Some(p) => noise_ok &= qi == sc.lambda * sc.rho_prime[p],
            None => max_clean = max_clean.max(qi.abs()),
        }
    }
    noise_ok &= max_clean < sc.lambda;
    rep.noise_conditions_ok = Some(noise_ok);
    rep.max_clean_q = Some(max_clean);
    rep.pass &= noise_ok;
    rep
}
