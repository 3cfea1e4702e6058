//! Grid ℓ1 programs: basis pursuit, BPDN and the sparse-noise program, all
//! solved by one primal-dual splitting core
//!
//!   minimize Σ_j c_j |z_j|   subject to   ‖M z − y‖₂ ≤ r
//!
//! with M = A (c = 1) or M = [A  I] (c = (1, λ)). Equality constraints use a
//! tiny ball; equality programs run on row-whitened data. Once the iterates settle, an active-set polish re-solves the
//! problem restricted to the detected support and accepts the result only if
//! the KKT conditions hold.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub max_iters: usize,
    /// Combined relative primal/dual/gap residual for stopping.
    pub tol: f64,
    /// Fraction of the stability limit τσ‖M‖² < 1 used for the steps.
    pub step_fraction: f64,
    /// Relative ball radius used for equality constraints.
    pub equality_radius: f64,
    /// Relative threshold for support extraction (|x_j| < thr·‖x‖∞ → 0).
    pub support_threshold: f64,
    /// Iterations between residual checks / polish attempts.
    pub check_every: usize,
    pub polish: bool,
    /// Amplitude error threshold used by `exact_recovery`.
    pub recovery_rel_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            max_iters: 200_000,
            tol: 1e-8,
            step_fraction: 0.95,
            equality_radius: 1e-9,
            support_threshold: 1e-7,
            check_every: 100,
            polish: true,
            recovery_rel_tol: 1e-4,
        }
    }
}

impl SolveOptions {
    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.equality_radius > 0.0 && self.support_threshold > 0.0 && self.recovery_rel_tol > 0.0)
        {
            return Err(Error::InvalidArgument("solver tolerances must be positive".into()));
        }
        if !(self.step_fraction > 0.0 && self.step_fraction < 1.0) {
            return Err(Error::InvalidArgument("step_fraction must lie in (0,1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Program {
    BasisPursuit,
    Bpdn { xi_bar: f64 },
    SparseBp { lambda: f64 },
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub x: Vec<f64>,
    /// Sparse-noise estimate (sparse program only).
    pub w: Option<Vec<f64>>,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    /// True when the final point came from the active-set polish.
    pub polished: bool,
    /// Dual vector: A^T q ∈ ∂‖x‖₁ at optimality.
    pub q: Vec<f64>,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub program: Program,
}

impl SolveResult {
    /// x with entries below support_threshold·‖x‖∞ set to zero.
    pub fn support_cleaned(&self, thr: f64) -> Vec<f64> {
        clean(&self.x, thr)
    }
}

fn clean(v: &[f64], thr: f64) -> Vec<f64> {
    let m = v.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    v.iter().map(|&a| if a.abs() < thr * m { 0.0 } else { a }).collect()
}

struct Problem<'a> {
    a: &'a DMatrix<f64>,
    /// Appends an identity block when set.
    noise_block: bool,
    /// ℓ1 weight on columns from `nx` on (the noise block).
    lambda: f64,
    /// Number of signal columns (weight 1).
    nx: usize,
    y: DVector<f64>,
    radius: f64,
}

impl Problem<'_> {
    fn n(&self) -> usize {
        self.a.ncols() + if self.noise_block { self.a.nrows() } else { 0 }
    }
    fn weight(&self, j: usize) -> f64 {
        if j < self.nx {
            1.0
        } else {
            self.lambda
        }
    }
    fn apply(&self, z: &DVector<f64>) -> DVector<f64> {
        let nx = self.a.ncols();
        let mut out = self.a * z.rows(0, nx);
        if self.noise_block {
            out += z.rows(nx, self.a.nrows());
        }
        out
    }
    fn apply_t(&self, u: &DVector<f64>) -> DVector<f64> {
        let at = self.a.tr_mul(u);
        if self.noise_block {
            let mut out = DVector::zeros(self.n());
            out.rows_mut(0, self.a.ncols()).copy_from(&at);
            out.rows_mut(self.a.ncols(), self.a.nrows()).copy_from(u);
            out
        } else {
            at
        }
    }
    fn column(&self, j: usize) -> DVector<f64> {
        if j < self.a.ncols() {
            self.a.column(j).into_owned()
        } else {
            let mut e = DVector::zeros(self.a.nrows());
            e[j - self.a.ncols()] = 1.0;
            e
        }
    }
    fn objective(&self, z: &DVector<f64>) -> f64 {
        z.iter().enumerate().map(|(j, v)| self.weight(j) * v.abs()).sum()
    }
    /// q^T y − r‖q‖: dual objective of the ball-constrained program.
    fn dual_objective(&self, q: &DVector<f64>) -> f64 {
        q.dot(&self.y) - self.radius * q.norm()
    }
    /// max_j |(M^T q)_j| / c_j.
    fn dual_scale(&self, q: &DVector<f64>) -> f64 {
        self.apply_t(q).iter().enumerate().map(|(j, v)| v.abs() / self.weight(j)).fold(0.0, f64::max)
    }
}

fn power_norm(p: &Problem) -> f64 {
    let n = p.n();
    // deterministic start vector
    let mut v = DVector::from_fn(n, |j, _| 1.0 + 0.1 * ((j * 7919) % 13) as f64);
    v /= v.norm();
    let mut s = 0.0;
    for _ in 0..200 {
        let w = p.apply_t(&p.apply(&v));
        let nw = w.norm();
        if nw == 0.0 {
            return 0.0;
        }
        let s_new = nw.sqrt();
        v = w / nw;
        if (s_new - s).abs() <= 1e-10 * s_new {
            s = s_new;
            break;
        }
        s = s_new;
    }
    // guard against underestimating the top singular value
    s * 1.01
}

fn project_ball(v: &DVector<f64>, c: &DVector<f64>, r: f64) -> DVector<f64> {
    let d = v - c;
    let nd = d.norm();
    if nd <= r {
        v.clone()
    } else {
        c + d * (r / nd)
    }
}

struct Residuals {
    primal: f64,
    dual: f64,
    gap: f64,
}

impl Residuals {
    fn max(&self) -> f64 {
        self.primal.max(self.dual).max(self.gap)
    }
}

/// Relative KKT residuals at (z, q) with q the (unscaled) dual estimate.
fn residuals(p: &Problem, z: &DVector<f64>, q: &DVector<f64>) -> Residuals {
    let ynorm = p.y.norm().max(1e-300);
    let res = (p.apply(z) - &p.y).norm();
    let primal = (res - p.radius).max(0.0) / (1.0 + ynorm);
    let mtq = p.apply_t(q);
    let mut dual: f64 = 0.0;
    for j in 0..p.n() {
        let c = p.weight(j);
        let g = mtq[j];
        // distance of M^T q to the subdifferential c·∂|z_j|
        let d = if z[j] > 0.0 {
            (g - c).abs()
        } else if z[j] < 0.0 {
            (g + c).abs()
        } else {
            (g.abs() - c).max(0.0)
        };
        dual = dual.max(d / c);
    }
    let po = p.objective(z);
    let dobj = p.dual_objective(q);
    let gap = (po - dobj).abs() / (1.0 + po.abs() + dobj.abs());
    Residuals { primal, dual, gap }
}

/// Active-set polish: exact solve on the support of `z`, accepted only if
/// signs are consistent and the repaired dual is feasible.
fn polish(p: &Problem, z: &DVector<f64>, q_hint: &DVector<f64>, thr: f64) -> Option<(DVector<f64>, DVector<f64>)> {
    let zmax = z.amax();
    if zmax == 0.0 {
        return None;
    }
    let support: Vec<usize> = (0..p.n()).filter(|&j| z[j].abs() >= thr * zmax).collect();
    let m = p.y.len();
    if support.is_empty() || support.len() > m {
        return None;
    }
    let ms = DMatrix::from_columns(&support.iter().map(|&j| p.column(j)).collect::<Vec<_>>());
    let sign = DVector::from_iterator(support.len(), support.iter().map(|&j| z[j].signum() * p.weight(j)));
    let gram = ms.tr_mul(&ms);
    let chol = gram.clone().cholesky()?;
    // least-squares fit on the support
    let x_ls = chol.solve(&ms.tr_mul(&p.y));
    let r_ls = &p.y - &ms * &x_ls;
    let (xs, q) = if r_ls.norm() <= p.radius {
        // d(r) = M_S G^{-1} sign; moving along it lowers the objective until the ball binds
        let g_inv_sign = chol.solve(&sign);
        let d = &ms * &g_inv_sign;
        let dn = d.norm();
        let slack = (p.radius * p.radius - r_ls.norm_squared()).max(0.0).sqrt();
        if dn == 0.0 {
            return None;
        }
        let step = slack / dn;
        let xs = &x_ls - &g_inv_sign * step;
        let resid = &p.y - &ms * &xs;
        let rn = resid.norm();
        let q = if p.radius > 1e-6 * p.y.norm() && rn > 0.0 {
            // BPDN: q = μ r with M_S^T q = sign
            let mu = 1.0 / step;
            resid * mu
        } else {
            // equality-type: closest q to the iterate's dual with M_S^T q = sign
            let corr = chol.solve(&(&sign - ms.tr_mul(q_hint)));
            q_hint + &ms * corr
        };
        (xs, q)
    } else {
        return None;
    };
    for (k, &j) in support.iter().enumerate() {
        if xs[k] == 0.0 || xs[k].signum() != z[j].signum() {
            return None;
        }
    }
    if p.dual_scale(&q) > 1.0 + 1e-9 {
        return None;
    }
    let mut zp = DVector::zeros(p.n());
    for (k, &j) in support.iter().enumerate() {
        zp[j] = xs[k];
    }
    Some((zp, q))
}

fn run(p: &Problem, opts: &SolveOptions, program: Program) -> Result<SolveResult> {
    opts.validate()?;
    let n = p.n();
    let m = p.y.len();
    let nx = p.nx;
    let finish = |z: DVector<f64>, q: DVector<f64>, it: usize, converged: bool, polished: bool| {
        let r = residuals(p, &z, &q);
        let objective = p.objective(&z);
        let x = z.rows(0, nx).iter().copied().collect();
        let w = if nx < n { Some(z.rows(nx, n - nx).iter().copied().collect()) } else { None };
        SolveResult {
            x,
            w,
            objective,
            iterations: it,
            converged,
            polished,
            q: q.iter().copied().collect(),
            primal_residual: r.primal,
            dual_residual: r.dual,
            program,
        }
    };
    // zero is optimal whenever it is feasible
    if p.y.norm() <= p.radius {
        return Ok(finish(DVector::zeros(n), DVector::zeros(m), 0, true, false));
    }
    let l = power_norm(p);
    if l == 0.0 {
        return Err(Error::Infeasible("zero design matrix with nonzero data".into()));
    }
    // primal weight ω balances the two step sizes, τ = s/ω, σ = s·ω
    let s = opts.step_fraction / l;
    let mut omega = 1.0;
    let mut z = DVector::<f64>::zeros(n);
    let mut u = DVector::<f64>::zeros(m);
    let mut mtu = DVector::<f64>::zeros(n);
    let mut z_avg = z.clone();
    let mut u_avg = u.clone();
    let mut avg_count = 0usize;
    let mut z_restart = z.clone();
    let mut u_restart = u.clone();
    let mut last_restart_kkt = f64::INFINITY;
    let mut since_restart = 0usize;
    let mut best = (f64::INFINITY, z.clone(), u.clone());

    for it in 1..=opts.max_iters {
        let tau = s / omega;
        let sig = s * omega;
        let mut z_new = &z - &mtu * tau;
        for j in 0..n {
            let t = tau * p.weight(j);
            let v = z_new[j];
            z_new[j] = if v > t {
                v - t
            } else if v < -t {
                v + t
            } else {
                0.0
            };
        }
        let z_bar = &z_new * 2.0 - &z;
        let v = &u + p.apply(&z_bar) * sig;
        let proj = project_ball(&(&v / sig), &p.y, p.radius);
        let u_new = &v - proj * sig;
        z = z_new;
        u = u_new;
        mtu = p.apply_t(&u);
        z_avg += (&z - &z_avg) / (avg_count + 1) as f64;
        u_avg += (&u - &u_avg) / (avg_count + 1) as f64;
        avg_count += 1;
        since_restart += 1;

        if it % opts.check_every == 0 || it == opts.max_iters {
            let q = -&u;
            let r_cur = residuals(p, &z, &q);
            let q_avg = -&u_avg;
            let r_avg = residuals(p, &z_avg, &q_avg);
            let (kkt, use_avg) = if r_avg.max() < r_cur.max() { (r_avg.max(), true) } else { (r_cur.max(), false) };
            if kkt < best.0 {
                best = if use_avg { (kkt, z_avg.clone(), u_avg.clone()) } else { (kkt, z.clone(), u.clone()) };
            }
            if opts.polish {
                let (zc, qc) = if use_avg { (&z_avg, &q_avg) } else { (&z, &q) };
                if let Some((zp, qp)) = polish(p, zc, qc, opts.support_threshold) {
                    let rp = residuals(p, &zp, &qp);
                    if rp.max() < opts.tol {
                        return Ok(finish(zp, qp, it, true, true));
                    }
                }
            }
            if kkt < opts.tol {
                let (zf, uf) = if use_avg { (z_avg.clone(), u_avg.clone()) } else { (z.clone(), u.clone()) };
                return Ok(finish(zf, -uf, it, true, false));
            }
            // adaptive restart to the better of current/average iterate
            let artificial = since_restart as f64 >= 0.36 * it as f64;
            if kkt <= 0.2 * last_restart_kkt || artificial {
                let (zr, ur) = if use_avg { (z_avg.clone(), u_avg.clone()) } else { (z.clone(), u.clone()) };
                let dz = (&zr - &z_restart).norm();
                let du = (&ur - &u_restart).norm();
                if dz > 1e-14 && du > 1e-14 {
                    // smoothed primal-weight update
                    omega = (0.5 * (du / dz).ln() + 0.5 * omega.ln()).exp();
                }
                z = zr;
                u = ur;
                mtu = p.apply_t(&u);
                z_restart = z.clone();
                u_restart = u.clone();
                z_avg = z.clone();
                u_avg = u.clone();
                avg_count = 0;
                since_restart = 0;
                last_restart_kkt = kkt;
            }
        }
    }
    let (_, zb, ub) = best;
    Ok(finish(zb, -ub, opts.max_iters, false, false))
}

fn check_inputs(a: &DMatrix<f64>, y: &[f64]) -> Result<()> {
    if a.nrows() != y.len() {
        return Err(Error::InvalidArgument(format!("A has {} rows but y has {}", a.nrows(), y.len())));
    }
    if a.ncols() == 0 {
        return Err(Error::InvalidArgument("empty design matrix".into()));
    }
    if y.iter().any(|v| !v.is_finite()) || a.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite input".into()));
    }
    Ok(())
}

/// minimize ‖x‖₁ subject to A x = y.
pub fn basis_pursuit(a: &DMatrix<f64>, y: &[f64], opts: &SolveOptions) -> Result<SolveResult> {
    check_inputs(a, y)?;
    let yv = DVector::from_column_slice(y);
    let radius = opts.equality_radius * yv.norm();
    let p = Problem { a, noise_block: false, lambda: 1.0, nx: a.ncols(), y: yv, radius };
    let r = solve_whitened(&p, a, opts, Program::BasisPursuit)?;
    infeasibility_check(&p, &r)?;
    Ok(r)
}

/// Runs `p` (an equality-type program with operator `m`) on row-whitened
/// data when that is numerically safe; results are reported for `p`.
fn solve_whitened(p: &Problem, m: &DMatrix<f64>, opts: &SolveOptions, program: Program) -> Result<SolveResult> {
    let Some(w) = whiten(m, &p.y) else {
        return run(p, opts, program);
    };
    // ‖Vᵀz − ỹ‖ ≤ r/s_max implies ‖Mz − y‖ ≤ r
    let pw = Problem { a: &w.vt, noise_block: false, lambda: p.lambda, nx: p.nx, y: w.y, radius: p.radius / w.s_max };
    let mut r = run(&pw, opts, program)?;
    let q = &w.u_sinv * DVector::from_column_slice(&r.q);
    let mut z = r.x.clone();
    z.extend(r.w.iter().flatten());
    let res = residuals(p, &DVector::from_vec(z), &q);
    r.q = q.iter().copied().collect();
    r.primal_residual = res.primal;
    r.dual_residual = res.dual;
    Ok(r)
}

/// Row-whitened equality constraint: A = U S Vᵀ turns Ax = y into
/// Vᵀx = S⁻¹Uᵀy, whose operator has orthonormal rows.
struct Whitened {
    vt: DMatrix<f64>,
    y: DVector<f64>,
    /// U S⁻¹, mapping whitened duals back: Aᵀ(U S⁻¹ q̃) = V q̃.
    u_sinv: DMatrix<f64>,
    s_max: f64,
}

/// Largest condition number for which whitening is trusted.
const WHITEN_MAX_COND: f64 = 1e8;

fn whiten(a: &DMatrix<f64>, y: &DVector<f64>) -> Option<Whitened> {
    let m = a.nrows();
    if m > a.ncols() {
        return None;
    }
    let svd = a.clone().svd(true, true);
    let (u, vt) = (svd.u?, svd.v_t?);
    let s = svd.singular_values;
    let s_max = s.max();
    let s_min = s.min();
    if !(s_min > 0.0 && s_max / s_min <= WHITEN_MAX_COND) {
        return None;
    }
    let sinv = DVector::from_iterator(m, s.iter().map(|v| 1.0 / v));
    let y = (u.tr_mul(y)).component_mul(&sinv);
    let u_sinv = &u * DMatrix::from_diagonal(&sinv);
    Some(Whitened { vt, y, u_sinv, s_max })
}

/// minimize ‖x‖₁ subject to ‖A x − y‖₂ ≤ ξ̄.
pub fn bpdn(a: &DMatrix<f64>, y: &[f64], xi_bar: f64, opts: &SolveOptions) -> Result<SolveResult> {
    check_inputs(a, y)?;
    if !(xi_bar > 0.0) {
        return Err(Error::InvalidArgument(format!("xi_bar must be positive, got {xi_bar}")));
    }
    let p = Problem { a, noise_block: false, lambda: 1.0, nx: a.ncols(), y: DVector::from_column_slice(y), radius: xi_bar };
    run(&p, opts, Program::Bpdn { xi_bar })
}

/// minimize ‖x‖₁ + λ‖w‖₁ subject to A x + w = y.
pub fn sparse_bp(a: &DMatrix<f64>, y: &[f64], lambda: f64, opts: &SolveOptions) -> Result<SolveResult> {
    check_inputs(a, y)?;
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument(format!("lambda must be positive, got {lambda}")));
    }
    let yv = DVector::from_column_slice(y);
    let radius = opts.equality_radius * yv.norm();
    let p = Problem { a, noise_block: true, lambda, nx: a.ncols(), y: yv, radius };
    let full = DMatrix::from_fn(a.nrows(), a.ncols() + a.nrows(), |i, j| {
        if j < a.ncols() {
            a[(i, j)]
        } else if j - a.ncols() == i {
            1.0
        } else {
            0.0
        }
    });
    solve_whitened(&p, &full, opts, Program::SparseBp { lambda })
}

/// A y outside the range of A leaves a residual the iterations cannot close.
fn infeasibility_check(p: &Problem, r: &SolveResult) -> Result<()> {
    if r.converged {
        return Ok(());
    }
    let x = DVector::from_column_slice(&r.x);
    let res = (p.a * x - &p.y).norm();
    let svd = p.a.clone().svd(true, true);
    let ls = svd.solve(&p.y, 1e-12).ok();
    if let Some(ls) = ls {
        let best = (p.a * ls - &p.y).norm();
        if best > 1e-6 * p.y.norm().max(1.0) && res > 1e-6 * p.y.norm().max(1.0) {
            return Err(Error::Infeasible(format!(
                "y is not in the range of A (least-squares residual {best:e})"
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct KktReport {
    /// max_j |(A^T q)_j|.
    pub max_dual_response: f64,
    /// max(0, max_j |(A^T q)_j| − 1, ‖q‖∞ − λ).
    pub dual_violation: f64,
    pub q_inf: f64,
    pub lambda: Option<f64>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub duality_gap: f64,
    /// Largest |(A^T q)_j − sign(x_j)| over the support (and λ-scaled for w).
    pub complementary_slackness: f64,
    pub primal_residual: f64,
}

impl KktReport {
    pub fn optimal(&self, gap_tol: f64, feas_tol: f64) -> bool {
        self.duality_gap < gap_tol && self.dual_violation < feas_tol
    }
}

pub fn kkt_report(a: &DMatrix<f64>, y: &[f64], result: &SolveResult) -> KktReport {
    let q = DVector::from_column_slice(&result.q);
    let yv = DVector::from_column_slice(y);
    let x = DVector::from_column_slice(&result.x);
    let atq = a.tr_mul(&q);
    let max_resp = atq.amax();
    let q_inf = q.amax();
    let mut fitted = a * &x;
    let mut primal = x.lp_norm(1);
    let mut slack: f64 = 0.0;
    for j in 0..x.len() {
        if x[j] != 0.0 {
            slack = slack.max((atq[j] - x[j].signum()).abs());
        }
    }
    let (lambda, radius) = match result.program {
        Program::BasisPursuit => (None, 0.0),
        Program::Bpdn { xi_bar } => (None, xi_bar),
        Program::SparseBp { lambda } => (Some(lambda), 0.0),
    };
    let mut violation = (max_resp - 1.0).max(0.0);
    if let (Some(l), Some(w)) = (lambda, &result.w) {
        violation = violation.max(q_inf - l);
        for (i, &wi) in w.iter().enumerate() {
            fitted[i] += wi;
            primal += l * wi.abs();
            if wi != 0.0 {
                slack = slack.max((q[i] - l * wi.signum()).abs() / l);
            }
        }
    }
    let dual = q.dot(&yv) - radius * q.norm();
    let res = (fitted - &yv).norm();
    KktReport {
        max_dual_response: max_resp,
        dual_violation: violation.max(0.0),
        q_inf,
        lambda,
        primal_objective: primal,
        dual_objective: dual,
        duality_gap: primal - dual,
        complementary_slackness: slack,
        primal_residual: (res - radius).max(0.0),
    }
}

/// Relative ℓ2 error ‖x̂ − x‖/‖x‖ (absolute if x = 0).
pub fn relative_error(estimate: &[f64], truth: &[f64]) -> f64 {
    let num: f64 = estimate.iter().zip(truth).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let den: f64 = truth.iter().map(|b| b * b).sum::<f64>().sqrt();
    if den == 0.0 {
        num
    } else {
        num / den
    }
}
