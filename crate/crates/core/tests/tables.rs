use deconv_core::bound::tables::{DEFAULT_T_WIDTH, T_MAX};
use deconv_core::{
    block_norm_bounds, bump_wave_coeffs, damp_tables, dampened_kernel, eval_bump, eval_wave, monotonize, piecewise_tables,
    BoundConfig, BoundTable, KernelFamily, KernelSpec, TableSpec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Relative slack for the 1e-13-per-operation rounding model.
const SLACK: f64 = 1e-9;

fn dominates(bound: f64, v: f64) -> bool {
    v <= bound + SLACK * (1.0 + bound.abs())
}

/// Draws (t, s1, s2) uniformly from the admissible set of `spec`.
fn admissible<R: Rng>(r: &mut R, spec: &TableSpec) -> (f64, f64, f64) {
    loop {
        let (a, b) = (r.random_range(-spec.gamma..=spec.gamma), r.random_range(-spec.gamma..=spec.gamma));
        let (s1, s2) = (a.min(b), a.max(b));
        let gap = s2 - s1;
        if gap < spec.kappa || spec.max_gap.is_some_and(|m| gap > m) || (spec.straddle && !(s1 <= 0.0 && s2 >= 0.0)) {
            continue;
        }
        return (r.random_range(0.0..T_MAX), s1, s2);
    }
}

fn check_domination(spec: &TableSpec, table: &BoundTable, n: usize, seed: u64) {
    let k = KernelSpec::new(spec.family, 1.0).unwrap();
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0;
    for _ in 0..n {
        let (t, s1, s2) = admissible(&mut r, spec);
        let c = bump_wave_coeffs(&k, 0.0, s1, s2).unwrap();
        let j = table.cell_of(t);
        for i in 0..3 {
            let (b, w) = (eval_bump(&c, &k, t, i), eval_wave(&c, &k, t, i));
            let ok = dominates(table.abs_b[i][j], b.abs())
                && dominates(table.abs_w[i][j], w.abs())
                && dominates(table.sgn_b[i][j], b)
                && dominates(table.mono_b[i][j], b.abs())
                && dominates(table.mono_w[i][j], w.abs());
            if !ok {
                violations += 1;
                eprintln!("violation: order {i}, t = {t}, s = ({s1}, {s2}), B = {b}, W = {w}");
            }
        }
    }
    assert_eq!(violations, 0);
}

#[test]
fn gaussian_tables_dominate_pointwise_values() {
    let spec = BoundConfig::new(KernelFamily::Gaussian, 3.0, 0.5, 0.05).coarsened(4.0).table_spec();
    let table = piecewise_tables(&spec).unwrap();
    check_domination(&spec, &table, 10_000, 11);
    // B(0) = 1 is attained in the first cell
    assert!(table.abs_b[0][0] >= 1.0);
}

#[test]
fn ricker_tables_dominate_pointwise_values() {
    let spec = BoundConfig::new(KernelFamily::Ricker, 4.7, 0.3, 0.05).coarsened(4.0).table_spec();
    let table = piecewise_tables(&spec).unwrap();
    check_domination(&spec, &table, 10_000, 12);
}

#[test]
fn uniform_grid_tables_dominate_pointwise_values() {
    let mut spec = TableSpec::uniform_grid(KernelFamily::Gaussian, 0.1, 0.2);
    spec.sample_width *= 4.0;
    spec.t_width *= 4.0;
    let table = piecewise_tables(&spec).unwrap();
    check_domination(&spec, &table, 10_000, 13);
}

#[test]
fn damp_tables_dominate_pointwise_values() {
    for (fam, tau1, tau2) in [(KernelFamily::Gaussian, 0.065, 0.2375), (KernelFamily::Ricker, 0.0775, 0.165)] {
        let w = 4.0 * DEFAULT_T_WIDTH;
        let d = damp_tables(fam, tau1, tau2, w, 0.01, 2).unwrap();
        let k = KernelSpec::new(fam, 1.0).unwrap();
        let mut r = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..10_000 {
            let tau = r.random_range(tau1..=tau2);
            let t = r.random_range(0.0..T_MAX);
            let j = ((t / w) as usize).min(d.abs_d[0].len() - 1);
            for i in 0..3 {
                let v = dampened_kernel(&k, 0.0, -tau, tau, t, i).unwrap().abs();
                assert!(dominates(d.abs_d[i][j], v), "{fam:?} D^({i})({t}; {tau}) = {v} > {}", d.abs_d[i][j]);
                assert!(dominates(d.mono_d[i][j], v));
            }
        }
    }
}

/// Beyond the first few neighbours, bumps and waves sum to less than ε.
#[test]
fn tail_sums_below_epsilon() {
    let mut r = ChaCha8Rng::seed_from_u64(15);
    for fam in [KernelFamily::Gaussian, KernelFamily::Ricker] {
        let k = KernelSpec::new(fam, 1.0).unwrap();
        let spec = TableSpec::new(fam, 0.4, 0.05);
        let eps = 1e-12 / spec.kappa;
        for _ in 0..2000 {
            let (_, s1, s2) = admissible(&mut r, &spec);
            let c = bump_wave_coeffs(&k, 0.0, s1, s2).unwrap();
            let delta = r.random_range(2.0..6.0);
            for i in 0..3 {
                let sum: f64 = (6..=50)
                    .map(|j| {
                        let t = j as f64 * delta - delta / 2.0;
                        eval_bump(&c, &k, t, i).abs() + eval_wave(&c, &k, t, i).abs()
                    })
                    .sum();
                assert!(sum <= eps, "{fam:?} order {i}, Δ = {delta}: tail {sum:e}");
            }
        }
    }
}

#[test]
fn monotonized_tables_are_non_increasing_and_floored() {
    let spec = BoundConfig::new(KernelFamily::Gaussian, 3.0, 0.3, 0.05).coarsened(8.0).table_spec();
    let table = piecewise_tables(&spec).unwrap();
    for i in 0..3 {
        for m in [&table.mono_b[i], &table.mono_w[i]] {
            assert!(m.windows(2).all(|w| w[0] >= w[1]));
            assert!(m.iter().all(|&v| v >= table.eps));
        }
        assert_eq!(table.mono_b[i], monotonize(&table.abs_b[i], table.eps));
    }
    // bounds from the lookup are ε beyond the table
    assert_eq!(table.smo_b(0, T_MAX + 1.0), table.eps);
}

#[test]
fn block_norms_are_monotone_in_delta_and_vanish_far_out() {
    let spec = BoundConfig::new(KernelFamily::Gaussian, 3.0, 0.2, 0.05).coarsened(8.0).table_spec();
    let table = piecewise_tables(&spec).unwrap();
    let mut prev = block_norm_bounds(&table, 2.0);
    for k in 1..=40 {
        let d = 2.0 + 0.25 * k as f64;
        let n = block_norm_bounds(&table, d);
        assert!(n.i_b <= prev.i_b && n.w <= prev.w && n.b1 <= prev.b1 && n.i_w1 <= prev.i_w1, "Δ = {d}");
        prev = n;
    }
    let far = block_norm_bounds(&table, 10.0);
    for v in [far.i_b, far.w, far.b1, far.i_w1] {
        assert!(v <= 12.0 * table.eps, "{v:e}");
    }
    assert!(block_norm_bounds(&table, 4.0).i_w1 < 1.0);
}
