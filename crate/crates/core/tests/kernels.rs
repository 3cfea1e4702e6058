use deconv_core::kernels::denom_norm;
use deconv_core::{bump_wave_coeffs, eval_bump, eval_wave, kernel_eval, KernelFamily, KernelSpec};
use proptest::prelude::*;

const FAMILIES: [KernelFamily; 2] = [KernelFamily::Gaussian, KernelFamily::Ricker];

fn family() -> impl Strategy<Value = KernelFamily> {
    prop_oneof![Just(KernelFamily::Gaussian), Just(KernelFamily::Ricker)]
}

/// (σ, t_i, u1, u2): sample offsets in units of σ, |u| ≤ 0.6, gap ≥ 0.05.
fn config() -> impl Strategy<Value = (f64, f64, f64, f64)> {
    (0.05f64..5.0, -3.0f64..3.0, -0.6f64..0.55, 0.05f64..0.6)
        .prop_map(|(sigma, t, u1, gap)| (sigma, t, u1, (u1 + gap).min(0.6)))
        .prop_filter("gap", |(_, _, u1, u2)| u2 - u1 >= 0.05)
}

// mpmath, 30 digits: direct 2×2 solve, σ = 1, spike at 0
const ORACLE: [(KernelFamily, f64, f64, f64, f64, f64, f64); 6] = [
    (KernelFamily::Gaussian, -0.3, 0.25, 1.3, 0.456481554514584, 0.55215597382244136, -0.5520143228322761),
    (KernelFamily::Gaussian, 0.05, 0.3, 0.7, 0.77958001191271122, 0.62008468114951751, -0.55500727855614062),
    (KernelFamily::Gaussian, -0.45, -0.1, 2.2, 0.082309860750814381, 0.1094859119442832, -0.18600855968928438),
    (KernelFamily::Ricker, -0.3, 0.25, 1.3, -0.25989230281209065, 0.24879751859661626, -0.79667855709595813),
    (KernelFamily::Ricker, 0.05, 0.3, 0.7, 0.39091097105136563, 0.52162607789188216, -1.3904097848946366),
    (KernelFamily::Ricker, -0.45, -0.1, 2.2, -0.32336047585529137, -0.046779346822214892, 0.36499142776802878),
];

#[test]
fn bump_and_wave_match_oracle() {
    for &(fam, s1, s2, t, b, w, bp) in &ORACLE {
        let k = KernelSpec::new(fam, 1.0).unwrap();
        let c = bump_wave_coeffs(&k, 0.0, s1, s2).unwrap();
        assert!((eval_bump(&c, &k, t, 0) - b).abs() < 1e-12, "{fam:?} B({t})");
        assert!((eval_wave(&c, &k, t, 0) - w).abs() < 1e-12, "{fam:?} W({t})");
        assert!((eval_bump(&c, &k, t, 1) - bp).abs() < 1e-12, "{fam:?} B'({t})");
    }
}

#[test]
fn ricker_denominator_floor() {
    // 3 − 4a² + a⁴ at a = 0.8
    let floor: f64 = 3.0 - 4.0 * 0.64 + 0.4096;
    assert!((floor - 0.8496).abs() < 1e-12);
    let n = 400;
    for i in 0..=n {
        for j in 0..=n {
            let x = -0.8 + 1.6 * i as f64 / n as f64;
            let y = -0.8 + 1.6 * j as f64 / n as f64;
            let f = 3.0 - (x - y) * (x - y) + x * x * y * y;
            assert!(f >= floor - 1e-12, "f({x}, {y}) = {f}");
            if x != y {
                let d = denom_norm(KernelFamily::Ricker, x.min(y), x.max(y));
                assert!(d > 0.0);
            }
        }
    }
}

#[test]
fn kernel_derivatives_match_finite_differences() {
    let h = 1e-5;
    for fam in FAMILIES {
        let k = KernelSpec::new(fam, 0.7).unwrap();
        for i in 0..200 {
            let t = -4.0 + 8.0 * i as f64 / 199.0;
            for order in 1..=fam.max_order() {
                let fd = (kernel_eval(&k, t + h, order - 1).unwrap() - kernel_eval(&k, t - h, order - 1).unwrap()) / (2.0 * h);
                let an = kernel_eval(&k, t, order).unwrap();
                assert!((fd - an).abs() < 1e-6 * (1.0 + an.abs()) / k.sigma.powi(order as i32), "{fam:?} order {order} at {t}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn interpolation_identities((sigma, ti, u1, u2) in config(), fam in family()) {
        let k = KernelSpec::new(fam, sigma).unwrap();
        let c = bump_wave_coeffs(&k, ti, ti + u1 * sigma, ti + u2 * sigma).unwrap();
        let tol = if fam == KernelFamily::Gaussian { 1e-9 } else { 1e-8 };
        prop_assert!((eval_bump(&c, &k, ti, 0) - 1.0).abs() < tol);
        prop_assert!((eval_bump(&c, &k, ti, 1) * sigma).abs() < tol);
        prop_assert!((eval_wave(&c, &k, ti, 0) / sigma).abs() < tol);
        prop_assert!((eval_wave(&c, &k, ti, 1) - 1.0).abs() < tol);
    }

    #[test]
    fn mirror_symmetry((sigma, ti, u1, u2) in config(), fam in family(), x in -5.0f64..5.0) {
        let k = KernelSpec::new(fam, sigma).unwrap();
        let c = bump_wave_coeffs(&k, ti, ti + u1 * sigma, ti + u2 * sigma).unwrap();
        let m = bump_wave_coeffs(&k, ti, ti - u2 * sigma, ti - u1 * sigma).unwrap();
        let b = eval_bump(&c, &k, ti + x * sigma, 0);
        let bm = eval_bump(&m, &k, ti - x * sigma, 0);
        let w = eval_wave(&c, &k, ti + x * sigma, 0);
        let wm = eval_wave(&m, &k, ti - x * sigma, 0);
        prop_assert!((b - bm).abs() < 1e-12 * (1.0 + b.abs()));
        prop_assert!((w + wm).abs() < 1e-12 * sigma * (1.0 + (w / sigma).abs()));
    }

    #[test]
    fn symmetric_samples_give_even_bump(sigma in 0.05f64..5.0, tau in 0.025f64..0.6, fam in family(), x in 0.0f64..6.0) {
        let k = KernelSpec::new(fam, sigma).unwrap();
        let c = bump_wave_coeffs(&k, 0.0, -tau * sigma, tau * sigma).unwrap();
        let (a, b) = (eval_bump(&c, &k, x * sigma, 0), eval_bump(&c, &k, -x * sigma, 0));
        prop_assert!((a - b).abs() < 1e-12);
        prop_assert!((c.b1 - c.b2).abs() < 1e-12 * c.b1.abs());
    }

    #[test]
    fn bump_derivatives_match_finite_differences((sigma, ti, u1, u2) in config(), fam in family(), x in -4.0f64..4.0) {
        let k = KernelSpec::new(fam, sigma).unwrap();
        let c = bump_wave_coeffs(&k, ti, ti + u1 * sigma, ti + u2 * sigma).unwrap();
        let t = ti + x * sigma;
        let h = 1e-5 * sigma;
        let fd = (eval_bump(&c, &k, t + h, 0) - eval_bump(&c, &k, t - h, 0)) / (2.0 * h);
        let scale = (c.b1.abs() + c.b2.abs()) / sigma;
        prop_assert!((fd - eval_bump(&c, &k, t, 1)).abs() < 1e-6 * scale);
        let fdw = (eval_wave(&c, &k, t + h, 1) - eval_wave(&c, &k, t - h, 1)) / (2.0 * h);
        let scale_w = (c.w1.abs() + c.w2.abs()) / (sigma * sigma);
        prop_assert!((fdw - eval_wave(&c, &k, t, 2)).abs() < 1e-6 * scale_w);
    }

    #[test]
    fn sigma_scaling((sigma, ti, u1, u2) in config(), fam in family(), x in -5.0f64..5.0) {
        let k = KernelSpec::new(fam, sigma).unwrap();
        let k1 = KernelSpec::new(fam, 1.0).unwrap();
        let c = bump_wave_coeffs(&k, ti, ti + u1 * sigma, ti + u2 * sigma).unwrap();
        let c1 = bump_wave_coeffs(&k1, 0.0, u1, u2).unwrap();
        let b = eval_bump(&c, &k, ti + x * sigma, 0);
        let b1 = eval_bump(&c1, &k1, x, 0);
        prop_assert!((b - b1).abs() < 1e-9 * (1.0 + b1.abs()));
        let w = eval_wave(&c, &k, ti + x * sigma, 0);
        let w1 = eval_wave(&c1, &k1, x, 0);
        prop_assert!((w - sigma * w1).abs() < 1e-9 * sigma * (1.0 + w1.abs()));
    }

    #[test]
    fn denominator_vanishes_only_on_diagonal(s in -0.9f64..0.9, fam in family()) {
        prop_assert_eq!(denom_norm(fam, s, s), 0.0);
    }
}
