use deconv_core::{
    convolve_samples, design_matrix, min_separation, sample_proximity, sample_separation, worst_case_pattern,
    AtomicMeasure, Grid, KernelSpec, SampleSet,
};
use proptest::prelude::*;

fn sorted_distinct(v: Vec<f64>, min_gap: f64) -> Vec<f64> {
    let mut v = v;
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() < min_gap);
    v
}

fn measure() -> impl Strategy<Value = AtomicMeasure> {
    prop::collection::vec((-10.0f64..10.0, -2.0f64..2.0), 1..8).prop_map(|sp| {
        let locs = sorted_distinct(sp.iter().map(|p| p.0).collect(), 1e-6);
        AtomicMeasure::new(locs.iter().zip(&sp).map(|(&t, &(_, a))| (t, if a == 0.0 { 1.0 } else { a })).collect()).unwrap()
    })
}

fn samples() -> impl Strategy<Value = SampleSet> {
    prop::collection::vec(-12.0f64..12.0, 2..30)
        .prop_map(|v| sorted_distinct(v, 1e-6))
        .prop_filter("two samples", |v| v.len() >= 2)
        .prop_map(|v| SampleSet::new(v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn min_separation_is_min_over_pairs(mu in measure()) {
        let t = mu.locations();
        let mut brute = f64::INFINITY;
        for i in 0..t.len() {
            for j in 0..t.len() {
                if i != j {
                    brute = brute.min((t[i] - t[j]).abs());
                }
            }
        }
        prop_assert_eq!(min_separation(&mu), brute);
    }

    #[test]
    fn proximity_is_smallest_radius_with_two_samples(mu in measure(), s in samples()) {
        let g = sample_proximity(&s, &mu).unwrap();
        for &t in &mu.locations() {
            let inside = s.locations().iter().filter(|&&x| (x - t).abs() <= g).count();
            prop_assert!(inside >= 2);
        }
        // any smaller radius leaves some spike with fewer than two samples
        let smaller = g * (1.0 - 1e-9) - 1e-12;
        let starved = mu.locations().iter().any(|&t| s.locations().iter().filter(|&&x| (x - t).abs() <= smaller).count() < 2);
        prop_assert!(starved);
    }

    #[test]
    fn separation_is_min_over_spikes_of_max_pair_gap(mu in measure(), s in samples(), extra in 0.0f64..2.0) {
        let gamma = sample_proximity(&s, &mu).unwrap() + extra;
        let k = sample_separation(&s, &mu, gamma).unwrap();
        let mut brute = f64::INFINITY;
        for &t in &mu.locations() {
            let near: Vec<f64> = s.locations().iter().copied().filter(|x| (x - t).abs() <= gamma).collect();
            let mut best: f64 = 0.0;
            for a in &near {
                for b in &near {
                    best = best.max((a - b).abs());
                }
            }
            brute = brute.min(best);
        }
        prop_assert!((k - brute).abs() < 1e-12);
    }

    #[test]
    fn convolution_is_design_matrix_product(mu in measure(), s in samples(), sigma in 0.3f64..3.0) {
        let k = KernelSpec::gaussian(sigma);
        let grid = Grid::new(mu.locations()).unwrap();
        let a = design_matrix(&k, &s, &grid);
        let y = convolve_samples(&k, &mu, &s);
        let x = nalgebra::DVector::from_vec(mu.amplitudes());
        let ax = &a * x;
        for i in 0..y.len() {
            prop_assert!((ax[i] - y[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn worst_case_pattern_is_repeatable_and_bounded(seed in 0u64..10_000, n in 1usize..12, jitter in 0.0f64..0.05) {
        let (mu, s) = worst_case_pattern(n, 4.0, 0.3, jitter, seed).unwrap();
        let (mu2, s2) = worst_case_pattern(n, 4.0, 0.3, jitter, seed).unwrap();
        prop_assert_eq!(&mu, &mu2);
        prop_assert_eq!(&s, &s2);
        prop_assert!(sample_proximity(&s, &mu).unwrap() <= 0.3 * (1.0 + jitter) + 1e-12);
        if jitter == 0.0 {
            for (j, &t) in mu.locations().iter().enumerate() {
                prop_assert!((t - 4.0 * j as f64).abs() < 1e-12);
            }
        }
    }
}
