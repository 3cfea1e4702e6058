use deconv_core::experiments::{
    conditioning, phase, single_spike_trial, transition_delta, uniform_phase, ConditioningConfig, PhaseConfig,
};
use deconv_core::{region_sweep, KernelFamily, SolveOptions};

fn cond_cfg(step: Option<f64>) -> ConditioningConfig {
    ConditioningConfig {
        spike_counts: vec![20],
        delta0s: (1..=30).map(|k| 0.1 * k as f64).collect(),
        sample_step: step,
        ..Default::default()
    }
}

#[test]
fn smallest_singular_value_transitions_after_middle_one() {
    let rows = conditioning(&cond_cfg(None)).unwrap();
    // transitions read off a log-scale plot: within three decades of the plateau
    let t_min = transition_delta(&rows, false, 1e-3).unwrap();
    let t_mid = transition_delta(&rows, true, 1e-3).unwrap();
    assert!(t_mid < t_min, "mid {t_mid} vs min {t_min}");
    assert!((0.7..=1.5).contains(&t_min), "sv_min transition at {t_min}");
    assert!((0.35..=0.7).contains(&t_mid), "sv_mid transition at {t_mid}");
    // near Δ₀ = σ the bulk of the spectrum is healthy while the bottom is not
    let at_sigma = rows.iter().find(|r| (r.delta0 - 1.0).abs() < 1e-9).unwrap();
    assert!(at_sigma.sv_mid > 0.1 && at_sigma.sv_min < 1e-4);
}

#[test]
fn transition_is_insensitive_to_sample_step() {
    let a = conditioning(&cond_cfg(Some(0.05))).unwrap();
    let b = conditioning(&cond_cfg(Some(0.2))).unwrap();
    let ta = transition_delta(&a, false, 1e-3).unwrap();
    let tb = transition_delta(&b, false, 1e-3).unwrap();
    assert!((ta - tb).abs() <= 0.2 + 1e-12, "{ta} vs {tb}");
}

#[test]
fn single_spike_recovery_below_inflection_point() {
    let opts = SolveOptions::default();
    // below the inflection point (γ₀ < σ) the spike itself is the cheapest explanation
    assert!(single_spike_trial(KernelFamily::Gaussian, 0.5, 0.01, &opts).unwrap().recovered);
    assert!(single_spike_trial(KernelFamily::Gaussian, 0.9, 0.01, &opts).unwrap().recovered);
    let far = single_spike_trial(KernelFamily::Gaussian, 1.3, 0.01, &opts).unwrap();
    assert!(!far.recovered);
    // the mass splits away from the spike location
    let n = 300;
    assert!(far.x[n].abs() < 1e-6);
    let away: f64 = far.x.iter().enumerate().filter(|(i, _)| i.abs_diff(n) >= 50).map(|(_, v)| v.abs()).sum();
    assert!(away > 0.5, "mass away from spike {away}");
}

fn small_phase(deltas: Vec<f64>, second: Vec<f64>) -> PhaseConfig {
    PhaseConfig { deltas, second, trials: 3, ..Default::default() }
}

#[test]
fn phase_is_deterministic_and_recovers_well_separated_spikes() {
    let cfg = small_phase(vec![6.0], vec![0.2]);
    let a = phase(&cfg).unwrap();
    assert_eq!(a.len(), 1);
    assert_eq!(a[0].fraction, 1.0);
    assert_eq!(phase(&cfg).unwrap(), a);
}

#[test]
fn numerical_region_contains_certified_region() {
    let deltas = vec![3.5, 5.0];
    let gammas = vec![0.1, 0.3];
    let reps = region_sweep(KernelFamily::Gaussian, &deltas, &gammas, 0.05, 4.0).unwrap();
    let ph = phase(&small_phase(deltas, gammas)).unwrap();
    for r in reps.iter().filter(|r| r.certified) {
        let p = ph.iter().find(|p| p.delta == r.delta && p.second == r.gamma).unwrap();
        assert_eq!(p.fraction, 1.0, "certified ({}, {}) but fraction {}", r.delta, r.gamma, p.fraction);
    }
}

#[test]
fn uniform_phase_omits_coarse_grids_and_is_monotone() {
    let cfg = PhaseConfig { grid_points: 1000, trials: 2, ..small_phase(vec![2.5, 4.0], vec![1.0, 1.5]) };
    let rows = uniform_phase(&cfg).unwrap();
    assert!(rows.iter().all(|r| r.second <= r.delta / 2.0));
    assert_eq!(rows.len(), 3);
    for a in &rows {
        for b in &rows {
            if b.delta >= a.delta && b.second <= a.second {
                assert!(b.fraction_monotonized >= a.fraction_monotonized);
            }
        }
    }
    assert_eq!(uniform_phase(&cfg).unwrap(), rows);
}
