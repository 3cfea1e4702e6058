//! Fixtures shared by the criterion benches.

use deconv_core::experiments::{sparse_instance, worst_case_instance, Instance};
use deconv_core::{BoundConfig, KernelFamily, TableSpec};

/// Worst-case noiseless instance: 10 spikes, Δ = 4σ, γ = 0.3σ, 2000-point grid.
pub fn noiseless_instance() -> Instance {
    worst_case_instance(KernelFamily::Gaussian, 0.01, 2000, 10, 4.0, 0.3, 0.0, 7).expect("fixture")
}

/// Sparse-noise instance: 10 spikes, Δ = 4.5σ, one corruption per segment.
pub fn sparse_noise_instance() -> Instance {
    sparse_instance(KernelFamily::Gaussian, 0.02, 1000, 10, 4.5, 1, 0.2, 7).expect("fixture")
}

/// Table spec at 1/`coarsen` of the default resolution.
pub fn table_spec(family: KernelFamily, coarsen: f64) -> TableSpec {
    BoundConfig::new(family, 3.5, 0.3, 0.05).coarsened(coarsen).table_spec()
}
