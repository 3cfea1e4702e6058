//! Sparse spike deconvolution from nonuniform samples of Gaussian or Ricker
//! convolutions: grid ℓ1 solvers, dual certificates, and an interval-arithmetic
//! engine that certifies exact-recovery regions.

pub mod bound;
pub mod certificate;
pub mod error;
pub mod experiments;
pub mod io;
pub mod kernels;
pub mod rng;
pub mod signal;
pub mod solver;

pub use certificate::{
    build_bumps_only, build_certificate, build_sparse_certificate, dampened_kernel, eval_q, select_certificate_samples,
    verify_certificate, verify_sparse_certificate, Certificate, SparseCertificate, VerificationReport,
};
pub use error::{Error, Result};
pub use kernels::{
    bump_wave_coeffs, denom, eval_bump, eval_wave, kernel_eval, BumpWaveCoeffs, KernelFamily, KernelSpec,
};
pub use signal::{
    convolve_samples, design_matrix, error_report, min_separation, sample_proximity, sample_separation,
    worst_case_pattern, AtomicMeasure, ErrorReport, Grid, SampleSet,
};
pub use solver::{basis_pursuit, bpdn, kkt_report, relative_error, sparse_bp, KktReport, Program, SolveOptions, SolveResult};
pub use bound::engine::{
    block_norm_bounds, certify_point, certify_sparse_cells, certify_sparse_point, certify_with_table, q_function_bounds, region_sweep,
    region_test, schur_bounds, write_region_csv, BlockNorms, BoundConfig, QBounds, QCoefficients, RegionReport,
    RegionTest, SchurBounds, SparseConfig, SparseExtras,
};
pub use bound::tables::{damp_tables, monotonize, piecewise_tables, BoundTable, DampTable, TableSpec};
pub use bound::Interval;
