//! Sample-independent bounds on bumps, waves and dampened kernels, and the
//! region certification built on them.

pub mod engine;
pub mod forms;
pub mod interval;
pub mod jet;
pub mod tables;

pub use interval::{iv_abs, iv_add, iv_even_pow, iv_monotone, iv_mul, iv_neg, iv_recip, Interval};
