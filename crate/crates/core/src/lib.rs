//! Long-range dependent Gaussian random fields on lattices, filtered Hermite
//! functionals over growing windows, and samplers and diagnostics for their
//! non-central limits.

pub mod error;
pub mod experiments;
pub mod fft;
pub mod field;
pub mod filters;
pub mod hermite;
pub mod limit;
pub mod quadrature;
pub mod seed;
pub mod special;
pub mod stats;
pub mod windows;

pub use error::{Error, Result};
