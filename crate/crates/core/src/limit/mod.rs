//! The limit process `X_κ(t)`: admissibility of parameters, the Hurst index,
//! normalizing constants, its covariance by Monte Carlo, direct samplers for
//! ranks 1 and 2 and integrability scans.

mod covariance;
mod integrability;
mod params;
mod sampler;

pub use covariance::{limit_covariance, CovarianceEstimate, McBudget};
pub use integrability::{integrability_scan, Classification, ScanResult, ScanSpec};
pub use params::{ScalingParams, ValidityMode};
pub use sampler::{sample_limit, spectrum_skewness, DiagonalTreatment, LimitSampleGrid, LimitSampler};
