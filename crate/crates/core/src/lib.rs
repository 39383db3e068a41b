//! Confidence intervals for ratios of means.
//!
//! The crate covers Fieller's method (with its unbounded cases), the Taylor,
//! index, trimmed-index and zero-variance approximations, bootstrap
//! intervals including the Hwang bootstrap of the Fieller pivot, the
//! confidence-ellipse picture of Fieller's construction, Monte Carlo
//! coverage studies and the regression models for ratio-type response
//! variables.

pub mod bootstrap;
pub mod dist;
pub mod error;
pub mod geometry;
pub mod linear;
pub mod montecarlo;
pub mod ratio;
pub mod rng;
pub mod stats;

pub use bootstrap::{hwang_set, BootstrapConfig, EmpiricalDistribution, Interval};
pub use error::{Error, Result};
pub use geometry::{construct_wedge, EllipseConstruction};
pub use montecarlo::{run_cell, run_grid, SimCell, SimOptions};
pub use ratio::{
    contrast_variance, fieller_set, index_limits, invert_t0_band, point_estimate, t0_statistic, taylor_limits,
    trimmed_index_limits, zero_variance_limits, BootstrapDiagnostics, ConfidenceSet, Diagnostics, FiellerDiagnostics,
    Method, MethodRecord, MethodResult, SetCase,
};
pub use stats::{
    coefficient_of_variation, sample_bivariate_normal, summarize, BivariateNormalParams, ConfidenceSpec, PairedSample,
    SummaryStats,
};
