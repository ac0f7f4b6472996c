//! Polynomial approximation of functions observed through heteroskedastic noise.
//!
//! The crate samples a noisy oracle `y = f(x) + eps_x` at Chebyshev points,
//! interpolates the node means with a fast cosine transform and truncates the
//! resulting series with Mallows' Cp. Three sampling strategies are provided:
//! single samples at `N + 1` points, known-sigma weighted sampling on a smaller
//! grid, and weighted sampling driven by pre-sampled variance estimates.
//!
//! ```
//! use chebtrunc::{hetero_chebtrunc, NoiseField, SamplingOracle, Target};
//!
//! let noise = NoiseField::indicator(1.0, 1e-5, 0.0, 0.1);
//! let mut oracle = SamplingOracle::from_arc(Target::Runge.to_fn(), noise, 7);
//! let result = hetero_chebtrunc(&mut oracle, 10_000, None, None).unwrap();
//! assert_eq!(result.samples_used, 10_001);
//! ```
#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x >= 0.0)` also rejects NaN


pub mod algorithms;
pub mod allocation;
pub mod cheb;
pub mod error;
pub mod noise;
pub mod stats;

pub use algorithms::{
    hetero_chebtrunc, hetero_presample, mallows_cp_select, noisy_chebtrunc, weighted_chebtrunc_known, ApproxResult,
    HeteroAllocation, HeteroParams,
};
pub use allocation::{allocate_known_sigma, allocate_uniform, AllocationMode, AllocationPlan};
pub use cheb::{
    chebyshev_points, coeffs_to_values, evaluate, lebesgue_log_bound, sup_error, truncate, values_to_coeffs,
    ChebyshevGrid, ChebyshevSeries,
};
pub use error::{Error, Result};
pub use noise::{
    derive_seed, runge, Dependence, NamedSigma, NoiseDistribution, NoiseField, NoiseKind, SampleSummary,
    SamplingOracle, Target, TargetFn,
};
