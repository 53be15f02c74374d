//! Jump-preserving signal estimation with the vertically weighted average.
//!
//! The crate covers the estimator itself ([`estimator`]), its kernels
//! ([`kernels`]), jackknife and bootstrap variance estimation
//! ([`resampling`]), fixed-sample and two-stage fixed-width confidence
//! intervals ([`intervals`]) and a deterministic Monte Carlo harness for
//! coverage studies ([`simulation`]).
//!
//! Monte Carlo work fans out over rayon when the `parallel` feature (on by
//! default) is enabled; every parallel path reproduces its serial
//! counterpart bit for bit.

pub mod error;
pub mod estimator;
pub mod exec;
pub mod intervals;
pub mod kernels;
pub mod resampling;
pub mod rng;
pub mod simulation;
mod sum;

pub use error::{Result, VwaError};
pub use estimator::{
    empirical_functionals, fixpoint_theta, leave_one_out, reconstruct, vwa, weighted_average,
    Estimate, FixpointOptions, FixpointResult, FunctionalEstimates, NeighborhoodSample,
    Reconstruction,
};
pub use exec::Execution;
pub use intervals::{
    bootstrap_final_sample_size, conditional_fixed_sample_ci, final_sample_size,
    initial_sample_size, normal_quantile, run_two_stage, unconditional_fixed_sample_ci,
    BootstrapPlan, ConfidenceInterval, IntervalMethod, IntervalTarget, NStarRule, SampleSource,
    TwoStageDesign, TwoStageRun, TwoStageVariant,
};
pub use kernels::{KernelFamily, KernelSpec};
pub use resampling::{
    bootstrap_t_quantile, bootstrap_variance_unconditional, jackknife, normal_reference_bandwidth,
    resample_empirical, smooth_resample, BootstrapTOptions, JackknifeResult,
};
pub use rng::RngSeed;
