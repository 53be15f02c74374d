//! Fixed-sample and fixed-width confidence intervals.
//!
//! Fixed-sample intervals have a data-dependent width `2 z sd`. Fixed-width
//! intervals fix the half-width `d` up front and instead choose the sample
//! size in two stages (see [`run_two_stage`]).

mod normal;
mod two_stage;

use std::fmt;

pub use normal::{normal_quantile, two_sided_critical};
pub use two_stage::{
    run_two_stage, run_two_stage_with_critical, BootstrapPlan, NStarRule, PartialTwoStage,
    SampleSource, TwoStageDesign, TwoStageRun, TwoStageVariant,
};

use crate::error::{domain, Result};
use crate::estimator::{vwa, NeighborhoodSample};
use crate::kernels::KernelSpec;
use crate::resampling::{bootstrap_variance_unconditional, jackknife};
use crate::rng::RngSeed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum IntervalMethod {
    ConditionalJackknife,
    UnconditionalBootstrap,
    FixedWidthClt,
    FixedWidthBootstrap,
}

impl IntervalMethod {
    pub fn name(&self) -> &'static str {
        match self {
            IntervalMethod::ConditionalJackknife => "conditional-jackknife",
            IntervalMethod::UnconditionalBootstrap => "unconditional-bootstrap",
            IntervalMethod::FixedWidthClt => "fixed-width-clt",
            IntervalMethod::FixedWidthBootstrap => "fixed-width-bootstrap",
        }
    }
}

impl fmt::Display for IntervalMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The parameter an interval is meant to cover.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum IntervalTarget {
    /// `E(mu_hat | Y_n)`.
    ConditionalMean,
    /// The signal level `m` itself.
    TrueMean,
    /// `theta(Y_n) = E[k(Y - y) Y] / E[k(Y - y)]` at `y = Y_n`.
    ThetaOfCurrent,
}

/// A symmetric interval `[center - half_width, center + half_width]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConfidenceInterval {
    pub center: f64,
    pub half_width: f64,
    /// Nominal coverage `1 - alpha`.
    pub level: f64,
    pub method: IntervalMethod,
    pub target: IntervalTarget,
}

impl ConfidenceInterval {
    pub fn lower(&self) -> f64 {
        self.center - self.half_width
    }

    pub fn upper(&self) -> f64 {
        self.center + self.half_width
    }

    pub fn width(&self) -> f64 {
        2.0 * self.half_width
    }

    pub fn contains(&self, x: f64) -> bool {
        (x - self.center).abs() <= self.half_width
    }
}

/// `center ± Φ^{-1}(1 - α/2) sd`.
pub fn normal_interval(
    center: f64,
    sd: f64,
    alpha: f64,
    method: IntervalMethod,
    target: IntervalTarget,
) -> Result<ConfidenceInterval> {
    if !(sd.is_finite() && sd >= 0.0) {
        return Err(domain(format!("standard error must be nonnegative, got {sd}")));
    }
    let z = two_sided_critical(alpha)?;
    Ok(ConfidenceInterval {
        center,
        half_width: z * sd,
        level: 1.0 - alpha,
        method,
        target,
    })
}

/// Jackknife interval for `E(mu_hat | Y_n)`, the current observation held fixed.
pub fn conditional_fixed_sample_ci(
    sample: &NeighborhoodSample,
    kernel: &KernelSpec,
    alpha: f64,
) -> Result<ConfidenceInterval> {
    let center = vwa(sample, kernel)?.value;
    let jack = jackknife(sample, kernel)?;
    normal_interval(
        center,
        jack.sd_hat(),
        alpha,
        IntervalMethod::ConditionalJackknife,
        IntervalTarget::ConditionalMean,
    )
}

/// Bootstrap-variance interval for the signal level; the last element of
/// `series` is the current observation.
pub fn unconditional_fixed_sample_ci(
    series: &[f64],
    kernel: &KernelSpec,
    alpha: f64,
    reps: usize,
    seed: RngSeed,
) -> Result<ConfidenceInterval> {
    let sample = NeighborhoodSample::from_series(series)?;
    let center = vwa(&sample, kernel)?.value;
    let boot = bootstrap_variance_unconditional(series, kernel, reps, seed)?;
    normal_interval(
        center,
        boot.variance.sqrt(),
        alpha,
        IntervalMethod::UnconditionalBootstrap,
        IntervalTarget::TrueMean,
    )
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(domain(format!("alpha must lie in (0, 1), got {alpha}")))
    }
}

fn check_precision(d: f64) -> Result<()> {
    if d.is_finite() && d > 0.0 {
        Ok(())
    } else {
        Err(domain(format!("precision d must be positive, got {d}")))
    }
}

/// First-stage size `max(floor(Φ^{-1}(1 - α/2) / d), 3)`.
pub fn initial_sample_size(d: f64, alpha: f64) -> Result<usize> {
    check_precision(d)?;
    check_alpha(alpha)?;
    let z = two_sided_critical(alpha)?;
    Ok(((z / d).floor() as usize).max(3))
}

/// Final size `max(n0, floor(σ̃² c² / d² + 2))` for a critical value `c`.
pub fn bootstrap_final_sample_size(sigma_tilde_sq: f64, critical: f64, d: f64, n0: usize) -> Result<usize> {
    check_precision(d)?;
    if !(sigma_tilde_sq.is_finite() && sigma_tilde_sq >= 0.0) {
        return Err(domain(format!("variance scale must be nonnegative, got {sigma_tilde_sq}")));
    }
    if !critical.is_finite() {
        return Err(domain("critical value must be finite"));
    }
    if n0 < 3 {
        return Err(domain(format!("initial sample size must be at least 3, got {n0}")));
    }
    let raw = (sigma_tilde_sq * critical * critical / (d * d) + 2.0).floor();
    // `as` saturates, so an astronomically large requirement stays representable.
    Ok(n0.max(raw as usize))
}

/// CLT final size: [`bootstrap_final_sample_size`] with `c = Φ^{-1}(1 - α/2)`.
pub fn final_sample_size(sigma_tilde_sq: f64, d: f64, alpha: f64, n0: usize) -> Result<usize> {
    check_alpha(alpha)?;
    bootstrap_final_sample_size(sigma_tilde_sq, two_sided_critical(alpha)?, d, n0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn conditional_hand_case() {
        let k = KernelSpec::uniform(2.0).unwrap();
        let s = NeighborhoodSample::new(vec![0.0, 2.0], 1.0).unwrap();
        let ci = conditional_fixed_sample_ci(&s, &k, 0.05).unwrap();
        assert_eq!(ci.center, 1.0);
        assert!((ci.lower() + 0.959_964).abs() < 1e-6);
        assert!((ci.upper() - 2.959_964).abs() < 1e-6);
        assert_eq!(ci.target, IntervalTarget::ConditionalMean);
        let narrow = conditional_fixed_sample_ci(&s, &k, 0.32).unwrap();
        assert!((narrow.width() - 2.0 * normal_quantile(0.84).unwrap()).abs() < 1e-12);
        assert!((narrow.width() - 1.98892).abs() < 1e-5);
    }

    #[test]
    fn constant_data_gives_point_intervals() {
        let k = KernelSpec::gaussian(0.5).unwrap();
        let s = NeighborhoodSample::new(vec![2.0; 4], 2.0).unwrap();
        let ci = conditional_fixed_sample_ci(&s, &k, 0.05).unwrap();
        assert_eq!((ci.lower(), ci.upper()), (2.0, 2.0));
        let u = unconditional_fixed_sample_ci(&[2.0; 8], &k, 0.05, 100, RngSeed::new(1, 0)).unwrap();
        assert_eq!((u.lower(), u.upper()), (2.0, 2.0));
        assert_eq!(u.target, IntervalTarget::TrueMean);
    }

    #[test]
    fn initial_sizes() {
        assert_eq!(initial_sample_size(0.2, 0.05).unwrap(), 9);
        assert_eq!(initial_sample_size(0.1, 0.10).unwrap(), 16);
        assert_eq!(initial_sample_size(10.0, 0.05).unwrap(), 3);
        assert!(initial_sample_size(0.0, 0.05).is_err());
        assert!(initial_sample_size(0.1, 1.0).is_err());
    }

    #[test]
    fn final_sizes() {
        assert_eq!(final_sample_size(1.0, 0.1, 0.05, 9).unwrap(), 386);
        assert_eq!(final_sample_size(0.0, 0.3, 0.05, 9).unwrap(), 9);
        assert_eq!(final_sample_size(0.25, 0.2, 0.10, 16).unwrap(), 18);
        assert_eq!(bootstrap_final_sample_size(1.0, 1.959_964, 0.1, 9).unwrap(), 386);
        assert_eq!(bootstrap_final_sample_size(1.0, 0.0, 0.1, 9).unwrap(), 9);
        assert_eq!(bootstrap_final_sample_size(2.0, 2.2, 0.2, 9).unwrap(), 244);
        assert!(final_sample_size(1.0, 0.1, 0.05, 2).is_err());
    }

    proptest! {
        #[test]
        fn bootstrap_size_with_normal_quantile_is_clt_size(s2 in 0.0f64..5.0, d in 0.02f64..1.0, alpha in 0.001f64..0.5, n0 in 3usize..60) {
            let z = two_sided_critical(alpha).unwrap();
            prop_assert_eq!(
                bootstrap_final_sample_size(s2, z, d, n0).unwrap(),
                final_sample_size(s2, d, alpha, n0).unwrap()
            );
        }

        #[test]
        fn sizes_are_monotone(s2 in 0.0f64..5.0, ds in 0.0f64..0.5, d in 0.02f64..1.0,
                              alpha in 0.01f64..0.5, da in 0.0f64..0.009, extra in 0.0f64..2.0) {
            let n0 = initial_sample_size(d, alpha).unwrap();
            // Larger d: no larger sizes.
            prop_assert!(initial_sample_size(d + ds, alpha).unwrap() <= n0);
            prop_assert!(final_sample_size(s2, d + ds, alpha, n0).unwrap() <= final_sample_size(s2, d, alpha, n0).unwrap());
            // Higher level (smaller alpha): no smaller sizes.
            let a2 = alpha - da;
            prop_assert!(initial_sample_size(d, a2).unwrap() >= n0);
            prop_assert!(final_sample_size(s2, d, a2, n0).unwrap() >= final_sample_size(s2, d, alpha, n0).unwrap());
            // Larger variance scale: no smaller size.
            prop_assert!(final_sample_size(s2 + extra, d, alpha, n0).unwrap() >= final_sample_size(s2, d, alpha, n0).unwrap());
        }

        #[test]
        fn final_size_ratio_bounds(s2 in 0.05f64..5.0, d in 0.02f64..0.5, alpha in 0.01f64..0.3) {
            let n0 = initial_sample_size(d, alpha).unwrap();
            let z = two_sided_critical(alpha).unwrap();
            let target = s2 * z * z / (d * d);
            let n = final_sample_size(s2, d, alpha, n0).unwrap();
            if (target + 2.0).floor() as usize > n0 {
                let ratio = n as f64 / target;
                prop_assert!(ratio >= 1.0);
                prop_assert!(ratio <= 1.0 + 3.0 / target);
            }
        }
    }
}
