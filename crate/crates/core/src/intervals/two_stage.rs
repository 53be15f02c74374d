//! Two-stage fixed-width intervals.
//!
//! The current observation `Y_N` is fixed up front. A first stage of `n0 - 1`
//! neighbors estimates the jackknife scale `σ̃²`, which fixes the final size
//! `N = max(n0, floor(σ̃² c² / d² + 2))` with `c` either the normal critical
//! value or a bootstrap-t quantile. The first-stage neighbors are kept and
//! `N - n0` more are drawn before the final estimate is formed.

use crate::error::{domain, Result, VwaError};
use crate::estimator::{vwa, NeighborhoodSample};
use crate::kernels::KernelSpec;
use crate::resampling::{bootstrap_t_quantile, jackknife, BootstrapTOptions};
use crate::rng::RngSeed;

use super::{
    bootstrap_final_sample_size, check_alpha, check_precision, initial_sample_size,
    two_sided_critical, ConfidenceInterval, IntervalMethod, IntervalTarget,
};

/// Supplies neighbor observations one at a time; `None` means exhausted.
pub trait SampleSource {
    fn next_observation(&mut self) -> Option<f64>;
}

impl<I: Iterator<Item = f64>> SampleSource for I {
    fn next_observation(&mut self) -> Option<f64> {
        self.next()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TwoStageVariant {
    Clt,
    Bootstrap,
}

impl TwoStageVariant {
    pub fn name(&self) -> &'static str {
        match self {
            TwoStageVariant::Clt => "clt",
            TwoStageVariant::Bootstrap => "bootstrap",
        }
    }
}

/// Bootstrap sample size rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NStarRule {
    /// `floor(min(1.5 n0, 50))`.
    Capped,
    Fixed(usize),
}

impl NStarRule {
    pub fn size(&self, n0: usize) -> usize {
        match *self {
            NStarRule::Capped => (1.5 * n0 as f64).min(50.0).floor() as usize,
            NStarRule::Fixed(n) => n,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BootstrapPlan {
    pub reps: usize,
    pub n_star: NStarRule,
    pub smooth: bool,
}

impl Default for BootstrapPlan {
    fn default() -> Self {
        Self {
            reps: 2000,
            n_star: NStarRule::Capped,
            smooth: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoStageDesign {
    /// Half-width of the interval.
    pub d: f64,
    pub alpha: f64,
    /// Fixed first-stage size; `None` uses the `floor(z / d)` rule.
    pub initial_size: Option<usize>,
    /// `None` selects the CLT critical value.
    pub bootstrap: Option<BootstrapPlan>,
}

impl TwoStageDesign {
    pub fn clt(d: f64, alpha: f64) -> Self {
        Self {
            d,
            alpha,
            initial_size: None,
            bootstrap: None,
        }
    }

    pub fn bootstrap(d: f64, alpha: f64, plan: BootstrapPlan) -> Self {
        Self {
            d,
            alpha,
            initial_size: None,
            bootstrap: Some(plan),
        }
    }

    pub fn with_initial_size(mut self, n0: usize) -> Self {
        self.initial_size = Some(n0);
        self
    }

    pub fn variant(&self) -> TwoStageVariant {
        if self.bootstrap.is_some() {
            TwoStageVariant::Bootstrap
        } else {
            TwoStageVariant::Clt
        }
    }

    pub fn first_stage_size(&self) -> Result<usize> {
        match self.initial_size {
            Some(n0) if n0 < 3 => Err(domain(format!("initial sample size must be at least 3, got {n0}"))),
            Some(n0) => Ok(n0),
            None => initial_sample_size(self.d, self.alpha),
        }
    }
}

/// Full trace of one two-stage run.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoStageRun {
    pub n0: usize,
    pub d: f64,
    pub level: f64,
    pub sigma_tilde_sq: f64,
    /// Final sample size `N`, the current observation included.
    pub final_size: usize,
    /// `mu_hat_N(Y_N)` over all `N - 1` neighbors.
    pub center: f64,
    pub interval: ConfidenceInterval,
    pub variant: TwoStageVariant,
    /// Critical value used for `N` when it came from the bootstrap.
    pub boot_quantile: Option<f64>,
    pub first_stage: NeighborhoodSample,
}

/// What is known when the source runs dry.
#[derive(Clone, Debug, PartialEq)]
pub struct PartialTwoStage {
    pub n0: usize,
    pub variant: TwoStageVariant,
    /// Neighbors needed at the point of failure.
    pub required_neighbors: usize,
    /// Neighbors actually obtained.
    pub drawn: usize,
    pub sigma_tilde_sq: Option<f64>,
    pub final_size: Option<usize>,
}

fn draw<S: SampleSource + ?Sized>(source: &mut S, count: usize, into: &mut Vec<f64>) -> Result<()> {
    for _ in 0..count {
        match source.next_observation() {
            Some(v) if v.is_finite() => into.push(v),
            Some(v) => return Err(domain(format!("sample source produced non-finite value {v}"))),
            None => break,
        }
    }
    Ok(())
}

/// Two-stage run with a caller-supplied critical value. `critical` receives
/// the first-stage sample and its `σ̃²`; it is not called when `σ̃² = 0`,
/// since the final size is then `n0` whatever the critical value.
pub fn run_two_stage_with_critical<S, F>(
    source: &mut S,
    current: f64,
    kernel: &KernelSpec,
    design: &TwoStageDesign,
    critical: F,
) -> Result<TwoStageRun>
where
    S: SampleSource + ?Sized,
    F: FnOnce(&NeighborhoodSample, f64) -> Result<f64>,
{

    check_precision(design.d)?;
    check_alpha(design.alpha)?;
    if !current.is_finite() {
        return Err(domain("current observation is not finite"));
    }
    let variant = design.variant();
    let n0 = design.first_stage_size()?;

    let mut neighbors = Vec::with_capacity(n0);
    draw(source, n0 - 1, &mut neighbors)?;
    if neighbors.len() < n0 - 1 {
        return Err(VwaError::InsufficientData {
            partial: Box::new(PartialTwoStage {
                n0,
                variant,
                required_neighbors: n0 - 1,
                drawn: neighbors.len(),
                sigma_tilde_sq: None,
                final_size: None,
            }),
        });
    }
    let first_stage = NeighborhoodSample::new(neighbors, current)?;
    let sigma_tilde_sq = match jackknife(&first_stage, kernel) {
        Ok(j) => j.var_asym,
        Err(VwaError::DegenerateNeighborhood { deleted, .. }) => {
            return Err(VwaError::DegenerateScale(format!(
                "first-stage jackknife is degenerate (deleted neighbor {deleted:?})"
            )))
        }
        Err(e) => return Err(e),
    };

    let (crit, boot_quantile) = if sigma_tilde_sq > 0.0 {
        let c = critical(&first_stage, sigma_tilde_sq)?;
        (c, (variant == TwoStageVariant::Bootstrap).then_some(c))
    } else {
        (0.0, None)
    };
    let final_size = bootstrap_final_sample_size(sigma_tilde_sq, crit, design.d, n0)?;

    let mut sample = first_stage.clone();
    if final_size > n0 {
        let mut more = Vec::with_capacity(final_size - n0);
        draw(source, final_size - n0, &mut more)?;
        if more.len() < final_size - n0 {
            return Err(VwaError::InsufficientData {
                partial: Box::new(PartialTwoStage {
                    n0,
                    variant,
                    required_neighbors: final_size - 1,
                    drawn: n0 - 1 + more.len(),
                    sigma_tilde_sq: Some(sigma_tilde_sq),
                    final_size: Some(final_size),
                }),
            });
        }
        sample.extend_neighbors(more);
    }
    let center = vwa(&sample, kernel)?.value;
    let method = match variant {
        TwoStageVariant::Clt => IntervalMethod::FixedWidthClt,
        TwoStageVariant::Bootstrap => IntervalMethod::FixedWidthBootstrap,
    };
    Ok(TwoStageRun {
        n0,
        d: design.d,
        level: 1.0 - design.alpha,
        sigma_tilde_sq,
        final_size,
        center,
        interval: ConfidenceInterval {
            center,
            half_width: design.d,
            level: 1.0 - design.alpha,
            method,
            target: IntervalTarget::ThetaOfCurrent,
        },
        variant,
        boot_quantile,
        first_stage,
    })
}

/// Two-stage fixed-width interval around the current observation.
///
/// `seed` drives the bootstrap-t replicates; the CLT variant ignores it.
pub fn run_two_stage<S: SampleSource + ?Sized>(
    source: &mut S,
    current: f64,
    kernel: &KernelSpec,
    design: &TwoStageDesign,
    seed: RngSeed,
) -> Result<TwoStageRun> {
    match design.bootstrap {
        None => {
            let z = two_sided_critical(design.alpha)?;
            run_two_stage_with_critical(source, current, kernel, design, |_, _| Ok(z))
        }
        Some(plan) => {
            let level = 1.0 - design.alpha / 2.0;
            run_two_stage_with_critical(source, current, kernel, design, |first, _| {
                let n0 = first.len() + 1;
                let opts = BootstrapTOptions {
                    reps: plan.reps,
                    n_star: plan.n_star.size(n0),
                    smooth: plan.smooth,
                };
                Ok(bootstrap_t_quantile(first, kernel, level, opts, seed)?.quantile)
            })
        }
    }
}
