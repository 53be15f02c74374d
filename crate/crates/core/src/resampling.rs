//! Jackknife and bootstrap machinery.
//!
//! Every bootstrap replicate `b` draws from its own substream
//! `seed.substream(b)`, so results do not depend on how replicates are
//! scheduled.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{domain, Result, VwaError};
use crate::estimator::{vwa, vwa_raw, weighted_mean_skipping, NeighborhoodSample};
use crate::kernels::KernelSpec;
use crate::rng::RngSeed;
use crate::sum;

#[derive(Clone, Debug, PartialEq)]
pub struct JackknifeResult {
    /// Jackknife variance of the estimator, `(m-1)/m * sum (loo_i - mean)^2`.
    pub var_hat: f64,
    /// Asymptotic-variance scale `m * var_hat`.
    pub var_asym: f64,
    /// Leave-one-out estimates, one per neighbor, current observation held fixed.
    pub loo_values: Vec<f64>,
}

impl JackknifeResult {
    pub fn sd_hat(&self) -> f64 {
        self.var_hat.sqrt()
    }
}

pub fn jackknife(sample: &NeighborhoodSample, kernel: &KernelSpec) -> Result<JackknifeResult> {
    let m = sample.len();
    if m < 2 {
        return Err(domain("the jackknife needs at least two neighbors"));
    }
    let neighbors = sample.neighbors();
    let current = sample.current();
    let weights: Vec<f64> = neighbors.iter().map(|&y| kernel.weight(y - current)).collect();
    let loo_values = (0..m)
        .map(|i| {
            weighted_mean_skipping(neighbors, &weights, i).ok_or(VwaError::DegenerateNeighborhood {
                current,
                deleted: Some(i),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (_, ss) = sum::mean_and_ss(&loo_values);
    let mf = m as f64;
    let var_hat = (mf - 1.0) / mf * ss;
    Ok(JackknifeResult {
        var_hat,
        var_asym: mf * var_hat,
        loo_values,
    })
}

fn check_pool(data: &[f64]) -> Result<()> {
    if data.is_empty() {
        return Err(domain("cannot resample from empty data"));
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err(domain("resampling pool contains non-finite values"));
    }
    Ok(())
}

/// Fills `out` with draws from the pool, perturbed by `N(0, bandwidth^2)`
/// noise when `bandwidth > 0`. All indices are drawn before any noise so
/// that the atoms picked do not depend on the bandwidth.
fn fill_resample(data: &[f64], out: &mut [f64], bandwidth: f64, rng: &mut ChaCha8Rng) {
    let len = data.len();
    for slot in out.iter_mut() {
        *slot = data[rng.random_range(0..len)];
    }
    if bandwidth > 0.0 {
        for slot in out.iter_mut() {
            let z: f64 = rng.sample(StandardNormal);
            *slot += bandwidth * z;
        }
    }
}

/// `size` i.i.d. draws from the empirical distribution of `data`.
pub fn resample_empirical(data: &[f64], size: usize, seed: RngSeed) -> Result<Vec<f64>> {
    smooth_resample(data, size, 0.0, seed)
}

/// Smoothed bootstrap draws: an empirical atom plus `N(0, bandwidth^2)` noise.
pub fn smooth_resample(data: &[f64], size: usize, bandwidth: f64, seed: RngSeed) -> Result<Vec<f64>> {
    check_pool(data)?;
    if !(bandwidth.is_finite() && bandwidth >= 0.0) {
        return Err(domain(format!("bandwidth must be nonnegative, got {bandwidth}")));
    }
    let mut out = vec![0.0; size];
    fill_resample(data, &mut out, bandwidth, &mut seed.rng());
    Ok(out)
}

/// Normal-reference bandwidth `1.06 s n^{-1/5}` with `s` the sample standard deviation.
pub fn normal_reference_bandwidth(data: &[f64]) -> Result<f64> {
    if data.len() < 2 {
        return Err(domain("bandwidth selection needs at least two observations"));
    }
    let s = sum::sample_variance(data).max(0.0).sqrt();
    Ok(1.06 * s * (data.len() as f64).powf(-0.2))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BootstrapVariance {
    pub variance: f64,
    pub valid: usize,
    /// Replicates discarded because every weight vanished.
    pub dropped: usize,
}

/// Bootstrap variance of the estimator taken over the full series: each
/// replicate resamples all `n` positions, including the current (last) one.
pub fn bootstrap_variance_unconditional(
    series: &[f64],
    kernel: &KernelSpec,
    reps: usize,
    seed: RngSeed,
) -> Result<BootstrapVariance> {
    if series.len() < 2 {
        return Err(domain("bootstrap variance needs at least two observations"));
    }
    if reps < 2 {
        return Err(domain("bootstrap variance needs at least two replications"));
    }
    check_pool(series)?;
    let n = series.len();
    let mut buf = vec![0.0; n];
    let mut values = Vec::with_capacity(reps);
    for b in 0..reps {
        let mut rng = seed.substream(b as u64).rng();
        fill_resample(series, &mut buf, 0.0, &mut rng);
        if let Some(e) = vwa_raw(&buf[..n - 1], buf[n - 1], kernel, None) {
            values.push(e.value);
        }
    }
    let valid = values.len();
    let dropped = reps - valid;
    if valid < 2 {
        return Err(VwaError::ResamplingDegeneracy { valid, dropped });
    }
    Ok(BootstrapVariance {
        variance: sum::sample_variance(&values).max(0.0),
        valid,
        dropped,
    })
}

/// 1-based rank `ceil(len * level)` used for bootstrap order statistics.
/// Products within rounding noise of an integer are taken as that integer.
pub fn quantile_rank(len: usize, level: f64) -> usize {
    let x = len as f64 * level;
    let nearest = x.round();
    let rank = if (x - nearest).abs() <= 1e-9 * (len as f64).max(1.0) {
        nearest
    } else {
        x.ceil()
    };
    (rank as usize).clamp(1, len)
}

/// Sorts `values` and returns the order statistic at rank `ceil(len * level)`.
pub fn order_statistic(values: &mut [f64], level: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(domain("order statistic of an empty vector"));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(domain(format!("level must lie in (0, 1), got {level}")));
    }
    values.sort_by(f64::total_cmp);
    Ok(values[quantile_rank(values.len(), level) - 1])
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BootstrapTOptions {
    pub reps: usize,
    /// Bootstrap sample size `n*`, the current observation included.
    pub n_star: usize,
    pub smooth: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BootstrapQuantile {
    pub quantile: f64,
    /// Jackknife scale of the first stage used to studentize the replicates.
    pub sigma_tilde_sq: f64,
    pub bandwidth: f64,
    pub valid: usize,
    pub dropped: usize,
}

/// Studentized bootstrap replicates
/// `t_b = sqrt(m*) (mu*_b - mu_hat) / sigma_tilde` for the first-stage sample.
///
/// Resamples of size `m* = n* - 1` come from the pooled first stage
/// (neighbors and current); the current observation itself stays fixed.
pub fn bootstrap_t_replicates(
    first_stage: &NeighborhoodSample,
    kernel: &KernelSpec,
    opts: BootstrapTOptions,
    seed: RngSeed,
) -> Result<(Vec<f64>, BootstrapQuantile)> {
    if opts.n_star < 2 {
        return Err(domain("bootstrap sample size n* must be at least 2"));
    }
    if opts.reps == 0 {
        return Err(domain("at least one bootstrap replication is required"));
    }
    let jack = jackknife(first_stage, kernel)?;
    if !(jack.var_asym > 0.0) {
        return Err(VwaError::DegenerateScale(
            "first-stage jackknife variance is zero".into(),
        ));
    }
    let sigma_tilde = jack.var_asym.sqrt();
    let center = vwa(first_stage, kernel)?.value;
    let current = first_stage.current();
    let pool = first_stage.pool();
    let bandwidth = if opts.smooth {
        normal_reference_bandwidth(&pool)?
    } else {
        0.0
    };
    let m_star = opts.n_star - 1;
    let root_m = (m_star as f64).sqrt();
    let mut buf = vec![0.0; m_star];
    let mut reps = Vec::with_capacity(opts.reps);
    for b in 0..opts.reps {
        let mut rng = seed.substream(b as u64).rng();
        fill_resample(&pool, &mut buf, bandwidth, &mut rng);
        if let Some(e) = vwa_raw(&buf, current, kernel, None) {
            reps.push(root_m * (e.value - center) / sigma_tilde);
        }
    }
    let valid = reps.len();
    let summary = BootstrapQuantile {
        quantile: f64::NAN,
        sigma_tilde_sq: jack.var_asym,
        bandwidth,
        valid,
        dropped: opts.reps - valid,
    };
    Ok((reps, summary))
}

/// Bootstrap-t estimate of the `level` quantile of the studentized estimator.
pub fn bootstrap_t_quantile(
    first_stage: &NeighborhoodSample,
    kernel: &KernelSpec,
    level: f64,
    opts: BootstrapTOptions,
    seed: RngSeed,
) -> Result<BootstrapQuantile> {
    if !(level > 0.0 && level < 1.0) {
        return Err(domain(format!("level must lie in (0, 1), got {level}")));
    }
    if opts.reps < 100 {
        return Err(domain("bootstrap-t needs at least 100 replications"));
    }
    let (mut reps, mut summary) = bootstrap_t_replicates(first_stage, kernel, opts, seed)?;
    if reps.is_empty() {
        return Err(VwaError::ResamplingDegeneracy {
            valid: 0,
            dropped: summary.dropped,
        });
    }
    summary.quantile = order_statistic(&mut reps, level)?;
    Ok(summary)
}
