//! Standard deviation of the estimator as a function of the current value.

use super::{bits, SimConfig};
use crate::error::{domain, Result, VwaError};
use crate::estimator::vwa_raw;
use crate::kernels::KernelSpec;
use crate::sum;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SdPoint {
    pub y: f64,
    pub sd: f64,
    /// Large-sample standard error of `sd`, `sd / sqrt(2 (R - 1))`.
    pub mc_se: f64,
    pub runs: usize,
}

/// Grid over `[lo, hi]`: both endpoints plus every multiple of `step`
/// strictly between them. A range symmetric about zero gives a symmetric grid.
pub fn profile_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(domain(format!("step must be positive, got {step}")));
    }
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(domain("profile range needs finite lo <= hi"));
    }
    let mut grid = vec![lo];
    let mut k = (lo / step).floor() as i64 + 1;
    loop {
        let y = k as f64 * step;
        if y >= hi {
            break;
        }
        if y > lo {
            grid.push(y);
        }
        k += 1;
    }
    if hi > lo {
        grid.push(hi);
    }
    Ok(grid)
}

/// Sample standard deviation of `mu_hat_n(y)` over `config.runs` neighbor sets.
pub fn conditional_sd(y: f64, n: usize, kernel: &KernelSpec, config: &SimConfig) -> Result<SdPoint> {
    if n < 2 {
        return Err(domain(format!("sample size must be at least 2, got {n}")));
    }
    let law = config.law;
    let cell = config.cell_seed(
        "sd-profile",
        &format!("{}|{}|{}|{n}|{}", kernel.family(), bits(kernel.scale()), bits(kernel.ridge()), bits(y)),
    );
    let values = config.execution.map(config.runs, |r| {
        let mut rng = cell.substream(r as u64).rng();
        let mut buf = vec![0.0; n - 1];
        law.fill(&mut rng, &mut buf);
        vwa_raw(&buf, y, kernel, None).map(|e| e.value)
    });
    let kept: Vec<f64> = values.into_iter().flatten().collect();
    let runs = kept.len();
    if runs < 2 {
        return Err(VwaError::ResamplingDegeneracy {
            valid: runs,
            dropped: config.runs - runs,
        });
    }
    let sd = sum::sample_variance(&kept).max(0.0).sqrt();
    Ok(SdPoint {
        y,
        sd,
        mc_se: sd / (2.0 * (runs as f64 - 1.0)).sqrt(),
        runs,
    })
}

/// SD profile over [`profile_grid`]`(lo, hi, step)` for the first bandwidth
/// in `config.sigmas`.
pub fn sd_profile(config: &SimConfig, y_range: [f64; 2], step: f64, n: usize) -> Result<Vec<SdPoint>> {
    config.validate()?;
    let sigma = *config
        .sigmas
        .first()
        .ok_or_else(|| domain("sd profile needs a bandwidth"))?;
    let kernel = config.kernel(sigma)?;
    profile_grid(y_range[0], y_range[1], step)?
        .into_iter()
        .map(|y| conditional_sd(y, n, &kernel, config))
        .collect()
}
