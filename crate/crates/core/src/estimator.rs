//! The vertically weighted average and its population-level diagnostics.
//!
//! Given neighbors `Y_1..Y_m` and a current observation `Y_n`, the estimate is
//!
//! ```text
//! mu_hat(Y_n) = sum_i Y_i k(Y_i - Y_n) / sum_i k(Y_i - Y_n)
//! ```
//!
//! Only neighbors whose *values* are close to `Y_n` get appreciable weight, so
//! averaging never crosses a jump in the underlying signal.
//!
//! Sums run in index order with compensated accumulation. Each weighted mean
//! is anchored at its first positively weighted value, which makes constant
//! data reproduce exactly.

use crate::error::{domain, Result, VwaError};
use crate::exec::Execution;
use crate::kernels::KernelSpec;
use crate::sum::{self, Neumaier};

/// Neighbor observations together with the designated current observation.
#[derive(Clone, Debug, PartialEq)]
pub struct NeighborhoodSample {
    neighbors: Vec<f64>,
    current: f64,
}

impl NeighborhoodSample {
    pub fn new(neighbors: Vec<f64>, current: f64) -> Result<Self> {
        if neighbors.is_empty() {
            return Err(domain("a neighborhood needs at least one neighbor"));
        }
        if let Some(pos) = neighbors.iter().position(|v| !v.is_finite()) {
            return Err(domain(format!("neighbor {pos} is not finite")));
        }
        if !current.is_finite() {
            return Err(domain("current observation is not finite"));
        }
        Ok(Self { neighbors, current })
    }

    /// Splits a series so that its last element becomes the current observation.
    pub fn from_series(series: &[f64]) -> Result<Self> {
        match series.split_last() {
            Some((&current, rest)) if !rest.is_empty() => Self::new(rest.to_vec(), current),
            _ => Err(domain("a series needs at least two observations")),
        }
    }

    pub fn neighbors(&self) -> &[f64] {
        &self.neighbors
    }

    pub fn current(&self) -> f64 {
        self.current
    }

    /// Number of neighbors `m`.
    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    /// Neighbors followed by the current observation.
    pub fn pool(&self) -> Vec<f64> {
        let mut all = Vec::with_capacity(self.neighbors.len() + 1);
        all.extend_from_slice(&self.neighbors);
        all.push(self.current);
        all
    }

    pub(crate) fn extend_neighbors(&mut self, more: impl IntoIterator<Item = f64>) {
        self.neighbors.extend(more);
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    /// Sum of the kernel weights.
    pub weight_sum: f64,
    /// Number of strictly positive weights.
    pub effective_count: usize,
}

#[derive(Default)]
struct Accumulator {
    anchor: Option<f64>,
    num: Neumaier,
    den: Neumaier,
    lo: f64,
    hi: f64,
    count: usize,
}

impl Accumulator {
    #[inline]
    fn push(&mut self, y: f64, w: f64) {
        if w <= 0.0 {
            return;
        }
        let anchor = match self.anchor {
            Some(a) => a,
            None => {
                self.anchor = Some(y);
                self.lo = y;
                self.hi = y;
                y
            }
        };
        self.num.add(w * (y - anchor));
        self.den.add(w);
        self.lo = self.lo.min(y);
        self.hi = self.hi.max(y);
        self.count += 1;
    }

    fn finish(&self) -> Option<Estimate> {
        let anchor = self.anchor?;
        let den = self.den.total();
        if den <= 0.0 {
            return None;
        }
        let value = (anchor + self.num.total() / den).clamp(self.lo, self.hi);
        Some(Estimate {
            value,
            weight_sum: den,
            effective_count: self.count,
        })
    }
}

/// Weighted mean of `values` with explicit nonnegative `weights`.
pub fn weighted_average(values: &[f64], weights: &[f64]) -> Result<Estimate> {
    if values.len() != weights.len() {
        return Err(domain("values and weights differ in length"));
    }
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(domain("weights must be finite and nonnegative"));
    }
    let mut acc = Accumulator::default();
    for (&y, &w) in values.iter().zip(weights) {
        acc.push(y, w);
    }
    acc.finish().ok_or(VwaError::DegenerateNeighborhood {
        current: f64::NAN,
        deleted: None,
    })
}

/// Unvalidated estimate at `current`, optionally skipping one neighbor.
#[inline]
pub(crate) fn vwa_raw(
    neighbors: &[f64],
    current: f64,
    kernel: &KernelSpec,
    skip: Option<usize>,
) -> Option<Estimate> {
    let mut acc = Accumulator::default();
    for (j, &y) in neighbors.iter().enumerate() {
        if Some(j) != skip {
            acc.push(y, kernel.weight(y - current));
        }
    }
    acc.finish()
}

/// Leave-one-out estimate from precomputed weights.
#[inline]
pub(crate) fn weighted_mean_skipping(values: &[f64], weights: &[f64], skip: usize) -> Option<f64> {
    let mut acc = Accumulator::default();
    for (j, (&y, &w)) in values.iter().zip(weights).enumerate() {
        if j != skip {
            acc.push(y, w);
        }
    }
    acc.finish().map(|e| e.value)
}

/// The vertically weighted average of the neighbors at the current observation.
pub fn vwa(sample: &NeighborhoodSample, kernel: &KernelSpec) -> Result<Estimate> {
    vwa_raw(&sample.neighbors, sample.current, kernel, None).ok_or(
        VwaError::DegenerateNeighborhood {
            current: sample.current,
            deleted: None,
        },
    )
}

/// Estimate with neighbor `index` (0-based) removed; the current observation stays fixed.
pub fn leave_one_out(sample: &NeighborhoodSample, kernel: &KernelSpec, index: usize) -> Result<f64> {
    if sample.len() < 2 {
        return Err(domain("leave-one-out needs at least two neighbors"));
    }
    if index >= sample.len() {
        return Err(domain(format!(
            "leave-one-out index {index} out of range for {} neighbors",
            sample.len()
        )));
    }
    vwa_raw(&sample.neighbors, sample.current, kernel, Some(index))
        .map(|e| e.value)
        .ok_or(VwaError::DegenerateNeighborhood {
            current: sample.current,
            deleted: Some(index),
        })
}

/// Denoised series together with the points whose neighborhood was degenerate.
#[derive(Clone, Debug, PartialEq)]
pub struct Reconstruction {
    pub values: Vec<f64>,
    /// `true` where every weight vanished and the observation itself was returned.
    pub degenerate: Vec<bool>,
}

impl Reconstruction {
    pub fn any_degenerate(&self) -> bool {
        self.degenerate.iter().any(|&d| d)
    }
}

/// Per-point reconstruction: point `i` is estimated with itself as the current
/// observation and every other point as a neighbor.
pub fn reconstruct(series: &[f64], kernel: &KernelSpec, exec: Execution) -> Result<Reconstruction> {
    if series.len() < 2 {
        return Err(domain("reconstruction needs at least two observations"));
    }
    if let Some(pos) = series.iter().position(|v| !v.is_finite()) {
        return Err(domain(format!("observation {pos} is not finite")));
    }
    let points = exec.map(series.len(), |i| {
        match vwa_raw(series, series[i], kernel, Some(i)) {
            Some(e) => (e.value, false),
            None => (series[i], true),
        }
    });
    let (values, degenerate) = points.into_iter().unzip();
    Ok(Reconstruction { values, degenerate })
}

/// Plug-in estimates of the population functionals at a point `y`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FunctionalEstimates {
    /// `mu / nu`.
    pub theta: f64,
    /// Mean of `k(Y_i - y) Y_i`.
    pub mu: f64,
    /// Mean of `k(Y_i - y)`.
    pub nu: f64,
    /// Sample variance (denominator `n - 1`) of the influence terms `xi_i(y)`.
    pub sigma_xi_sq: f64,
}

/// Sample analogues of `mu(y)`, `nu(y)`, `theta(y)` and `sigma_xi^2(y)`.
///
/// The influence term of the ratio is
/// `xi_i = (k_i Y_i - mu) / nu - theta (k_i - nu) / nu`,
/// the linearization of `mu_hat / nu_hat` around `(mu, nu)`.
pub fn empirical_functionals(data: &[f64], kernel: &KernelSpec, y: f64) -> Result<FunctionalEstimates> {
    if data.len() < 2 {
        return Err(domain("functional estimates need at least two observations"));
    }
    if !y.is_finite() || data.iter().any(|v| !v.is_finite()) {
        return Err(domain("data and evaluation point must be finite"));
    }
    let n = data.len() as f64;
    let weights: Vec<f64> = data.iter().map(|&v| kernel.weight(v - y)).collect();
    let nu = sum::sum(weights.iter().copied()) / n;
    if nu <= 0.0 {
        return Err(VwaError::DegenerateNeighborhood {
            current: y,
            deleted: None,
        });
    }
    let mu = sum::sum(data.iter().zip(&weights).map(|(&v, &w)| w * v)) / n;
    let theta = match vwa_raw(data, y, kernel, None) {
        Some(e) => e.value,
        None => mu / nu,
    };
    let xi: Vec<f64> = data
        .iter()
        .zip(&weights)
        .map(|(&v, &w)| (w * v - mu) / nu - theta * (w - nu) / nu)
        .collect();
    let sigma_xi_sq = sum::sample_variance(&xi).max(0.0);
    Ok(FunctionalEstimates {
        theta,
        mu,
        nu,
        sigma_xi_sq,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FixpointOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for FixpointOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 200,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FixpointResult {
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Picard iteration of `x <- sum Y_i k(Y_i - x) / sum k(Y_i - x)` starting at `y0`.
pub fn fixpoint_theta(
    data: &[f64],
    kernel: &KernelSpec,
    y0: f64,
    opts: FixpointOptions,
) -> Result<FixpointResult> {
    if data.len() < 2 {
        return Err(domain("fix-point iteration needs at least two observations"));
    }
    if !(opts.tol > 0.0) || opts.max_iter == 0 {
        return Err(domain("tolerance and iteration budget must be positive"));
    }
    if !y0.is_finite() || data.iter().any(|v| !v.is_finite()) {
        return Err(domain("data and starting point must be finite"));
    }
    let mut x = y0;
    for iter in 1..=opts.max_iter {
        let next = vwa_raw(data, x, kernel, None)
            .ok_or(VwaError::DegenerateNeighborhood {
                current: x,
                deleted: None,
            })?
            .value;
        let step = (next - x).abs();
        x = next;
        if step <= opts.tol {
            return Ok(FixpointResult {
                value: x,
                converged: true,
                iterations: iter,
            });
        }
    }
    Ok(FixpointResult {
        value: x,
        converged: false,
        iterations: opts.max_iter,
    })
}
