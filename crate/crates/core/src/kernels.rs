//! Symmetric nonnegative kernels used for vertical weighting.
//!
//! A kernel is a generic shape `k̃` rescaled by `σ`: `k(z) = k̃(z / σ) + ε`,
//! where `ε ≥ 0` is an optional ridge that keeps every weight positive.
//!
//! The Gaussian shape is the N(0, 1) density of `z / σ` and is *not* divided
//! by `σ`. The weighted average only depends on weight ratios, so the
//! normalization constant has no effect on any estimate.

use std::fmt;
use std::str::FromStr;

use crate::error::{domain, Result, VwaError};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum KernelFamily {
    /// Standard normal density.
    Gaussian,
    /// Indicator of the closed interval `[-1, 1]`.
    Uniform,
}

impl KernelFamily {
    pub fn name(&self) -> &'static str {
        match self {
            KernelFamily::Gaussian => "gaussian",
            KernelFamily::Uniform => "uniform",
        }
    }
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelFamily {
    type Err = VwaError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" | "normal" => Ok(KernelFamily::Gaussian),
            "uniform" | "box" => Ok(KernelFamily::Uniform),
            other => Err(domain(format!("unknown kernel family '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelSpec {
    family: KernelFamily,
    scale: f64,
    ridge: f64,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, scale: f64) -> Result<Self> {
        Self::with_ridge(family, scale, 0.0)
    }

    pub fn with_ridge(family: KernelFamily, scale: f64, ridge: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(domain(format!("kernel scale must be positive and finite, got {scale}")));
        }
        if !(ridge.is_finite() && ridge >= 0.0) {
            return Err(domain(format!("kernel ridge must be nonnegative and finite, got {ridge}")));
        }
        Ok(Self { family, scale, ridge })
    }

    pub fn gaussian(scale: f64) -> Result<Self> {
        Self::new(KernelFamily::Gaussian, scale)
    }

    pub fn uniform(scale: f64) -> Result<Self> {
        Self::new(KernelFamily::Uniform, scale)
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn ridge(&self) -> f64 {
        self.ridge
    }

    /// Same shape and ridge with a different scale.
    pub fn rescaled(&self, scale: f64) -> Result<Self> {
        Self::with_ridge(self.family, scale, self.ridge)
    }

    /// `k̃(z / σ) + ε`; rejects non-finite `z`.
    pub fn evaluate(&self, z: f64) -> Result<f64> {
        if !z.is_finite() {
            return Err(domain(format!("kernel argument must be finite, got {z}")));
        }
        Ok(self.weight(z))
    }

    /// Unchecked evaluation for inner loops over validated data.
    #[inline]
    pub(crate) fn weight(&self, z: f64) -> f64 {
        let u = z / self.scale;
        let base = match self.family {
            KernelFamily::Gaussian => INV_SQRT_2PI * (-0.5 * u * u).exp(),
            KernelFamily::Uniform => {
                if u.abs() <= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
        };
        base + self.ridge
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(sigma={}", self.family, self.scale)?;
        if self.ridge > 0.0 {
            write!(f, ", ridge={}", self.ridge)?;
        }
        f.write_str(")")
    }
}
