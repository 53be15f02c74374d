use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{domain, Result, VwaError};
use crate::intervals::normal_quantile;

/// Distribution of the observations `Y = m + ε`.
///
/// All continuous laws are symmetric about their center and, apart from the
/// shift, have unit variance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ErrorLaw {
    StandardNormal,
    ShiftedNormal(f64),
    /// Laplace with scale `1/√2`.
    Laplace,
    /// Uniform on `[-√3, √3]`.
    UniformSymmetric,
    /// Degenerate law at a single value.
    PointMass(f64),
}

const SQRT3: f64 = 1.732_050_807_568_877_2;

impl ErrorLaw {
    /// Center of symmetry, i.e. the signal level `m`.
    pub fn center(&self) -> f64 {
        match *self {
            ErrorLaw::ShiftedNormal(m) | ErrorLaw::PointMass(m) => m,
            _ => 0.0,
        }
    }

    #[inline]
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            ErrorLaw::StandardNormal => rng.sample(StandardNormal),
            ErrorLaw::ShiftedNormal(m) => m + rng.sample::<f64, _>(StandardNormal),
            ErrorLaw::Laplace => {
                let u: f64 = rng.random::<f64>() - 0.5;
                let b = std::f64::consts::FRAC_1_SQRT_2;
                -b * u.signum() * (1.0 - 2.0 * u.abs()).ln()
            }
            ErrorLaw::UniformSymmetric => rng.random_range(-SQRT3..SQRT3),
            ErrorLaw::PointMass(c) => c,
        }
    }

    pub fn fill(&self, rng: &mut ChaCha8Rng, out: &mut [f64]) {
        for slot in out {
            *slot = self.sample(rng);
        }
    }

    /// Quantile function; conditioning values are `quantile(q)`.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        if !(q > 0.0 && q < 1.0) {
            return Err(domain(format!("quantile level must lie in (0, 1), got {q}")));
        }
        Ok(match *self {
            ErrorLaw::StandardNormal => normal_quantile(q)?,
            ErrorLaw::ShiftedNormal(m) => m + normal_quantile(q)?,
            ErrorLaw::Laplace => {
                let b = std::f64::consts::FRAC_1_SQRT_2;
                if q < 0.5 {
                    b * (2.0 * q).ln()
                } else {
                    -b * (2.0 * (1.0 - q)).ln()
                }
            }
            ErrorLaw::UniformSymmetric => SQRT3 * (2.0 * q - 1.0),
            ErrorLaw::PointMass(c) => c,
        })
    }

    pub fn source(self, rng: ChaCha8Rng) -> LawSource {
        LawSource { law: self, rng }
    }
}

impl fmt::Display for ErrorLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ErrorLaw::StandardNormal => f.write_str("normal"),
            ErrorLaw::ShiftedNormal(m) => write!(f, "normal({m})"),
            ErrorLaw::Laplace => f.write_str("laplace"),
            ErrorLaw::UniformSymmetric => f.write_str("uniform"),
            ErrorLaw::PointMass(c) => write!(f, "point({c})"),
        }
    }
}

impl FromStr for ErrorLaw {
    type Err = VwaError;

    /// Accepts `normal`, `normal(m)`, `laplace`, `uniform` and `point(c)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let arg = |prefix: &str| -> Option<Result<f64>> {
            s.strip_prefix(prefix).and_then(|r| r.strip_suffix(')')).map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| domain(format!("bad numeric argument in '{s}'")))
            })
        };
        match s.as_str() {
            "normal" | "standard-normal" => return Ok(ErrorLaw::StandardNormal),
            "laplace" => return Ok(ErrorLaw::Laplace),
            "uniform" | "uniform-symmetric" => return Ok(ErrorLaw::UniformSymmetric),
            _ => {}
        }
        if let Some(m) = arg("normal(") {
            return Ok(ErrorLaw::ShiftedNormal(m?));
        }
        if let Some(c) = arg("point(") {
            return Ok(ErrorLaw::PointMass(c?));
        }
        Err(domain(format!("unknown distribution '{s}'")))
    }
}

/// Endless stream of draws from a law.
pub struct LawSource {
    law: ErrorLaw,
    rng: ChaCha8Rng,
}

impl Iterator for LawSource {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        Some(self.law.sample(&mut self.rng))
    }
}
