//! Large-sample Monte Carlo targets for coverage scoring.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::{bits, SimConfig};
use crate::error::{domain, Result, VwaError};
use crate::estimator::vwa_raw;
use crate::kernels::KernelSpec;
use crate::sum::{self, Neumaier};

/// Environment variable naming the on-disk oracle cache directory.
pub const ORACLE_CACHE_ENV: &str = "VWA_ORACLE_CACHE";

const THETA_CHUNK: usize = 8_192;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleValue {
    pub value: f64,
    /// Monte Carlo standard error of `value`.
    pub mc_se: f64,
    pub valid: usize,
    /// Batches (or draws) discarded because every weight vanished.
    pub dropped: usize,
}

/// Content-addressed store of oracle values. Entries are written to a
/// temporary file and renamed into place, so readers never see partial data.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OracleCache {
    dir: Option<PathBuf>,
}

impl OracleCache {
    pub fn new(dir: Option<PathBuf>) -> Self {
        Self { dir }
    }

    pub fn disabled() -> Self {
        Self { dir: None }
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    fn path(&self, key: &str) -> Option<PathBuf> {
        let digest = Sha256::digest(key.as_bytes());
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        self.dir.as_ref().map(|d| d.join(format!("{hex}.oracle")))
    }

    pub fn get(&self, key: &str) -> Option<OracleValue> {
        let text = fs::read_to_string(self.path(key)?).ok()?;
        let mut it = text.split_whitespace();
        let value = f64::from_bits(u64::from_str_radix(it.next()?, 16).ok()?);
        let mc_se = f64::from_bits(u64::from_str_radix(it.next()?, 16).ok()?);
        let valid = it.next()?.parse().ok()?;
        let dropped = it.next()?.parse().ok()?;
        Some(OracleValue { value, mc_se, valid, dropped })
    }

    pub fn put(&self, key: &str, v: &OracleValue) -> Result<()> {
        let (Some(dir), Some(path)) = (self.dir.as_ref(), self.path(key)) else {
            return Ok(());
        };
        fs::create_dir_all(dir)?;
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        {
            let mut f = fs::File::create(&tmp)?;
            writeln!(
                f,
                "{:016x} {:016x} {} {}",
                v.value.to_bits(),
                v.mc_se.to_bits(),
                v.valid,
                v.dropped
            )?;
            f.sync_all()?;
        }
        fs::rename(&tmp, &path)?;
        Ok(())
    }

    fn get_or_compute(&self, key: &str, f: impl FnOnce() -> Result<OracleValue>) -> Result<OracleValue> {
        if let Some(v) = self.get(key) {
            return Ok(v);
        }
        let v = f()?;
        self.put(key, &v)?;
        Ok(v)
    }
}

fn oracle_key(kind: &str, y: f64, n: usize, kernel: &KernelSpec, config: &SimConfig) -> String {
    format!(
        "{kind}|law={}|kernel={}|scale={}|ridge={}|n={n}|y={}|size={}|seed={}:{}",
        config.law,
        kernel.family(),
        bits(kernel.scale()),
        bits(kernel.ridge()),
        bits(y),
        config.oracle_size,
        config.seed.master,
        config.seed.stream
    )
}

/// `E(mu_hat_n | Y_n = y)`: the average of the estimator over
/// `oracle_size / (n - 1)` independent neighbor sets of size `n - 1`.
pub fn oracle_conditional_mean(
    y: f64,
    n: usize,
    kernel: &KernelSpec,
    config: &SimConfig,
) -> Result<OracleValue> {
    config.check_oracle()?;
    if n < 2 {
        return Err(domain(format!("sample size must be at least 2, got {n}")));
    }
    if !y.is_finite() {
        return Err(domain("conditioning value is not finite"));
    }
    let key = oracle_key("conditional-mean", y, n, kernel, config);
    let cache = OracleCache::new(config.cache_dir.clone());
    cache.get_or_compute(&key, || {
        let m = n - 1;
        let batches = config.oracle_size / m;
        let seed = config.cell_seed("oracle-conditional-mean", &key);
        let law = config.law;
        let values = config.execution.map(batches, |b| {
            let mut rng = seed.substream(b as u64).rng();
            let mut buf = vec![0.0; m];
            law.fill(&mut rng, &mut buf);
            vwa_raw(&buf, y, kernel, None).map(|e| e.value)
        });
        let kept: Vec<f64> = values.into_iter().flatten().collect();
        let valid = kept.len();
        let dropped = batches - valid;
        if valid < 2 {
            return Err(VwaError::ResamplingDegeneracy { valid, dropped });
        }
        let (mean, ss) = sum::mean_and_ss(&kept);
        let k = valid as f64;
        Ok(OracleValue {
            value: mean,
            mc_se: (ss / (k - 1.0) / k).sqrt(),
            valid,
            dropped,
        })
    })
}

#[derive(Clone, Copy, Default)]
struct ThetaSums {
    w: Neumaier,
    wz: Neumaier,
    w2: Neumaier,
    w2z: Neumaier,
    w2z2: Neumaier,
    count: usize,
    lo: f64,
    hi: f64,
}

/// `theta(y) = E[k(Y - y) Y] / E[k(Y - y)]` from `oracle_size` draws of `Y`.
/// The standard error is the delta-method one for a ratio estimator.
pub fn oracle_theta(y: f64, kernel: &KernelSpec, config: &SimConfig) -> Result<OracleValue> {
    config.check_oracle()?;
    if !y.is_finite() {
        return Err(domain("conditioning value is not finite"));
    }
    let key = oracle_key("theta", y, 0, kernel, config);
    let cache = OracleCache::new(config.cache_dir.clone());
    cache.get_or_compute(&key, || {
        let total = config.oracle_size;
        let chunks = total.div_ceil(THETA_CHUNK);
        let seed = config.cell_seed("oracle-theta", &key);
        let law = config.law;
        let parts = config.execution.map(chunks, |c| {
            let len = THETA_CHUNK.min(total - c * THETA_CHUNK);
            let mut rng = seed.substream(c as u64).rng();
            let mut s = ThetaSums {
                lo: f64::INFINITY,
                hi: f64::NEG_INFINITY,
                ..Default::default()
            };
            for _ in 0..len {
                let v = law.sample(&mut rng);
                let z = v - y;
                let w = kernel.weight(z);
                if w > 0.0 {
                    s.w.add(w);
                    s.wz.add(w * z);
                    s.w2.add(w * w);
                    s.w2z.add(w * w * z);
                    s.w2z2.add(w * w * z * z);
                    s.count += 1;
                    s.lo = s.lo.min(v);
                    s.hi = s.hi.max(v);
                }
            }
            s
        });
        let mut acc = [Neumaier::default(); 5];
        let (mut count, mut lo, mut hi) = (0usize, f64::INFINITY, f64::NEG_INFINITY);
        for p in &parts {
            for (a, s) in acc.iter_mut().zip([p.w, p.wz, p.w2, p.w2z, p.w2z2]) {
                a.add(s.total());
            }
            count += p.count;
            lo = lo.min(p.lo);
            hi = hi.max(p.hi);
        }
        let [w, wz, w2, w2z, w2z2] = acc.map(|a| a.total());
        if count == 0 || w <= 0.0 {
            return Err(VwaError::DegenerateNeighborhood { current: y, deleted: None });
        }
        let t = wz / w;
        let value = (y + t).clamp(lo, hi);
        let resid = (w2z2 - 2.0 * t * w2z + t * t * w2).max(0.0);
        Ok(OracleValue {
            value,
            mc_se: resid.sqrt() / w,
            valid: count,
            dropped: total - count,
        })
    })
}

/// Conditional-mean oracle tabulated on a regular grid and interpolated
/// linearly; used as the target when the current value is random.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionalMeanGrid {
    lo: f64,
    step: f64,
    values: Vec<f64>,
    n: usize,
    kernel: KernelSpec,
}

impl ConditionalMeanGrid {
    /// Grid of multiples of `step` covering `[lo, hi]`.
    pub fn build(n: usize, kernel: &KernelSpec, config: &SimConfig, lo: f64, hi: f64, step: f64) -> Result<Self> {
        if !(step > 0.0 && lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(domain("grid needs finite lo <= hi and step > 0"));
        }
        let first = (lo / step).floor() as i64;
        let last = (hi / step).ceil() as i64;
        let values = (first..=last)
            .map(|k| oracle_conditional_mean(k as f64 * step, n, kernel, config).map(|v| v.value))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            lo: first as f64 * step,
            step,
            values,
            n,
            kernel: *kernel,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Interpolated value, or `None` outside the grid.
    pub fn interpolate(&self, y: f64) -> Option<f64> {
        let pos = (y - self.lo) / self.step;
        if !(pos >= 0.0) || pos > (self.values.len() - 1) as f64 {
            return None;
        }
        if self.values.len() == 1 {
            return Some(self.values[0]);
        }
        let i = (pos.floor() as usize).min(self.values.len() - 2);
        let frac = pos - i as f64;
        Some(self.values[i] + frac * (self.values[i + 1] - self.values[i]))
    }

    /// Interpolated value inside the grid, direct oracle outside it.
    pub fn target(&self, y: f64, config: &SimConfig) -> Result<f64> {
        match self.interpolate(y) {
            Some(v) => Ok(v),
            None => oracle_conditional_mean(y, self.n, &self.kernel, config).map(|v| v.value),
        }
    }
}
