//! Monte Carlo harness for coverage studies.
//!
//! Every experiment cell gets its own seed derived from the master seed, a
//! label for the experiment and a tag built from the cell parameters; run `r`
//! of a cell then uses substream `r`. Runs are independent work items and are
//! reduced in run order, so results do not depend on the thread count.

mod coverage;
mod law;
mod oracle;
mod profile;
mod report;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

pub use coverage::{
    coverage_conditional_fixed, coverage_fixed_width, coverage_unconditional, FixedWidthMode,
};
pub use law::{ErrorLaw, LawSource};
pub use oracle::{
    oracle_conditional_mean, oracle_theta, ConditionalMeanGrid, OracleCache, OracleValue,
    ORACLE_CACHE_ENV,
};
pub use profile::{conditional_sd, profile_grid, sd_profile, SdPoint};
pub use report::{format_sig17, CoverageReport, CoverageRow, QCell, TableLayout};

use crate::error::{domain, Result, VwaError};
use crate::exec::Execution;
use crate::kernels::{KernelFamily, KernelSpec};
use crate::rng::{label_tag, RngSeed};

/// Experiment presets, one per reference table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TableId {
    /// Conditional fixed-sample jackknife intervals.
    Classi,
    /// Unconditional intervals with a bootstrap variance.
    MarginalBt,
    /// Fixed-width intervals with a fixed first-stage size.
    FwFixed,
    /// Two-stage fixed-width intervals, first-stage size from the rule.
    FwRule,
    /// Bootstrap-t two-stage fixed-width intervals.
    FwBoot,
    /// Standard deviation of the estimator across the current value.
    SdProfile,
}

impl TableId {
    pub const ALL: [TableId; 6] = [
        TableId::Classi,
        TableId::MarginalBt,
        TableId::FwFixed,
        TableId::FwRule,
        TableId::FwBoot,
        TableId::SdProfile,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            TableId::Classi => "classi",
            TableId::MarginalBt => "marginal-bt",
            TableId::FwFixed => "fw-fixed",
            TableId::FwRule => "fw-rule",
            TableId::FwBoot => "fw-boot",
            TableId::SdProfile => "sd-profile",
        }
    }
}

impl fmt::Display for TableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TableId {
    type Err = VwaError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        TableId::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| domain(format!("unknown table id '{s}'")))
    }
}

const Q_GRID: [f64; 7] = [0.05, 0.1, 0.3, 0.5, 0.8, 0.9, 0.95];

/// Settings shared by all experiments. Grids that an experiment does not use
/// are ignored.
#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub law: ErrorLaw,
    pub kernel_family: KernelFamily,
    pub ridge: f64,
    pub sigmas: Vec<f64>,
    /// Sample sizes `n`, the current observation included.
    pub sample_sizes: Vec<usize>,
    /// Half-widths `d` of fixed-width intervals.
    pub precisions: Vec<f64>,
    /// First-stage sizes for [`FixedWidthMode::FixedInitial`] grids.
    pub initial_sizes: Vec<usize>,
    pub levels: Vec<f64>,
    pub q_grid: Vec<f64>,
    pub runs: usize,
    pub boot_reps: usize,
    /// Smooth (kernel) bootstrap in the bootstrap-t two-stage procedure.
    pub smooth: bool,
    /// Total number of draws behind each oracle value.
    pub oracle_size: usize,
    /// Also score intervals with a randomly drawn current observation.
    pub real_ci: bool,
    pub seed: RngSeed,
    pub execution: Execution,
    pub cache_dir: Option<PathBuf>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            law: ErrorLaw::StandardNormal,
            kernel_family: KernelFamily::Gaussian,
            ridge: 0.0,
            sigmas: vec![0.6],
            sample_sizes: vec![20],
            precisions: vec![0.2],
            initial_sizes: vec![20],
            levels: vec![0.95],
            q_grid: Q_GRID.to_vec(),
            runs: 10_000,
            boot_reps: 1_000,
            smooth: true,
            oracle_size: 200_000,
            real_ci: false,
            seed: RngSeed::from_master(20_240_601),
            execution: Execution::default(),
            cache_dir: None,
        }
    }
}

impl SimConfig {
    /// Desk-scale preset: 10,000 runs, oracle budget 200,000, B = 1,000
    /// (2,000 with the smooth bootstrap for `fw-boot`).
    pub fn preset(table: TableId) -> Self {
        let base = SimConfig::default();
        match table {
            TableId::Classi => SimConfig {
                sigmas: vec![0.4, 0.6, 0.8],
                sample_sizes: vec![20, 30, 50],
                levels: vec![0.95],
                real_ci: true,
                ..base
            },
            TableId::MarginalBt => SimConfig {
                sigmas: vec![0.4, 0.6, 0.8, 1.0, 1.2, 1.4, 1.6, 2.0],
                sample_sizes: vec![20, 30, 50, 75, 100],
                levels: vec![0.75, 0.8, 0.9, 0.925, 0.95, 0.975, 0.99, 0.999],
                ..base
            },
            TableId::FwFixed => SimConfig {
                precisions: vec![0.2, 0.1],
                initial_sizes: vec![20, 30, 50],
                levels: vec![0.9, 0.95, 0.975],
                ..base
            },
            TableId::FwRule => SimConfig {
                precisions: vec![0.2, 0.1],
                levels: vec![0.9, 0.95, 0.975],
                ..base
            },
            TableId::FwBoot => SimConfig {
                precisions: vec![0.2, 0.1],
                levels: vec![0.9, 0.95, 0.975],
                boot_reps: 2_000,
                ..base
            },
            TableId::SdProfile => SimConfig {
                sigmas: vec![0.4],
                sample_sizes: vec![30],
                ..base
            },
        }
    }

    /// Full-scale run counts: 50,000 runs (10,000 for `marginal-bt`),
    /// oracle budget 500,000, and B = 2,500 for `marginal-bt`.
    pub fn full_scale(mut self, table: TableId) -> Self {
        self.oracle_size = 500_000;
        match table {
            TableId::MarginalBt => {
                self.runs = 10_000;
                self.boot_reps = 2_500;
            }
            TableId::FwBoot => {
                self.runs = 50_000;
                self.boot_reps = 2_000;
            }
            _ => self.runs = 50_000,
        }
        self
    }

    /// Sets `cache_dir` from the oracle cache environment variable, if set.
    pub fn cache_from_env(mut self) -> Self {
        if let Some(dir) = std::env::var_os(ORACLE_CACHE_ENV) {
            if !dir.is_empty() {
                self.cache_dir = Some(PathBuf::from(dir));
            }
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs < 100 {
            return Err(domain(format!("runs must be at least 100, got {}", self.runs)));
        }
        for &q in &self.q_grid {
            if !(q > 0.0 && q < 1.0) {
                return Err(domain(format!("q must lie in (0, 1), got {q}")));
            }
        }
        for &level in &self.levels {
            if !(level > 0.0 && level < 1.0) {
                return Err(domain(format!("level must lie in (0, 1), got {level}")));
            }
        }
        for &s in &self.sigmas {
            KernelSpec::with_ridge(self.kernel_family, s, self.ridge)?;
        }
        for &n in &self.sample_sizes {
            if n < 3 {
                return Err(domain(format!("sample size must be at least 3, got {n}")));
            }
        }
        for &d in &self.precisions {
            if !(d.is_finite() && d > 0.0) {
                return Err(domain(format!("precision d must be positive, got {d}")));
            }
        }
        Ok(())
    }

    pub(crate) fn check_oracle(&self) -> Result<()> {
        if self.oracle_size < 10_000 {
            return Err(domain(format!(
                "oracle_size must be at least 10000, got {}",
                self.oracle_size
            )));
        }
        Ok(())
    }

    pub(crate) fn check_boot(&self) -> Result<()> {
        if self.boot_reps < 100 {
            return Err(domain(format!(
                "boot_reps must be at least 100, got {}",
                self.boot_reps
            )));
        }
        Ok(())
    }

    pub fn kernel(&self, sigma: f64) -> Result<KernelSpec> {
        KernelSpec::with_ridge(self.kernel_family, sigma, self.ridge)
    }

    /// Seed for one experiment cell.
    pub(crate) fn cell_seed(&self, experiment: &str, cell: &str) -> RngSeed {
        self.seed.derive(label_tag(experiment), label_tag(cell))
    }

    /// One-line description for report headers.
    pub fn describe(&self) -> String {
        format!(
            "law={} kernel={} ridge={} runs={} boot_reps={} smooth={} oracle_size={} seed={}:{}",
            self.law,
            self.kernel_family,
            self.ridge,
            self.runs,
            self.boot_reps,
            self.smooth,
            self.oracle_size,
            self.seed.master,
            self.seed.stream
        )
    }
}

/// Stable text key for a floating parameter.
pub(crate) fn bits(x: f64) -> String {
    format!("{:016x}", x.to_bits())
}
