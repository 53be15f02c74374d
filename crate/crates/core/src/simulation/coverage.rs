//! Coverage experiments.

use super::oracle::{oracle_conditional_mean, oracle_theta, ConditionalMeanGrid};
use super::report::{CoverageReport, CoverageRow, QCell, TableLayout};
use super::{bits, SimConfig};
use crate::error::Result;
use crate::estimator::{vwa, NeighborhoodSample};
use crate::intervals::{
    normal_interval, run_two_stage, BootstrapPlan, IntervalMethod, IntervalTarget, NStarRule,
    TwoStageDesign,
};
use crate::kernels::KernelSpec;
use crate::resampling::{bootstrap_variance_unconditional, jackknife};
use crate::rng::RngSeed;
use crate::sum;

const REAL_GRID_STEP: f64 = 0.025;
const REAL_GRID_TAIL: f64 = 0.0005;

/// Per-run outcome: `None` for a dropped run, else one flag per level.
type Hits = Option<Vec<bool>>;

/// Counts hits per level over runs, turning degeneracies into drops.
fn tally(outcomes: Vec<Result<Hits>>, levels: usize) -> Result<(Vec<usize>, usize, usize)> {
    let mut hits = vec![0usize; levels];
    let (mut valid, mut dropped) = (0, 0);
    for o in outcomes {
        match o {
            Ok(Some(flags)) => {
                valid += 1;
                for (h, f) in hits.iter_mut().zip(flags) {
                    *h += f as usize;
                }
            }
            Ok(None) => dropped += 1,
            Err(e) if e.is_degeneracy() => dropped += 1,
            Err(e) => return Err(e),
        }
    }
    Ok((hits, valid, dropped))
}

/// Scores jackknife intervals at every level against `target`.
fn score_conditional(
    sample: &NeighborhoodSample,
    kernel: &KernelSpec,
    alphas: &[f64],
    target: f64,
) -> Result<Hits> {
    let center = vwa(sample, kernel)?.value;
    let sd = jackknife(sample, kernel)?.sd_hat();
    let flags = alphas
        .iter()
        .map(|&a| {
            normal_interval(
                center,
                sd,
                a,
                IntervalMethod::ConditionalJackknife,
                IntervalTarget::ConditionalMean,
            )
            .map(|ci| ci.contains(target))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Some(flags))
}

/// Jackknife intervals conditional on `Y_n = F^{-1}(q)`, scored against the
/// conditional-mean oracle; with `real_ci`, also with a random current value.
pub fn coverage_conditional_fixed(config: &SimConfig) -> Result<CoverageReport> {
    config.validate()?;
    config.check_oracle()?;
    let law = config.law;
    let alphas: Vec<f64> = config.levels.iter().map(|l| 1.0 - l).collect();
    let mut report = CoverageReport::new(
        "Coverage of conditional fixed-sample jackknife intervals",
        TableLayout::ByQuantile,
    );
    report.notes.push(config.describe());
    report
        .notes
        .push("target: E(mu_hat_n | Y_n = y) by Monte Carlo oracle".into());
    if config.real_ci {
        report.notes.push(format!(
            "real: current drawn from the law; target interpolated on a {REAL_GRID_STEP} grid"
        ));
    }

    for &sigma in &config.sigmas {
        let kernel = config.kernel(sigma)?;
        for &n in &config.sample_sizes {
            let mut cells: Vec<(QCell, Vec<usize>, usize, usize)> = Vec::new();
            for &q in &config.q_grid {
                let y = law.quantile(q)?;
                let target = oracle_conditional_mean(y, n, &kernel, config)?.value;
                let cell = config.cell_seed("classi", &format!("{}|{n}|{}", bits(sigma), bits(q)));
                let outcomes = config.execution.map(config.runs, |r| {
                    let mut rng = cell.substream(r as u64).rng();
                    let mut neighbors = vec![0.0; n - 1];
                    law.fill(&mut rng, &mut neighbors);
                    let sample = NeighborhoodSample::new(neighbors, y)?;
                    score_conditional(&sample, &kernel, &alphas, target)
                });
                let (hits, valid, dropped) = tally(outcomes, alphas.len())?;
                cells.push((QCell::Quantile(q), hits, valid, dropped));
            }
            if config.real_ci {
                let lo = law.quantile(REAL_GRID_TAIL)?;
                let hi = law.quantile(1.0 - REAL_GRID_TAIL)?;
                let grid = ConditionalMeanGrid::build(n, &kernel, config, lo, hi, REAL_GRID_STEP)?;
                let cell = config.cell_seed("classi-real", &format!("{}|{n}", bits(sigma)));
                let outcomes = config.execution.map(config.runs, |r| {
                    let mut rng = cell.substream(r as u64).rng();
                    let mut series = vec![0.0; n];
                    law.fill(&mut rng, &mut series);
                    let sample = NeighborhoodSample::from_series(&series)?;
                    let target = grid.target(sample.current(), config)?;
                    score_conditional(&sample, &kernel, &alphas, target)
                });
                let (hits, valid, dropped) = tally(outcomes, alphas.len())?;
                cells.push((QCell::Real, hits, valid, dropped));
            }
            for (li, &level) in config.levels.iter().enumerate() {
                for (q, hits, valid, dropped) in &cells {
                    report.rows.push(CoverageRow::from_hits(
                        sigma, n as f64, None, level, *q, hits[li], *valid, *dropped, None,
                    ));
                }
            }
        }
    }
    Ok(report)
}

/// Unconditional intervals with a bootstrap variance, scored against the
/// center of the law. One bootstrap per run serves every level.
pub fn coverage_unconditional(config: &SimConfig) -> Result<CoverageReport> {
    config.validate()?;
    config.check_boot()?;
    let law = config.law;
    let truth = law.center();
    let alphas: Vec<f64> = config.levels.iter().map(|l| 1.0 - l).collect();
    let mut report = CoverageReport::new(
        format!(
            "Coverage of unconditional fixed-sample intervals, bootstrap variance with B = {}",
            config.boot_reps
        ),
        TableLayout::ByLevel,
    );
    report.notes.push(config.describe());
    report.notes.push(format!("target: signal level m = {truth}"));

    for &sigma in &config.sigmas {
        let kernel = config.kernel(sigma)?;
        for &n in &config.sample_sizes {
            let cell = config.cell_seed("marginal-bt", &format!("{}|{n}", bits(sigma)));
            let outcomes = config.execution.map(config.runs, |r| -> Result<Hits> {
                let run = cell.substream(r as u64);
                let mut rng = run.rng();
                let mut series = vec![0.0; n];
                law.fill(&mut rng, &mut series);
                let sample = NeighborhoodSample::from_series(&series)?;
                let center = vwa(&sample, &kernel)?.value;
                let boot =
                    bootstrap_variance_unconditional(&series, &kernel, config.boot_reps, run.substream(0))?;
                let sd = boot.variance.sqrt();
                let flags = alphas
                    .iter()
                    .map(|&a| {
                        normal_interval(
                            center,
                            sd,
                            a,
                            IntervalMethod::UnconditionalBootstrap,
                            IntervalTarget::TrueMean,
                        )
                        .map(|ci| ci.contains(truth))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Some(flags))
            });
            let (hits, valid, dropped) = tally(outcomes, alphas.len())?;
            for (li, &level) in config.levels.iter().enumerate() {
                report.rows.push(CoverageRow::from_hits(
                    sigma,
                    n as f64,
                    None,
                    level,
                    QCell::Marginal,
                    hits[li],
                    valid,
                    dropped,
                    None,
                ));
            }
        }
    }
    Ok(report)
}

/// How the fixed-width experiment chooses its first stage and critical value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FixedWidthMode {
    /// CLT critical value, first-stage sizes from `config.initial_sizes`.
    FixedInitial,
    /// CLT critical value, first-stage size from the `floor(z / d)` rule.
    Rule,
    /// Bootstrap-t critical value, first-stage size from the rule.
    Bootstrap,
}

impl FixedWidthMode {
    fn label(&self) -> &'static str {
        match self {
            FixedWidthMode::FixedInitial => "fw-fixed",
            FixedWidthMode::Rule => "fw-rule",
            FixedWidthMode::Bootstrap => "fw-boot",
        }
    }
}

/// Two-stage fixed-width intervals `[mu_hat_N +- d]` conditional on
/// `Y_N = F^{-1}(q)`, scored against the `theta(y)` oracle. Rows carry the
/// mean final sample size.
pub fn coverage_fixed_width(config: &SimConfig, mode: FixedWidthMode) -> Result<CoverageReport> {
    config.validate()?;
    config.check_oracle()?;
    if mode == FixedWidthMode::Bootstrap {
        config.check_boot()?;
    }
    let law = config.law;
    let title = match mode {
        FixedWidthMode::FixedInitial => "Fixed-width intervals with fixed initial sample size",
        FixedWidthMode::Rule => "Two-stage fixed-width intervals, initial size from the rule",
        FixedWidthMode::Bootstrap => "Bootstrapped two-stage fixed-width intervals",
    };
    let mut report = CoverageReport::new(title, TableLayout::ByQuantile);
    report.notes.push(config.describe());
    report.notes.push("target: theta(y) by Monte Carlo oracle; second line: mean N".into());
    if mode == FixedWidthMode::FixedInitial {
        report
            .notes
            .push("assumption: kernel bandwidth for fixed initial sizes is not given; sigma from config".into());
    }
    let initial: Vec<Option<usize>> = match mode {
        FixedWidthMode::FixedInitial => config.initial_sizes.iter().map(|&n0| Some(n0)).collect(),
        _ => vec![None],
    };

    for &sigma in &config.sigmas {
        let kernel = config.kernel(sigma)?;
        for &d in &config.precisions {
            for &n0 in &initial {
                for &level in &config.levels {
                    let alpha = 1.0 - level;
                    let mut design = match mode {
                        FixedWidthMode::Bootstrap => TwoStageDesign::bootstrap(
                            d,
                            alpha,
                            BootstrapPlan {
                                reps: config.boot_reps,
                                n_star: NStarRule::Capped,
                                smooth: config.smooth,
                            },
                        ),
                        _ => TwoStageDesign::clt(d, alpha),
                    };
                    if let Some(n0) = n0 {
                        design = design.with_initial_size(n0);
                    }
                    design.first_stage_size()?;
                    for &q in &config.q_grid {
                        let y = law.quantile(q)?;
                        let target = oracle_theta(y, &kernel, config)?.value;
                        let cell = config.cell_seed(
                            mode.label(),
                            &format!(
                                "{}|{}|{}|{}|{}",
                                bits(sigma),
                                bits(d),
                                n0.unwrap_or(0),
                                bits(level),
                                bits(q)
                            ),
                        );
                        let outcomes = config.execution.map(config.runs, |r| {
                            fixed_width_run(cell.substream(r as u64), y, target, &kernel, &design, config)
                        });
                        let mut sizes = Vec::with_capacity(outcomes.len());
                        let (mut hits, mut dropped) = (0usize, 0usize);
                        for o in outcomes {
                            match o {
                                Ok((hit, size)) => {
                                    hits += hit as usize;
                                    sizes.push(size as f64);
                                }
                                Err(e) if e.is_degeneracy() => dropped += 1,
                                Err(e) => return Err(e),
                            }
                        }
                        let valid = sizes.len();
                        let mean_n = (valid > 0).then(|| sum::sum(sizes.iter().copied()) / valid as f64);
                        report.rows.push(CoverageRow::from_hits(
                            sigma,
                            d,
                            n0,
                            level,
                            QCell::Quantile(q),
                            hits,
                            valid,
                            dropped,
                            mean_n,
                        ));
                    }
                }
            }
        }
    }
    Ok(report)
}

fn fixed_width_run(
    run: RngSeed,
    current: f64,
    target: f64,
    kernel: &KernelSpec,
    design: &TwoStageDesign,
    config: &SimConfig,
) -> Result<(bool, usize)> {
    let mut source = config.law.source(run.rng());
    let out = run_two_stage(&mut source, current, kernel, design, run.substream(0))?;
    Ok((out.interval.contains(target), out.final_size))
}
