use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use vwa_core::intervals::{PartialTwoStage, TwoStageRun};
use vwa_core::simulation::{
    coverage_conditional_fixed, coverage_fixed_width, coverage_unconditional, format_sig17,
    sd_profile, CoverageReport, ErrorLaw, FixedWidthMode, SdPoint, SimConfig, TableId,
};
use vwa_core::{
    conditional_fixed_sample_ci, reconstruct, run_two_stage, unconditional_fixed_sample_ci,
    BootstrapPlan, Execution, KernelFamily, KernelSpec, NStarRule, NeighborhoodSample, RngSeed,
    TwoStageDesign,
};

use crate::config::FileConfig;
use crate::input::{read_column, Column};
use crate::{
    CiArgs, Cli, CliError, Command, DenoiseArgs, FixedWidthArgs, InputArgs, KernelArgs, SdProfileArgs,
    SimulateArgs,
};

const DEFAULT_SEED: u64 = 20_240_601;
const DEFAULT_SIGMA: f64 = 0.6;

pub fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    match cli.command {
        Command::Denoise(args) => denoise(args, &cfg),
        Command::Ci(args) => ci(args, &cfg),
        Command::FixedWidth(args) => fixed_width(args, &cfg),
        Command::Simulate(args) => simulate(args, &cfg),
        Command::SdProfile(args) => profile(args, &cfg),
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn parse_with<T, E: std::fmt::Display>(
    value: Option<String>,
    what: &str,
    parse: impl Fn(&str) -> Result<T, E>,
) -> Result<Option<T>, CliError> {
    value
        .map(|v| parse(&v).map_err(|e| usage(format!("--{what}: {e}"))))
        .transpose()
}

fn kernel_family(flag: Option<String>, cfg: &FileConfig) -> Result<KernelFamily, CliError> {
    let name = cfg.pick(flag, "kernel")?;
    Ok(parse_with(name, "kernel", str::parse::<KernelFamily>)?.unwrap_or(KernelFamily::Gaussian))
}

fn kernel(args: KernelArgs, cfg: &FileConfig, default_sigma: f64) -> Result<KernelSpec, CliError> {
    let family = kernel_family(args.kernel, cfg)?;
    let sigma = cfg.pick_or(args.sigma, "sigma", default_sigma)?;
    let ridge = cfg.pick_or(args.ridge, "ridge", 0.0)?;
    Ok(KernelSpec::with_ridge(family, sigma, ridge)?)
}

fn law(flag: Option<String>, cfg: &FileConfig, key: &str) -> Result<Option<ErrorLaw>, CliError> {
    parse_with(cfg.pick(flag, key)?, key, str::parse::<ErrorLaw>)
}

fn level_to_alpha(level: f64) -> Result<f64, CliError> {
    if level > 0.0 && level < 1.0 {
        Ok(1.0 - level)
    } else {
        Err(usage(format!("--level must lie in (0, 1), got {level}")))
    }
}

fn read_input(args: InputArgs, cfg: &FileConfig) -> Result<Vec<f64>, CliError> {
    let path = cfg
        .pick(args.input, "input")?
        .ok_or_else(|| usage("--input is required"))?;
    let column = Column::from_flag(cfg.pick(args.column, "column")?);
    read_column(&path, &column)
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| usage(format!("cannot create {}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn denoise(args: DenoiseArgs, cfg: &FileConfig) -> Result<(), CliError> {
    let kernel = kernel(args.kernel, cfg, DEFAULT_SIGMA)?;
    let output = cfg.pick(args.output, "output")?;
    let series = read_input(args.input, cfg)?;
    let rec = reconstruct(&series, &kernel, Execution::Serial)?;

    let mut writer = csv::Writer::from_writer(open_output(output.as_deref())?);
    writer
        .write_record(["index", "y", "mu_hat", "degenerate"])
        .map_err(|e| usage(e.to_string()))?;
    for (i, ((y, mu), deg)) in series.iter().zip(&rec.values).zip(&rec.degenerate).enumerate() {
        writer
            .write_record([
                i.to_string(),
                format_sig17(*y),
                format_sig17(*mu),
                deg.to_string(),
            ])
            .map_err(|e| usage(e.to_string()))?;
    }
    writer.flush()?;

    let degenerate = rec.degenerate.iter().filter(|&&d| d).count();
    if degenerate > 0 {
        return Err(CliError::Degenerate(format!(
            "{degenerate} point(s) had no positive weight; the observation itself was written"
        )));
    }
    Ok(())
}

fn ci(args: CiArgs, cfg: &FileConfig) -> Result<(), CliError> {
    let kernel = kernel(args.kernel, cfg, DEFAULT_SIGMA)?;
    let method = cfg.pick_or(args.method, "method", "jackknife".to_string())?;
    let level = cfg.pick_or(args.level, "level", 0.95)?;
    let alpha = level_to_alpha(level)?;
    let reps = cfg.pick_or(args.boot_reps, "boot-reps", 1000)?;
    let seed = cfg.pick_or(args.seed, "seed", DEFAULT_SEED)?;
    let series = read_input(args.input, cfg)?;

    let interval = match method.as_str() {
        "jackknife" => {
            let sample = NeighborhoodSample::from_series(&series)?;
            conditional_fixed_sample_ci(&sample, &kernel, alpha)?
        }
        "bootstrap" => unconditional_fixed_sample_ci(&series, &kernel, alpha, reps, RngSeed::from_master(seed))?,
        other => return Err(usage(format!("--method must be jackknife or bootstrap, got '{other}'"))),
    };
    println!(
        "{},{},{},{},{}",
        method,
        format_sig17(interval.center),
        format_sig17(interval.lower()),
        format_sig17(interval.upper()),
        level
    );
    Ok(())
}

fn fixed_width(args: FixedWidthArgs, cfg: &FileConfig) -> Result<(), CliError> {
    let kernel = kernel(args.kernel, cfg, DEFAULT_SIGMA)?;
    let current = cfg
        .pick(args.current, "current")?
        .ok_or_else(|| usage("--current is required"))?;
    let d = cfg.pick(args.d, "d")?.ok_or_else(|| usage("--d is required"))?;
    let level = cfg.pick_or(args.level, "level", 0.95)?;
    let alpha = level_to_alpha(level)?;
    let variant = cfg.pick_or(args.variant, "variant", "clt".to_string())?;
    let n0 = cfg.pick(args.n0, "n0")?;
    let seed = RngSeed::from_master(cfg.pick_or(args.seed, "seed", DEFAULT_SEED)?);

    let mut design = match variant.as_str() {
        "clt" => TwoStageDesign::clt(d, alpha),
        "bootstrap" => TwoStageDesign::bootstrap(
            d,
            alpha,
            BootstrapPlan {
                reps: cfg.pick_or(args.boot_reps, "boot-reps", BootstrapPlan::default().reps)?,
                n_star: NStarRule::Capped,
                smooth: cfg.pick_or(args.smooth, "smooth", true)?,
            },
        ),
        other => return Err(usage(format!("--variant must be clt or bootstrap, got '{other}'"))),
    };
    if let Some(n0) = n0 {
        design = design.with_initial_size(n0);
    }

    let generate = law(args.generate, cfg, "generate")?;
    let has_input = args.input.input.is_some() || cfg.raw("input").is_some();
    let run = match generate {
        Some(_) if has_input => return Err(usage("--input and --generate are mutually exclusive")),
        Some(law) => {
            let mut source = law.source(seed.substream(0).rng());
            run_two_stage(&mut source, current, &kernel, &design, seed.substream(1))?
        }
        None if has_input => {
            let data = read_input(args.input, cfg)?;
            let mut source = data.into_iter();
            run_two_stage(&mut source, current, &kernel, &design, seed.substream(1))?
        }
        None => return Err(usage("one of --input or --generate is required")),
    };
    println!("{}", run_line(&run));
    Ok(())
}

fn run_line(run: &TwoStageRun) -> String {
    format!(
        "{},{},{},{},{},{},{}",
        run.n0,
        format_sig17(run.sigma_tilde_sq),
        run.final_size,
        format_sig17(run.center),
        format_sig17(run.interval.lower()),
        format_sig17(run.interval.upper()),
        run.variant.name()
    )
}

/// Partial trace printed when the source runs dry.
pub fn partial_line(p: &PartialTwoStage) -> String {
    format!(
        "{},{},{},{},{},{}",
        p.n0,
        p.sigma_tilde_sq.map(format_sig17).unwrap_or_default(),
        p.final_size.map(|n| n.to_string()).unwrap_or_default(),
        p.required_neighbors,
        p.drawn,
        p.variant.name()
    )
}

fn simulate(args: SimulateArgs, cfg: &FileConfig) -> Result<(), CliError> {
    let table: TableId = cfg
        .pick(args.table, "table")?
        .ok_or_else(|| usage("--table is required"))?
        .parse()
        .map_err(|e: vwa_core::VwaError| usage(e.to_string()))?;
    let full = cfg.switch(args.full_scale, "full-scale")?;
    let mut config = SimConfig::preset(table);
    if full {
        config = config.full_scale(table);
    }
    config = config.cache_from_env();
    if cfg.switch(args.serial, "serial")? {
        config.execution = Execution::Serial;
    }
    if let Some(v) = cfg.pick(args.runs, "runs")? {
        config.runs = v;
    }
    if let Some(v) = cfg.pick(args.oracle_size, "oracle-size")? {
        config.oracle_size = v;
    }
    if let Some(v) = cfg.pick(args.boot_reps, "boot-reps")? {
        config.boot_reps = v;
    }
    if let Some(v) = cfg.pick(args.smooth, "smooth")? {
        config.smooth = v;
    }
    if let Some(v) = cfg.pick(args.seed, "seed")? {
        config.seed = RngSeed::from_master(v);
    }
    if let Some(v) = law(args.law, cfg, "law")? {
        config.law = v;
    }
    if args.kernel.is_some() || cfg.raw("kernel").is_some() {
        config.kernel_family = kernel_family(args.kernel, cfg)?;
    }
    if let Some(v) = cfg.pick(args.ridge, "ridge")? {
        config.ridge = v;
    }
    if let Some(v) = cfg.pick_list(args.sigma, "sigma")? {
        config.sigmas = v;
    }
    if let Some(v) = cfg.pick_list(args.n, "n")? {
        config.sample_sizes = v;
    }
    if let Some(v) = cfg.pick_list(args.d, "d")? {
        config.precisions = v;
    }
    if let Some(v) = cfg.pick_list(args.n0, "n0")? {
        config.initial_sizes = v;
    }
    if let Some(v) = cfg.pick_list(args.level, "level")? {
        config.levels = v;
    }
    if let Some(v) = cfg.pick_list(args.q, "q")? {
        config.q_grid = v;
    }
    let output = cfg.pick(args.output, "output")?;
    let scale = if full { "scale: full" } else { "scale: desk" };

    if table == TableId::SdProfile {
        let n = *config
            .sample_sizes
            .first()
            .ok_or_else(|| usage("sd-profile needs a sample size"))?;
        let points = run_profile(&config, n, 0.025)?;
        return write_profile(&points, &config, scale, output.as_deref(), true);
    }

    let mut report: CoverageReport = match table {
        TableId::Classi => coverage_conditional_fixed(&config)?,
        TableId::MarginalBt => coverage_unconditional(&config)?,
        TableId::FwFixed => coverage_fixed_width(&config, FixedWidthMode::FixedInitial)?,
        TableId::FwRule => coverage_fixed_width(&config, FixedWidthMode::Rule)?,
        TableId::FwBoot => coverage_fixed_width(&config, FixedWidthMode::Bootstrap)?,
        TableId::SdProfile => unreachable!("handled above"),
    };
    report.notes.push(format!("table: {table}; {scale}"));
    match output {
        Some(path) => {
            let mut out = open_output(Some(&path))?;
            report.write_csv(&mut out)?;
            out.flush()?;
            print!("{}", report.render_text());
        }
        None => {
            let mut out = open_output(None)?;
            report.write_csv(&mut out)?;
            out.flush()?;
            eprint!("{}", report.render_text());
        }
    }
    Ok(())
}

fn run_profile(config: &SimConfig, n: usize, step: f64) -> Result<Vec<SdPoint>, CliError> {
    let lo = config.law.quantile(0.05)?;
    let hi = config.law.quantile(0.95)?;
    Ok(sd_profile(config, [lo, hi], step, n)?)
}

fn write_profile(
    points: &[SdPoint],
    config: &SimConfig,
    scale: &str,
    output: Option<&Path>,
    text: bool,
) -> Result<(), CliError> {
    let mut out = open_output(output)?;
    writeln!(out, "# sd profile: sigma={} n-runs per point={}", config.sigmas[0], config.runs)?;
    writeln!(out, "# {}", config.describe())?;
    writeln!(out, "# {scale}")?;
    writeln!(out, "y,sd,mc_se,runs")?;
    for p in points {
        writeln!(out, "{},{},{},{}", format_sig17(p.y), format_sig17(p.sd), format_sig17(p.mc_se), p.runs)?;
    }
    out.flush()?;
    if text && output.is_some() {
        println!("{:>8} {:>8} {:>8}", "y", "sd", "mc_se");
        for p in points {
            println!("{:>8.4} {:>8.4} {:>8.4}", p.y, p.sd, p.mc_se);
        }
    }
    Ok(())
}

fn profile(args: SdProfileArgs, cfg: &FileConfig) -> Result<(), CliError> {
    let kernel = kernel(args.kernel, cfg, 0.4)?;
    let mut config = SimConfig::preset(TableId::SdProfile).cache_from_env();
    config.kernel_family = kernel.family();
    config.ridge = kernel.ridge();
    config.sigmas = vec![kernel.scale()];
    if let Some(v) = cfg.pick(args.runs, "runs")? {
        config.runs = v;
    }
    if let Some(v) = cfg.pick(args.seed, "seed")? {
        config.seed = RngSeed::from_master(v);
    }
    if let Some(v) = law(args.law, cfg, "law")? {
        config.law = v;
    }
    if cfg.switch(args.serial, "serial")? {
        config.execution = Execution::Serial;
    }
    let n = cfg.pick_or(args.n, "n", 30)?;
    let step = cfg.pick_or(args.step, "step", 0.025)?;
    let output = cfg.pick(args.output, "output")?;
    let points = run_profile(&config, n, step)?;
    write_profile(&points, &config, "scale: desk", output.as_deref(), true)
}
