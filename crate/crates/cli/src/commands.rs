use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use otto_core::exec::{configure_threads, Execution};
use otto_core::experiments::{run_sweep, write_csv, Figure, RatioNorm, RatioRecord, SweepCase, SweepGrid};
use otto_core::thermo::{run_cycle, work_ratio_multiparticle, SINGLE_WORK_FLOOR};
use otto_core::validate::run_all;
use otto_core::{CycleConfig, EnsembleSpec, Geometry, MethodChoice, SpectrumKind, SpectrumSpec, Statistics};

use crate::config::ConfigFile;
use crate::{CliError, EngineArgs, RatioArgs, SweepArgs};

/// Fully validated engine parameters. The hot temperature stays optional
/// because sweeps take it from a grid.
struct Engine {
    spectrum: SpectrumSpec,
    statistics: Vec<Statistics>,
    particles: usize,
    levels: usize,
    narrow_width: f64,
    compression_ratio: f64,
    cold_temperature: f64,
    hot_temperature: Option<f64>,
    method: MethodChoice,
}

impl Engine {
    fn geometry(&self, hot: f64) -> Result<Geometry, CliError> {
        Ok(Geometry::new(self.narrow_width, self.compression_ratio, self.cold_temperature, hot)?)
    }

    fn single_statistics(&self) -> Result<Statistics, CliError> {
        match self.statistics.as_slice() {
            [s] => Ok(*s),
            _ => Err(CliError::usage("expected exactly one --stats value")),
        }
    }

    fn require_hot(&self) -> Result<f64, CliError> {
        self.hot_temperature.ok_or_else(|| CliError::usage("missing --Th"))
    }
}

fn parse<T: FromStr>(value: &str) -> Result<T, CliError>
where
    T::Err: Display,
{
    value.parse().map_err(|e: T::Err| CliError::usage(e.to_string()))
}

fn resolve(args: &EngineArgs, config: &ConfigFile) -> Result<Engine, CliError> {
    let kind: SpectrumKind = parse(&config.merge(args.spectrum.clone(), "spectrum")?.unwrap_or_else(|| "box".into()))?;
    let statistics = config
        .merge(args.stats.clone(), "stats")?
        .unwrap_or_else(|| "boson".into())
        .split(',')
        .map(|s| parse::<Statistics>(s.trim()))
        .collect::<Result<Vec<_>, _>>()?;
    let particles = config.merge(args.particles, "particles")?.unwrap_or(2);
    let levels = config.merge(args.levels, "levels")?.unwrap_or(3);
    let method: MethodChoice = parse(&config.merge(args.method.clone(), "method")?.unwrap_or_else(|| "auto".into()))?;

    let lambda = config.merge(args.lambda, "lambda")?;
    let scale = config.merge(args.scale, "scale")?;
    let l1 = config.merge(args.l1, "L1")?;
    let tc = config.merge(args.tc, "Tc")?;
    let (scale, narrow_width, cold_temperature) = match lambda {
        Some(lambda) => {
            if scale.is_some() || l1.is_some() || tc.is_some() {
                return Err(CliError::usage("--lambda fixes L1 = Tc = 1 and derives the scale; drop --scale, --L1 and --Tc"));
            }
            (lambda, 1.0, 1.0)
        }
        None => (scale.unwrap_or(1.0), l1.unwrap_or(1.0), tc.unwrap_or(1.0)),
    };
    let compression_ratio = config.merge(args.r, "R")?.unwrap_or(2.0);
    let hot_temperature = config.merge(args.th, "Th")?;

    let spectrum = SpectrumSpec::new(kind, scale)?;
    // Range checks on widths and temperatures before the state-space check.
    Geometry::new(narrow_width, compression_ratio, cold_temperature, hot_temperature.unwrap_or(1.0))?;
    for &s in &statistics {
        EnsembleSpec::new(s, particles, levels)?;
    }
    Ok(Engine {
        spectrum,
        statistics,
        particles,
        levels,
        narrow_width,
        compression_ratio,
        cold_temperature,
        hot_temperature,
        method,
    })
}

fn load_config(args: &EngineArgs) -> Result<ConfigFile, CliError> {
    match &args.config {
        Some(path) => ConfigFile::load(path),
        None => Ok(ConfigFile::default()),
    }
}

fn show(value: Option<f64>, missing: &str) -> String {
    value.map(|v| v.to_string()).unwrap_or_else(|| missing.to_string())
}

pub fn cycle(args: &EngineArgs) -> Result<(), CliError> {
    let engine = resolve(args, &load_config(args)?)?;
    let statistics = engine.single_statistics()?;
    let geometry = engine.geometry(engine.require_hot()?)?;
    let ensemble = EnsembleSpec::new(statistics, engine.particles, engine.levels)?;
    let config = CycleConfig::new(engine.spectrum, ensemble, geometry)?.with_method(engine.method);
    let r = run_cycle(&config)?;

    println!("spectrum = {}", engine.spectrum.kind());
    println!("statistics = {statistics}");
    println!("M = {}", engine.particles);
    println!("N = {}", engine.levels);
    println!("scale = {}", engine.spectrum.scale());
    println!("L1 = {}", geometry.narrow_width);
    println!("L2 = {}", geometry.wide_width());
    println!("R = {}", geometry.compression_ratio);
    println!("Tc = {}", geometry.cold_temperature);
    println!("Th = {}", geometry.hot_temperature);
    println!("lambda = {}", geometry.regime_parameter(&engine.spectrum));
    println!("U1 = {}", r.u1);
    println!("U2 = {}", r.u2);
    println!("U3 = {}", r.u3);
    println!("U4 = {}", r.u4);
    println!("Qh = {}", r.heat_in);
    println!("Qc = {}", r.heat_out);
    println!("W = {}", r.work);
    println!("eta = {}", show(r.efficiency, "not-an-engine"));
    println!("positive_work = {}", r.positive_work());
    println!("Th_threshold = {}", config.positive_work_threshold());
    Ok(())
}

pub fn ratio(args: &RatioArgs) -> Result<(), CliError> {
    let engine = resolve(&args.engine, &load_config(&args.engine)?)?;
    let statistics = engine.single_statistics()?;
    let geometry = engine.geometry(engine.require_hot()?)?;
    let cmp = work_ratio_multiparticle(
        &engine.spectrum,
        engine.levels,
        statistics,
        engine.particles,
        &geometry,
        engine.method,
    )?;
    let per_system = (cmp.single.work.abs() >= SINGLE_WORK_FLOOR).then(|| cmp.cycle.work / cmp.single.work);
    println!("spectrum = {}", engine.spectrum.kind());
    println!("statistics = {statistics}");
    println!("M = {}", engine.particles);
    println!("N = {}", engine.levels);
    println!("lambda = {}", geometry.regime_parameter(&engine.spectrum));
    println!("W = {}", cmp.cycle.work);
    println!("Ws = {}", cmp.single.work);
    println!("W/Ws = {}", show(per_system, "undefined"));
    println!("W/(M Ws) = {}", show(cmp.ratio, "undefined"));
    println!("positive_work = {}", cmp.cycle.positive_work());
    Ok(())
}

fn explicit_cases(args: &SweepArgs) -> Result<Vec<SweepCase>, CliError> {
    let config = load_config(&args.engine)?;
    let engine = resolve(&args.engine, &config)?;
    let th_min = config.merge(args.th_min, "Th-min")?.ok_or_else(|| CliError::usage("missing --Th-min"))?;
    let th_max = config.merge(args.th_max, "Th-max")?.ok_or_else(|| CliError::usage("missing --Th-max"))?;
    let steps = config.merge(args.steps, "steps")?.unwrap_or(otto_core::experiments::DEFAULT_STEPS);
    let norm = match config.merge(args.normalize.clone(), "normalize")?.as_deref() {
        None | Some("system") => RatioNorm::PerSystem,
        Some("particle") => RatioNorm::PerParticle,
        Some(other) => return Err(CliError::usage(format!("unknown normalization `{other}`"))),
    };
    let grid = SweepGrid::linspace(th_min, th_max, steps)?;
    let hots: Vec<f64> = grid.values().iter().map(|t| t * engine.cold_temperature).collect();
    let grid = SweepGrid::from_values(hots)?;
    let base = engine.geometry(grid.values()[0])?;
    Ok(engine
        .statistics
        .iter()
        .map(|&statistics| SweepCase {
            spectrum: engine.spectrum,
            statistics,
            particles: engine.particles,
            levels: engine.levels,
            base,
            hot_temperatures: grid.clone(),
            norm,
            method: engine.method,
            cross_check: false,
        })
        .collect())
}

fn engine_flags_given(e: &EngineArgs) -> bool {
    e.config.is_some()
        || e.spectrum.is_some()
        || e.stats.is_some()
        || e.particles.is_some()
        || e.levels.is_some()
        || e.l1.is_some()
        || e.r.is_some()
        || e.tc.is_some()
        || e.th.is_some()
        || e.scale.is_some()
        || e.lambda.is_some()
        || e.method.is_some()
}

fn write_atomically(path: &Path, records: &[RatioRecord]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let fail = |e: std::io::Error| CliError::io(format!("cannot write {}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(fail)?;
    write_csv(records, &mut tmp).map_err(fail)?;
    tmp.as_file().sync_all().map_err(fail)?;
    tmp.persist(path).map_err(|e| fail(e.error))?;
    Ok(())
}

pub fn sweep(args: &SweepArgs) -> Result<(), CliError> {
    let cases = match args.figure {
        Some(n) => {
            if engine_flags_given(&args.engine)
                || args.th_min.is_some()
                || args.th_max.is_some()
                || args.steps.is_some()
                || args.normalize.is_some()
            {
                return Err(CliError::usage("--figure presets fix every parameter; drop the explicit grid flags"));
            }
            Figure::from_number(n)?.cases()?
        }
        None => explicit_cases(args)?,
    };
    if let Some(threads) = args.threads {
        configure_threads(threads).map_err(CliError::usage)?;
    }
    let execution = if args.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let records = run_sweep(&cases, execution)?;
    write_atomically(&args.output, &records)?;
    println!("{} rows written to {}", records.len(), args.output.display());
    Ok(())
}

pub fn validate() -> Result<(), CliError> {
    let checks = run_all();
    let mut failed = 0;
    for c in &checks {
        let status = if c.passed() { "PASS" } else { "FAIL" };
        if !c.passed() {
            failed += 1;
        }
        println!(
            "{status}  {}: deviation {:.3e}, tolerance {:.1e}",
            c.name, c.deviation, c.tolerance
        );
    }
    if failed > 0 {
        return Err(CliError {
            code: 1,
            message: format!("{failed} of {} checks failed", checks.len()),
        });
    }
    println!("all {} checks passed", checks.len());
    Ok(())
}
