//! Deterministic work-ratio sweeps, CSV output and the closed forms for two
//! harmonic particles with infinitely many levels.

use std::io;

use crate::error::{ensure_positive, invalid, Error, Result};
use crate::exec::{map_ordered, Execution};
use crate::manybody::{CanonicalEnsemble, EnsembleSpec, MethodChoice, Statistics};
use crate::spectrum::{SpectrumKind, SpectrumSpec};
use crate::thermo::{run_cycle_with, CycleResult, Geometry, WorkComparison};

/// Default number of hot-bath temperatures per curve.
pub const DEFAULT_STEPS: usize = 200;
/// Upper end of the default hot-bath axis, in units of `T_c`.
pub const DEFAULT_HOT_MAX: f64 = 20.0;
/// Level counts used for the per-`N` families of curves.
pub const DEFAULT_LEVEL_LIST: [usize; 7] = [3, 4, 10, 25, 50, 100, 150];
/// Largest particle count in the multiparticle presets.
pub const DEFAULT_MAX_PARTICLES: usize = 10;

/// Agreement demanded of the recursion against enumeration in cross-checked sweeps.
const CROSS_CHECK_TOLERANCE: f64 = 1e-9;

/// Strictly increasing axis values.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    values: Vec<f64>,
}

impl SweepGrid {
    /// `steps` evenly spaced values from `min` to `max` inclusive.
    pub fn linspace(min: f64, max: f64, steps: usize) -> Result<Self> {
        Self::check_range(min, max, steps)?;
        let span = max - min;
        let last = (steps - 1) as f64;
        Self::from_values((0..steps).map(|i| min + span * i as f64 / last).collect())
    }

    /// `steps` evenly spaced values on `(min, max]`, excluding `min`.
    pub fn half_open(min: f64, max: f64, steps: usize) -> Result<Self> {
        Self::check_range(min, max, steps)?;
        let span = max - min;
        Self::from_values((1..=steps).map(|i| min + span * i as f64 / steps as f64).collect())
    }

    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("grid has no values"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("grid values must be finite"));
        }
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("grid values must be strictly increasing"));
        }
        Ok(SweepGrid { values })
    }

    fn check_range(min: f64, max: f64, steps: usize) -> Result<()> {
        if steps < 2 {
            return Err(invalid(format!("grid needs at least 2 steps, got {steps}")));
        }
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(invalid(format!("grid range [{min}, {max}] is empty")));
        }
        Ok(())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// How the `ratio` column is normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RatioNorm {
    /// `W / W_s`
    PerSystem,
    /// `W / (M·W_s)`
    PerParticle,
}

/// One curve: fixed substance and geometry, swept hot-bath temperature.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCase {
    pub spectrum: SpectrumSpec,
    pub statistics: Statistics,
    pub particles: usize,
    pub levels: usize,
    /// Widths and cold temperature; the hot temperature is taken from the grid.
    pub base: Geometry,
    pub hot_temperatures: SweepGrid,
    pub norm: RatioNorm,
    pub method: MethodChoice,
    /// Re-evaluate with enumeration where the state space fits under the
    /// default cap and fail on disagreement.
    pub cross_check: bool,
}

impl SweepCase {
    /// A curve at `L1 = 1`, `T_c = 1`, energy scale `lambda`.
    #[allow(clippy::too_many_arguments)]
    pub fn in_regime(
        kind: SpectrumKind,
        lambda: f64,
        statistics: Statistics,
        particles: usize,
        levels: usize,
        compression_ratio: f64,
        hot_temperatures: SweepGrid,
        norm: RatioNorm,
    ) -> Result<Self> {
        let base = Geometry::new(1.0, compression_ratio, 1.0, hot_temperatures.values()[0])?;
        Ok(SweepCase {
            spectrum: SpectrumSpec::new(kind, lambda)?,
            statistics,
            particles,
            levels,
            base,
            hot_temperatures,
            norm,
            method: MethodChoice::default(),
            cross_check: false,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioRecord {
    pub spectrum: SpectrumKind,
    pub statistics: Statistics,
    pub particles: usize,
    pub levels: usize,
    pub geometry: Geometry,
    pub lambda: f64,
    pub cycle: CycleResult,
    pub single_work: f64,
    pub ratio: Option<f64>,
}

impl RatioRecord {
    pub fn positive_work(&self) -> bool {
        self.cycle.positive_work()
    }
}

struct Prepared {
    many: CanonicalEnsemble,
    single: CanonicalEnsemble,
    check: Option<CanonicalEnsemble>,
}

fn prepare(case: &SweepCase) -> Result<Prepared> {
    let ensemble = EnsembleSpec::new(case.statistics, case.particles, case.levels)?;
    let single = EnsembleSpec::single(case.levels)?;
    let fits = ensemble
        .state_count()
        .is_some_and(|c| c <= crate::manybody::DEFAULT_ENUMERATION_CAP);
    let check = if case.cross_check && fits {
        Some(CanonicalEnsemble::new(ensemble, case.spectrum, MethodChoice::Enumeration)?)
    } else {
        None
    };
    Ok(Prepared {
        many: CanonicalEnsemble::new(ensemble, case.spectrum, case.method)?,
        single: CanonicalEnsemble::new(single, case.spectrum, case.method)?,
        check,
    })
}

fn evaluate(case: &SweepCase, prepared: &Prepared, hot: f64) -> Result<RatioRecord> {
    let geometry = case.base.with_hot_temperature(hot);
    let cycle = run_cycle_with(&prepared.many, &geometry)?;
    let single = run_cycle_with(&prepared.single, &geometry)?;
    if let Some(check) = &prepared.check {
        let other = run_cycle_with(check, &geometry)?;
        let deviation = (other.work - cycle.work).abs();
        if deviation > CROSS_CHECK_TOLERANCE * cycle.work.abs().max(1.0) {
            return Err(Error::BackendMismatch {
                quantity: "work",
                deviation,
            });
        }
    }
    let norm = match case.norm {
        RatioNorm::PerSystem => 1.0,
        RatioNorm::PerParticle => case.particles as f64,
    };
    let comparison = WorkComparison::new(cycle, single, norm);
    Ok(RatioRecord {
        spectrum: case.spectrum.kind(),
        statistics: case.statistics,
        particles: case.particles,
        levels: case.levels,
        geometry,
        lambda: geometry.regime_parameter(&case.spectrum),
        cycle,
        single_work: single.work,
        ratio: comparison.ratio,
    })
}

/// Evaluates every case at every grid temperature. Rows come out in case
/// order and, within a case, in grid order, whatever the execution mode.
pub fn run_sweep(cases: &[SweepCase], execution: Execution) -> Result<Vec<RatioRecord>> {
    let prepared = map_ordered(cases, execution, prepare)
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, f64)> = cases
        .iter()
        .enumerate()
        .flat_map(|(i, c)| c.hot_temperatures.values().iter().map(move |&t| (i, t)))
        .collect();
    map_ordered(&jobs, execution, |&(i, hot)| evaluate(&cases[i], &prepared[i], hot))
        .into_iter()
        .collect()
}

const TWO_SPECIES: [Statistics; 2] = [Statistics::Boson, Statistics::Fermion];

fn two_particle_curves(lambda: f64, ratios: &[f64], levels: &[usize], steps: usize) -> Result<Vec<SweepCase>> {
    let mut cases = Vec::new();
    for &r in ratios {
        let grid = SweepGrid::half_open(r * r, DEFAULT_HOT_MAX, steps)?;
        for &n in levels {
            for stats in TWO_SPECIES {
                cases.push(SweepCase::in_regime(
                    SpectrumKind::Box,
                    lambda,
                    stats,
                    2,
                    n,
                    r,
                    grid.clone(),
                    RatioNorm::PerSystem,
                )?);
            }
        }
    }
    Ok(cases)
}

/// Three-level pairs at `λ = 1` for `R ∈ {2, 3, 4}`.
pub fn fig2_cases(steps: usize) -> Result<Vec<SweepCase>> {
    two_particle_curves(1.0, &[2.0, 3.0, 4.0], &[3], steps)
}

/// Low-temperature regime `λ = 20`, `R = 2`, `N ∈ {3, 4}`.
pub fn fig3_cases(steps: usize) -> Result<Vec<SweepCase>> {
    two_particle_curves(20.0, &[2.0], &[3, 4], steps)
}

/// Per-`N` pair curves at `R = 2` for a given regime parameter.
pub fn fig45_cases(lambda: f64, levels: &[usize], steps: usize) -> Result<Vec<SweepCase>> {
    two_particle_curves(lambda, &[2.0], levels, steps)
}

/// `W_M/(M·W_s)` against `M` at `R = 2`, `T_h = 5·T_c`, one curve per `N`.
/// Uses the recursion, cross-checked by enumeration where feasible. Fermion
/// rows with `M > N` are omitted.
pub fn fig67_cases(lambda: f64, particles: &[usize], levels: &[usize]) -> Result<Vec<SweepCase>> {
    let grid = SweepGrid::from_values(vec![5.0])?;
    let mut cases = Vec::new();
    for stats in TWO_SPECIES {
        for &n in levels {
            for &m in particles {
                if stats == Statistics::Fermion && m > n {
                    continue;
                }
                let mut case = SweepCase::in_regime(
                    SpectrumKind::Box,
                    lambda,
                    stats,
                    m,
                    n,
                    2.0,
                    grid.clone(),
                    RatioNorm::PerParticle,
                )?;
                case.method = MethodChoice::Recursion;
                case.cross_check = true;
                cases.push(case);
            }
        }
    }
    Ok(cases)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    Two,
    Three,
    Four,
    Five,
    Six,
    Seven,
}

impl Figure {
    pub fn from_number(n: u32) -> Result<Self> {
        Ok(match n {
            2 => Figure::Two,
            3 => Figure::Three,
            4 => Figure::Four,
            5 => Figure::Five,
            6 => Figure::Six,
            7 => Figure::Seven,
            other => return Err(invalid(format!("no preset for figure {other}; expected 2-7"))),
        })
    }

    /// Preset curves with the default axes.
    pub fn cases(self) -> Result<Vec<SweepCase>> {
        let particles: Vec<usize> = (1..=DEFAULT_MAX_PARTICLES).collect();
        match self {
            Figure::Two => fig2_cases(DEFAULT_STEPS),
            Figure::Three => fig3_cases(DEFAULT_STEPS),
            Figure::Four => fig45_cases(0.05, &DEFAULT_LEVEL_LIST, DEFAULT_STEPS),
            Figure::Five => fig45_cases(1.0, &DEFAULT_LEVEL_LIST, DEFAULT_STEPS),
            Figure::Six => fig67_cases(0.05, &particles, &DEFAULT_LEVEL_LIST),
            Figure::Seven => fig67_cases(1.0, &particles, &DEFAULT_LEVEL_LIST),
        }
    }
}

pub const CSV_HEADER: [&str; 20] = [
    "spectrum",
    "statistics",
    "M",
    "N",
    "L1",
    "R",
    "Tc",
    "Th",
    "lambda",
    "U1",
    "U2",
    "U3",
    "U4",
    "Qh",
    "Qc",
    "W",
    "eta",
    "Ws",
    "ratio",
    "positive_work",
];

/// 17 significant digits: enough to round-trip any `f64`.
fn number(x: f64) -> String {
    format!("{x:.16e}")
}

fn optional(x: Option<f64>) -> String {
    x.map(number).unwrap_or_default()
}

/// Writes the header and one row per record. Undefined efficiencies and
/// ratios are left empty.
pub fn write_csv<W: io::Write>(records: &[RatioRecord], out: W) -> io::Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(CSV_HEADER)?;
    for r in records {
        let c = &r.cycle;
        let g = &r.geometry;
        writer.write_record([
            r.spectrum.name().to_string(),
            r.statistics.name().to_string(),
            r.particles.to_string(),
            r.levels.to_string(),
            number(g.narrow_width),
            number(g.compression_ratio),
            number(g.cold_temperature),
            number(g.hot_temperature),
            number(r.lambda),
            number(c.u1),
            number(c.u2),
            number(c.u3),
            number(c.u4),
            number(c.heat_in),
            number(c.heat_out),
            number(c.work),
            optional(c.efficiency),
            number(r.single_work),
            optional(r.ratio),
            r.positive_work().to_string(),
        ])?;
    }
    writer.flush()
}

pub fn csv_string(records: &[RatioRecord]) -> String {
    let mut buf = Vec::new();
    write_csv(records, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv output is ASCII")
}

/// `q = exp(−c/(L²T))` for unit harmonic spacing.
fn harmonic_q(temperature: f64, width: f64, scale: f64) -> Result<f64> {
    ensure_positive("temperature", temperature)?;
    ensure_positive("width", width)?;
    ensure_positive("scale", scale)?;
    Ok((-scale / (width * width * temperature)).exp())
}

/// Partition function of two harmonic bosons or fermions with all levels kept:
/// `Z_B = 1/((1−q)²(1+q))`, `Z_F = q·Z_B`.
pub fn harmonic_closed_form_z(statistics: Statistics, temperature: f64, width: f64, scale: f64) -> Result<f64> {
    let q = harmonic_q(temperature, width, scale)?;
    let boson = 1.0 / ((1.0 - q).powi(2) * (1.0 + q));
    match statistics {
        Statistics::Boson => Ok(boson),
        Statistics::Fermion => Ok(q * boson),
        Statistics::Distinguishable => Err(Error::Unsupported(
            "closed form covers bosons and fermions only".into(),
        )),
    }
}

/// `3·coth(a) + csch(a)`
fn coth_csch(a: f64) -> f64 {
    (3.0 * a.cosh() + 1.0) / a.sinh()
}

fn harmonic_arguments(narrow_width: f64, compression_ratio: f64, cold: f64, hot: f64, scale: f64) -> Result<(f64, f64)> {
    let geometry = Geometry::new(narrow_width, compression_ratio, cold, hot)?;
    ensure_positive("scale", scale)?;
    let l2 = geometry.wide_width();
    let a_hot = scale / (narrow_width * narrow_width * hot);
    let a_cold = scale / (l2 * l2 * cold);
    Ok((a_hot, a_cold))
}

/// Heat absorbed on the hot isochore by two harmonic particles (either
/// statistics) with all levels kept:
/// `Q_h = c/(2L1²)·[3coth a_h + csch a_h − 3coth a_c − csch a_c]`,
/// `a_h = c/(L1²T_h)`, `a_c = c/(L2²T_c)`.
pub fn harmonic_closed_form_heat_in(narrow_width: f64, compression_ratio: f64, cold: f64, hot: f64, scale: f64) -> Result<f64> {
    let (a_hot, a_cold) = harmonic_arguments(narrow_width, compression_ratio, cold, hot, scale)?;
    Ok(scale / (2.0 * narrow_width * narrow_width) * (coth_csch(a_hot) - coth_csch(a_cold)))
}

/// Net work of the same cycle, `W = (1 − R⁻²)·Q_h`.
pub fn harmonic_closed_form_work(narrow_width: f64, compression_ratio: f64, cold: f64, hot: f64, scale: f64) -> Result<f64> {
    let heat_in = harmonic_closed_form_heat_in(narrow_width, compression_ratio, cold, hot, scale)?;
    Ok((1.0 - compression_ratio.powi(-2)) * heat_in)
}
