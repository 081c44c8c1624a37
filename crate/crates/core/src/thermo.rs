//! Four-stroke quantum Otto cycle.
//!
//! ```text
//!   1 ──hot isochore (T_h, L1)──▶ 2
//!   ▲                             │ adiabat L1 → L2
//!   │ adiabat L2 → L1             ▼
//!   4 ◀──cold isochore (T_c, L2)── 3
//! ```
//!
//! Corners 2 and 4 are thermal equilibria; corners 3 and 1 inherit their
//! occupations, so only the energy scale changes along the adiabats.

use crate::error::{ensure_positive, invalid, Result};
use crate::manybody::{enumerate_states, CanonicalEnsemble, EnsembleSpec, MethodChoice, Statistics};
use crate::numeric::KahanSum;
use crate::spectrum::SpectrumSpec;

/// Below this magnitude the single-particle work is treated as zero and
/// ratios are reported as undefined.
pub const SINGLE_WORK_FLOOR: f64 = 1e-14;

/// Work or heat smaller than this fraction of the corner energies counts as
/// zero when classifying the cycle.
const RELATIVE_WORK_TOLERANCE: f64 = 1e-12;

/// Widths and bath temperatures of a cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    /// `L1`, the width during the hot isochore.
    pub narrow_width: f64,
    /// `R = L2/L1 > 1`.
    pub compression_ratio: f64,
    pub cold_temperature: f64,
    pub hot_temperature: f64,
}

impl Geometry {
    pub fn new(narrow_width: f64, compression_ratio: f64, cold_temperature: f64, hot_temperature: f64) -> Result<Self> {
        let g = Geometry {
            narrow_width,
            compression_ratio,
            cold_temperature,
            hot_temperature,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("L1", self.narrow_width)?;
        ensure_positive("T_c", self.cold_temperature)?;
        ensure_positive("T_h", self.hot_temperature)?;
        if !(self.compression_ratio.is_finite() && self.compression_ratio > 1.0) {
            return Err(invalid(format!(
                "compression ratio R must exceed 1, got {}",
                self.compression_ratio
            )));
        }
        Ok(())
    }

    pub fn wide_width(&self) -> f64 {
        self.compression_ratio * self.narrow_width
    }

    pub fn with_hot_temperature(self, hot_temperature: f64) -> Self {
        Geometry {
            hot_temperature,
            ..self
        }
    }

    /// `R^p·T_c`: the cycle produces work exactly when `T_h` exceeds it.
    pub fn positive_work_threshold(&self, spectrum: &SpectrumSpec) -> f64 {
        spectrum.power().apply(self.compression_ratio) * self.cold_temperature
    }

    /// `c/(L1^p·T_c)`, the dimensionless regime parameter.
    pub fn regime_parameter(&self, spectrum: &SpectrumSpec) -> f64 {
        spectrum.scale() / (spectrum.power().apply(self.narrow_width) * self.cold_temperature)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleConfig {
    pub spectrum: SpectrumSpec,
    pub ensemble: EnsembleSpec,
    pub geometry: Geometry,
    pub method: MethodChoice,
}

impl CycleConfig {
    pub fn new(spectrum: SpectrumSpec, ensemble: EnsembleSpec, geometry: Geometry) -> Result<Self> {
        geometry.validate()?;
        Ok(CycleConfig {
            spectrum,
            ensemble,
            geometry,
            method: MethodChoice::default(),
        })
    }

    pub fn with_method(self, method: MethodChoice) -> Self {
        CycleConfig { method, ..self }
    }

    pub fn positive_work_threshold(&self) -> f64 {
        self.geometry.positive_work_threshold(&self.spectrum)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleResult {
    pub u1: f64,
    pub u2: f64,
    pub u3: f64,
    pub u4: f64,
    /// `Q_h = U2 − U1`, absorbed from the hot bath.
    pub heat_in: f64,
    /// `Q_c = U3 − U4`, released to the cold bath.
    pub heat_out: f64,
    /// `W = Q_h − Q_c`.
    pub work: f64,
    /// `1 − (L1/L2)^p`, present only when the cycle absorbs heat from the hot bath.
    pub efficiency: Option<f64>,
}

impl CycleResult {
    fn noise_floor(&self) -> f64 {
        RELATIVE_WORK_TOLERANCE * (self.u1.abs() + self.u2.abs())
    }

    pub fn positive_work(&self) -> bool {
        self.work > self.noise_floor()
    }
}

pub fn run_cycle(config: &CycleConfig) -> Result<CycleResult> {
    config.geometry.validate()?;
    let substance = CanonicalEnsemble::new(config.ensemble, config.spectrum, config.method)?;
    run_cycle_with(&substance, &config.geometry)
}

/// Runs the cycle on a prepared working substance.
pub fn run_cycle_with(substance: &CanonicalEnsemble, geometry: &Geometry) -> Result<CycleResult> {
    geometry.validate()?;
    let spectrum = substance.spectrum();
    let (l1, l2) = (geometry.narrow_width, geometry.wide_width());
    let u2 = substance.internal_energy(geometry.hot_temperature, l1)?;
    let u4 = substance.internal_energy(geometry.cold_temperature, l2)?;
    let compress = spectrum.adiabatic_energy_ratio(l1, l2)?;
    let expand = spectrum.adiabatic_energy_ratio(l2, l1)?;
    let u3 = u2 * compress;
    let u1 = u4 * expand;
    let heat_in = u2 - u1;
    let heat_out = u3 - u4;
    let work = heat_in - heat_out;
    let mut result = CycleResult {
        u1,
        u2,
        u3,
        u4,
        heat_in,
        heat_out,
        work,
        efficiency: None,
    };
    if heat_in > result.noise_floor() {
        result.efficiency = Some(1.0 - compress);
    }
    Ok(result)
}

/// Gibbs probabilities of the enumerated configurations, in the order of
/// [`enumerate_states`].
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalOccupation {
    pub probabilities: Vec<f64>,
}

pub fn thermal_occupation(
    ensemble: &EnsembleSpec,
    spectrum: &SpectrumSpec,
    temperature: f64,
    width: f64,
) -> Result<ThermalOccupation> {
    ensure_positive("temperature", temperature)?;
    let factor = spectrum.width_factor(width)?;
    let states = enumerate_states(ensemble, spectrum)?;
    let beta = 1.0 / temperature;
    // states are sorted, so the first one is the ground configuration
    let ground = states[0].energy_coefficient;
    let weights: Vec<f64> = states
        .iter()
        .map(|s| (-beta * (s.energy_coefficient - ground) * factor).exp())
        .collect();
    let z = weights.iter().copied().collect::<KahanSum>().value();
    Ok(ThermalOccupation {
        probabilities: weights.into_iter().map(|w| w / z).collect(),
    })
}

/// Work of an `M`-particle substance against a single particle under the
/// same widths, temperatures and level truncation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorkComparison {
    pub cycle: CycleResult,
    pub single: CycleResult,
    /// `W / (norm · W_s)`, or `None` when `|W_s|` is below [`SINGLE_WORK_FLOOR`].
    pub ratio: Option<f64>,
}

impl WorkComparison {
    pub fn new(cycle: CycleResult, single: CycleResult, norm: f64) -> Self {
        let ratio = (single.work.abs() >= SINGLE_WORK_FLOOR).then(|| cycle.work / (norm * single.work));
        WorkComparison { cycle, single, ratio }
    }
}

fn compare(
    spectrum: &SpectrumSpec,
    ensemble: EnsembleSpec,
    geometry: &Geometry,
    method: MethodChoice,
    norm: f64,
) -> Result<WorkComparison> {
    let many = run_cycle(&CycleConfig::new(*spectrum, ensemble, *geometry)?.with_method(method))?;
    let single_ensemble = EnsembleSpec::single(ensemble.levels())?;
    let single = run_cycle(&CycleConfig::new(*spectrum, single_ensemble, *geometry)?.with_method(method))?;
    Ok(WorkComparison::new(many, single, norm))
}

/// `W^i / W_s` for two particles.
pub fn work_ratio_two_particle(
    spectrum: &SpectrumSpec,
    levels: usize,
    statistics: Statistics,
    geometry: &Geometry,
    method: MethodChoice,
) -> Result<WorkComparison> {
    compare(spectrum, EnsembleSpec::new(statistics, 2, levels)?, geometry, method, 1.0)
}

/// `W^i_M / (M·W_s)`.
pub fn work_ratio_multiparticle(
    spectrum: &SpectrumSpec,
    levels: usize,
    statistics: Statistics,
    particles: usize,
    geometry: &Geometry,
    method: MethodChoice,
) -> Result<WorkComparison> {
    let ensemble = EnsembleSpec::new(statistics, particles, levels)?;
    compare(spectrum, ensemble, geometry, method, particles as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::spectrum::SpectrumKind;

    fn boxed() -> SpectrumSpec {
        SpectrumSpec::unit(SpectrumKind::Box)
    }

    fn cycle(stats: Statistics, m: usize, n: usize, geometry: Geometry) -> CycleResult {
        let cfg = CycleConfig::new(boxed(), EnsembleSpec::new(stats, m, n).unwrap(), geometry).unwrap();
        run_cycle(&cfg).unwrap()
    }

    #[test]
    fn geometry_validation() {
        assert!(Geometry::new(1.0, 1.0, 1.0, 2.0).is_err());
        assert!(Geometry::new(1.0, 0.5, 1.0, 2.0).is_err());
        assert!(Geometry::new(0.0, 2.0, 1.0, 2.0).is_err());
        assert!(Geometry::new(1.0, 2.0, -1.0, 2.0).is_err());
        assert!(Geometry::new(1.0, 2.0, 1.0, f64::INFINITY).is_err());
        let g = Geometry::new(1.5, 2.0, 1.0, 2.0).unwrap();
        assert_eq!(g.wide_width(), 3.0);
    }

    #[test]
    fn single_level_does_no_work() {
        let r = cycle(Statistics::Boson, 1, 1, Geometry::new(1.0, 2.0, 1.0, 8.0).unwrap());
        assert_eq!(r.work, 0.0);
        assert_eq!(r.heat_in, 0.0);
        assert!(!r.positive_work());
        assert_eq!(r.efficiency, None);
    }

    #[test]
    fn two_level_single_particle() {
        // oracle: two-level direct sums at the two equilibrium corners
        let u = |t: f64, l: f64| {
            let (e1, e2) = (1.0 / (l * l), 4.0 / (l * l));
            let (w1, w2) = ((-e1 / t).exp(), (-e2 / t).exp());
            (e1 * w1 + e2 * w2) / (w1 + w2)
        };
        let (u2, u4) = (u(8.0, 1.0), u(1.0, 2.0));
        let (u3, u1) = (u2 / 4.0, 4.0 * u4);
        let (qh, qc) = (u2 - u1, u3 - u4);
        for (x, approx) in [(u2, 2.2220), (u4, 0.4906), (qh, 0.2595), (qc, 0.0649), (qh - qc, 0.1947)] {
            assert!((x - approx).abs() < 1e-4, "{x} vs {approx}");
        }

        let r = cycle(Statistics::Boson, 1, 2, Geometry::new(1.0, 2.0, 1.0, 8.0).unwrap());
        assert!((r.u2 - u2).abs() < 1e-14);
        assert!((r.u4 - u4).abs() < 1e-14);
        assert!((r.heat_in - qh).abs() < 1e-14);
        assert!((r.heat_out - qc).abs() < 1e-14);
        assert!((r.work - (qh - qc)).abs() < 1e-14);
        assert_eq!(r.efficiency, Some(0.75));
        assert!(r.positive_work());
    }

    #[test]
    fn threshold_gives_zero_work() {
        for (stats, m, n) in [(Statistics::Boson, 2, 5), (Statistics::Fermion, 3, 6), (Statistics::Distinguishable, 2, 4)] {
            let r = cycle(stats, m, n, Geometry::new(1.0, 2.0, 1.0, 4.0).unwrap());
            assert!(r.work.abs() < 1e-10);
            assert!(!r.positive_work());
        }
    }

    #[test]
    fn corners_scale_along_adiabats() {
        let g = Geometry::new(0.7, 3.0, 0.5, 9.0).unwrap();
        let r = cycle(Statistics::Fermion, 2, 5, g);
        assert!((r.u3 - r.u2 / 9.0).abs() <= 1e-12 * r.u3);
        assert!((r.u1 - r.u4 * 9.0).abs() <= 1e-12 * r.u1);
        assert_eq!(r.work, r.heat_in - r.heat_out);
    }

    #[test]
    fn occupation_edge_cases() {
        let f = EnsembleSpec::new(Statistics::Fermion, 2, 2).unwrap();
        assert_eq!(thermal_occupation(&f, &boxed(), 0.3, 2.0).unwrap().probabilities, vec![1.0]);

        let b = EnsembleSpec::new(Statistics::Boson, 2, 2).unwrap();
        let hot = thermal_occupation(&b, &boxed(), 1e300, 1.0).unwrap();
        for p in hot.probabilities {
            assert!((p - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn occupation_six_level_bosons() {
        // oracle: six-term direct sum
        let energies = [2.0f64, 5.0, 8.0, 10.0, 13.0, 18.0];
        let z: f64 = energies.iter().map(|e| (-e).exp()).sum();
        let b = EnsembleSpec::new(Statistics::Boson, 2, 3).unwrap();
        let occ = thermal_occupation(&b, &boxed(), 1.0, 1.0).unwrap();
        for (p, e) in occ.probabilities.iter().zip(energies) {
            assert!((p - (-e).exp() / z).abs() < 1e-15);
        }
        assert!((occ.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn occupation_rejects_empty_space() {
        let e = EnsembleSpec::new(Statistics::Fermion, 3, 2);
        assert!(matches!(e, Err(Error::EmptyStateSpace { .. })));
    }

    #[test]
    fn thresholds() {
        let g = Geometry::new(1.0, 2.0, 1.0, 5.0).unwrap();
        assert_eq!(g.positive_work_threshold(&boxed()), 4.0);
        assert_eq!(g.positive_work_threshold(&SpectrumSpec::unit(SpectrumKind::RelativisticBox)), 2.0);
        let q = Geometry::new(1.0, 8.0, 1.0, 5.0).unwrap();
        assert_eq!(q.positive_work_threshold(&SpectrumSpec::unit(SpectrumKind::Quartic)), 16.0);
    }

    #[test]
    fn quartic_threshold_by_scan() {
        // oracle: scan W(T_h) for the sign change
        let spec = SpectrumSpec::unit(SpectrumKind::Quartic);
        let e = EnsembleSpec::single(4).unwrap();
        let mut last = None;
        let mut crossing = None;
        for i in 0..400 {
            let th = 10.0 + i as f64 * 0.025;
            let g = Geometry::new(1.0, 8.0, 1.0, th).unwrap();
            let w = run_cycle(&CycleConfig::new(spec, e, g).unwrap()).unwrap().work;
            if let Some(prev) = last {
                if prev <= 0.0 && w > 0.0 && crossing.is_none() {
                    crossing = Some(th);
                }
            }
            last = Some(w);
        }
        let crossing = crossing.unwrap();
        assert!((crossing - 16.0).abs() <= 0.025 + 1e-9);
    }

    #[test]
    fn one_particle_ratio_is_one() {
        let g = Geometry::new(1.0, 2.0, 1.0, 7.0).unwrap();
        for stats in Statistics::ALL {
            let r = work_ratio_multiparticle(&boxed(), 4, stats, 1, &g, MethodChoice::default()).unwrap();
            assert_eq!(r.ratio, Some(1.0));
        }
    }

    #[test]
    fn undefined_ratio_below_floor() {
        let g = Geometry::new(1.0, 2.0, 1.0, 4.0).unwrap();
        let r = work_ratio_two_particle(&boxed(), 1, Statistics::Boson, &g, MethodChoice::default()).unwrap();
        assert_eq!(r.ratio, None);
    }

    #[test]
    fn two_particle_ratios_intermediate_regime() {
        let g = Geometry::new(1.0, 2.0, 1.0, 10.0).unwrap();
        let b = work_ratio_two_particle(&boxed(), 3, Statistics::Boson, &g, MethodChoice::default()).unwrap();
        let f = work_ratio_two_particle(&boxed(), 3, Statistics::Fermion, &g, MethodChoice::default()).unwrap();
        assert!(b.ratio.unwrap() > 2.0);
        assert!(f.ratio.unwrap() < 2.0);
    }
}
