//! Canonical ensembles of `M` noninteracting particles on `N` truncated
//! single-particle levels.
//!
//! Two independent backends evaluate the partition function and internal
//! energy: explicit enumeration of the symmetrized many-body configurations,
//! and the particle-number recursion over single-particle partition functions
//! at stretched inverse temperatures.

mod enumeration;
mod recursion;

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use crate::error::{ensure_positive, invalid, Error, Result};
use crate::numeric::binomial;
use crate::spectrum::SpectrumSpec;

pub use enumeration::{enumerate_states, partition_by_enumeration};
pub use recursion::partition_by_recursion;

use enumeration::Shell;

/// Default ceiling on the state-space size for which `auto` enumerates.
pub const DEFAULT_ENUMERATION_CAP: u128 = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Statistics {
    Boson,
    Fermion,
    Distinguishable,
}

impl Statistics {
    pub const ALL: [Statistics; 3] = [
        Statistics::Boson,
        Statistics::Fermion,
        Statistics::Distinguishable,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Statistics::Boson => "boson",
            Statistics::Fermion => "fermion",
            Statistics::Distinguishable => "distinguishable",
        }
    }
}

impl fmt::Display for Statistics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Statistics {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "boson" | "bose" | "b" => Ok(Statistics::Boson),
            "fermion" | "fermi" | "f" => Ok(Statistics::Fermion),
            "distinguishable" | "boltzmann" | "d" => Ok(Statistics::Distinguishable),
            other => Err(invalid(format!("unknown statistics `{other}`"))),
        }
    }
}

/// Particle statistics, particle count `M` and level truncation `N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EnsembleSpec {
    statistics: Statistics,
    particles: usize,
    levels: usize,
}

impl EnsembleSpec {
    pub fn new(statistics: Statistics, particles: usize, levels: usize) -> Result<Self> {
        if particles == 0 {
            return Err(invalid("particle count must be at least 1"));
        }
        if levels == 0 {
            return Err(invalid("level count must be at least 1"));
        }
        if statistics == Statistics::Fermion && particles > levels {
            return Err(Error::EmptyStateSpace { particles, levels });
        }
        Ok(EnsembleSpec {
            statistics,
            particles,
            levels,
        })
    }

    /// One particle on `levels` levels. Statistics are irrelevant for a single
    /// particle; it is labelled as a boson.
    pub fn single(levels: usize) -> Result<Self> {
        Self::new(Statistics::Boson, 1, levels)
    }

    pub fn statistics(&self) -> Statistics {
        self.statistics
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    /// Number of many-body configurations; `None` if it exceeds `u128`.
    pub fn state_count(&self) -> Option<u128> {
        let (m, n) = (self.particles as u128, self.levels as u128);
        match self.statistics {
            Statistics::Boson => binomial(n + m - 1, m),
            Statistics::Fermion => binomial(n, m),
            Statistics::Distinguishable => {
                let m = u32::try_from(self.particles).ok()?;
                n.checked_pow(m)
            }
        }
    }
}

/// One many-body configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ManyBodyLevel {
    /// Quantum numbers of the occupied single-particle states, nondecreasing
    /// for bosons, strictly increasing for fermions and ordered per particle
    /// for distinguishable particles.
    pub occupation: Vec<u64>,
    /// Total energy times `L^p`.
    pub energy_coefficient: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Enumeration,
    Recursion,
    /// `Z = Z₁^M` for distinguishable particles too numerous to enumerate.
    Factorized,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartitionEvaluation {
    pub log_z: f64,
    pub internal_energy: f64,
    pub method: Method,
}

/// Backend selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodChoice {
    Enumeration,
    Recursion,
    /// Enumerate when the state space holds at most `cap` configurations,
    /// otherwise recurse (falling back to enumeration on cancellation).
    Auto { cap: u128 },
}

impl Default for MethodChoice {
    fn default() -> Self {
        MethodChoice::Auto {
            cap: DEFAULT_ENUMERATION_CAP,
        }
    }
}

impl FromStr for MethodChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "enumeration" | "enumerate" => Ok(MethodChoice::Enumeration),
            "recursion" => Ok(MethodChoice::Recursion),
            "auto" => Ok(MethodChoice::default()),
            other => Err(invalid(format!("unknown method `{other}`"))),
        }
    }
}

pub(crate) fn check_beta(beta: f64) -> Result<()> {
    if beta.is_finite() && beta >= 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("inverse temperature must be finite and >= 0, got {beta}")))
    }
}

#[derive(Debug)]
enum Backend {
    Enumerated(Vec<Shell>),
    Recursion { fallback: bool, shells: OnceLock<Vec<Shell>> },
    Factorized,
}

/// A working substance with its backend prepared once, ready for repeated
/// evaluation at different temperatures and widths.
#[derive(Debug)]
pub struct CanonicalEnsemble {
    ensemble: EnsembleSpec,
    spectrum: SpectrumSpec,
    backend: Backend,
}

impl CanonicalEnsemble {
    pub fn new(ensemble: EnsembleSpec, spectrum: SpectrumSpec, choice: MethodChoice) -> Result<Self> {
        let boson_or_fermion = ensemble.statistics() != Statistics::Distinguishable;
        let backend = match choice {
            MethodChoice::Enumeration => Backend::Enumerated(enumeration::shells(&ensemble, &spectrum)),
            MethodChoice::Recursion => {
                if !boson_or_fermion {
                    return Err(recursion::unsupported());
                }
                Backend::Recursion {
                    fallback: false,
                    shells: OnceLock::new(),
                }
            }
            MethodChoice::Auto { cap } => {
                let small = ensemble.state_count().is_some_and(|c| c <= cap);
                if small {
                    Backend::Enumerated(enumeration::shells(&ensemble, &spectrum))
                } else if boson_or_fermion {
                    Backend::Recursion {
                        fallback: true,
                        shells: OnceLock::new(),
                    }
                } else {
                    Backend::Factorized
                }
            }
        };
        Ok(CanonicalEnsemble {
            ensemble,
            spectrum,
            backend,
        })
    }

    pub fn ensemble(&self) -> &EnsembleSpec {
        &self.ensemble
    }

    pub fn spectrum(&self) -> &SpectrumSpec {
        &self.spectrum
    }

    pub fn partition(&self, beta: f64, width: f64) -> Result<PartitionEvaluation> {
        check_beta(beta)?;
        let factor = self.spectrum.width_factor(width)?;
        match &self.backend {
            Backend::Enumerated(shells) => Ok(enumeration::evaluate(shells, &self.spectrum, beta, factor)),
            Backend::Recursion { fallback, shells } => {
                match recursion::evaluate(&self.ensemble, &self.spectrum, beta, factor) {
                    Err(Error::NumericalCancellation { .. }) if *fallback => {
                        let shells = shells.get_or_init(|| enumeration::shells(&self.ensemble, &self.spectrum));
                        Ok(enumeration::evaluate(shells, &self.spectrum, beta, factor))
                    }
                    other => other,
                }
            }
            Backend::Factorized => {
                let single = EnsembleSpec::single(self.ensemble.levels())?;
                let shells = enumeration::shells(&single, &self.spectrum);
                let one = enumeration::evaluate(&shells, &self.spectrum, beta, factor);
                let m = self.ensemble.particles() as f64;
                Ok(PartitionEvaluation {
                    log_z: m * one.log_z,
                    internal_energy: m * one.internal_energy,
                    method: Method::Factorized,
                })
            }
        }
    }

    /// `U = −∂ ln Z/∂β` at `β = 1/T`.
    pub fn internal_energy(&self, temperature: f64, width: f64) -> Result<f64> {
        ensure_positive("temperature", temperature)?;
        Ok(self.partition(1.0 / temperature, width)?.internal_energy)
    }
}

pub fn internal_energy(
    ensemble: &EnsembleSpec,
    spectrum: &SpectrumSpec,
    temperature: f64,
    width: f64,
    choice: MethodChoice,
) -> Result<f64> {
    CanonicalEnsemble::new(*ensemble, *spectrum, choice)?.internal_energy(temperature, width)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::SpectrumKind;

    fn boxed() -> SpectrumSpec {
        SpectrumSpec::unit(SpectrumKind::Box)
    }

    #[test]
    fn state_counts() {
        let b = EnsembleSpec::new(Statistics::Boson, 2, 3).unwrap();
        let f = EnsembleSpec::new(Statistics::Fermion, 2, 3).unwrap();
        let d = EnsembleSpec::new(Statistics::Distinguishable, 3, 4).unwrap();
        assert_eq!(b.state_count(), Some(6));
        assert_eq!(f.state_count(), Some(3));
        assert_eq!(d.state_count(), Some(64));
    }

    #[test]
    fn fermions_need_enough_levels() {
        assert_eq!(
            EnsembleSpec::new(Statistics::Fermion, 3, 2),
            Err(Error::EmptyStateSpace { particles: 3, levels: 2 })
        );
        assert!(EnsembleSpec::new(Statistics::Boson, 0, 2).is_err());
        assert!(EnsembleSpec::new(Statistics::Boson, 2, 0).is_err());
    }

    #[test]
    fn single_level_energy() {
        let e = EnsembleSpec::single(1).unwrap();
        for t in [0.01, 1.0, 1e6] {
            let u = internal_energy(&e, &boxed(), t, 1.0, MethodChoice::default()).unwrap();
            assert_eq!(u, 1.0);
        }
    }

    #[test]
    fn two_level_energy() {
        // oracle: two-term direct sum
        let (a, b) = ((-1.0f64 / 8.0).exp(), (-0.5f64).exp());
        let expected = (a + 4.0 * b) / (a + b);
        assert!((expected - 2.2220).abs() < 5e-5);
        let e = EnsembleSpec::single(2).unwrap();
        for choice in [MethodChoice::Enumeration, MethodChoice::Recursion, MethodChoice::default()] {
            let u = internal_energy(&e, &boxed(), 8.0, 1.0, choice).unwrap();
            assert!((u - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn two_harmonic_bosons_match_closed_form() {
        let e = EnsembleSpec::new(Statistics::Boson, 2, 200).unwrap();
        let spec = SpectrumSpec::unit(SpectrumKind::Harmonic);
        let u = internal_energy(&e, &spec, 1.0, 1.0, MethodChoice::default()).unwrap();
        // U = 2q/(1-q) - q/(1+q), q = e^{-1}
        let q = (-1.0f64).exp();
        let closed = 2.0 * q / (1.0 - q) - q / (1.0 + q);
        assert!((u - closed).abs() < 1e-8);
    }

    #[test]
    fn auto_switches_backend() {
        let spec = boxed();
        let e = EnsembleSpec::new(Statistics::Boson, 3, 30).unwrap();
        let small = CanonicalEnsemble::new(e, spec, MethodChoice::default()).unwrap();
        let large = CanonicalEnsemble::new(e, spec, MethodChoice::Auto { cap: 10 }).unwrap();
        let a = small.partition(0.3, 1.0).unwrap();
        let b = large.partition(0.3, 1.0).unwrap();
        assert_eq!(a.method, Method::Enumeration);
        assert_eq!(b.method, Method::Recursion);
        assert!((a.log_z - b.log_z).abs() < 1e-12);

        let d = EnsembleSpec::new(Statistics::Distinguishable, 3, 30).unwrap();
        let fac = CanonicalEnsemble::new(d, spec, MethodChoice::Auto { cap: 10 }).unwrap();
        let full = CanonicalEnsemble::new(d, spec, MethodChoice::Enumeration).unwrap();
        let (x, y) = (fac.partition(0.3, 1.0).unwrap(), full.partition(0.3, 1.0).unwrap());
        assert_eq!(x.method, Method::Factorized);
        assert!((x.log_z - y.log_z).abs() < 1e-12);
        assert!((x.internal_energy - y.internal_energy).abs() < 1e-12);
    }

    #[test]
    fn recursion_rejects_distinguishable() {
        let d = EnsembleSpec::new(Statistics::Distinguishable, 2, 3).unwrap();
        assert!(matches!(
            CanonicalEnsemble::new(d, boxed(), MethodChoice::Recursion),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn rejects_negative_beta_and_temperature() {
        let e = CanonicalEnsemble::new(EnsembleSpec::single(3).unwrap(), boxed(), MethodChoice::default()).unwrap();
        assert!(e.partition(-1.0, 1.0).is_err());
        assert!(e.partition(f64::NAN, 1.0).is_err());
        assert!(e.internal_energy(0.0, 1.0).is_err());
        assert!(e.internal_energy(1.0, 0.0).is_err());
    }
}
