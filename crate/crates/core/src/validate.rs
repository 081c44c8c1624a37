//! Self-validation: backend equivalence, closed forms and cycle identities,
//! each reduced to a single worst-case deviation compared with a tolerance.

use crate::error::Result;
use crate::experiments::{harmonic_closed_form_work, harmonic_closed_form_z};
use crate::manybody::{
    partition_by_enumeration, partition_by_recursion, CanonicalEnsemble, EnsembleSpec, MethodChoice, Statistics,
};
use crate::spectrum::{SpectrumKind, SpectrumSpec};
use crate::thermo::{run_cycle, run_cycle_with, CycleConfig, Geometry};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub deviation: f64,
    pub tolerance: f64,
}

impl Check {
    fn new(name: impl Into<String>, deviation: Result<f64>, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            deviation: deviation.unwrap_or(f64::INFINITY),
            tolerance,
        }
    }

    pub fn passed(&self) -> bool {
        self.deviation.is_finite() && self.deviation <= self.tolerance
    }
}

pub const ORACLE_BETAS: [f64; 5] = [0.0, 0.01, 0.1, 1.0, 10.0];
const TWO_SPECIES: [Statistics; 2] = [Statistics::Boson, Statistics::Fermion];

fn ensembles(statistics: &[Statistics], particles: impl Iterator<Item = usize> + Clone, levels: impl Iterator<Item = usize> + Clone) -> Vec<EnsembleSpec> {
    let mut out = Vec::new();
    for &s in statistics {
        for m in particles.clone() {
            for n in levels.clone() {
                if let Ok(e) = EnsembleSpec::new(s, m, n) {
                    out.push(e);
                }
            }
        }
    }
    out
}

/// Worst `|Δ ln Z|` and worst `|ΔU|/max(1, |U|)` between recursion and
/// enumeration over bosons and fermions, `M ≤ 4`, `N ≤ 8`, box and harmonic
/// spectra, and [`ORACLE_BETAS`].
pub fn oracle_equivalence() -> Result<(f64, f64)> {
    let mut log_dev: f64 = 0.0;
    let mut u_dev: f64 = 0.0;
    for kind in [SpectrumKind::Box, SpectrumKind::Harmonic] {
        let spec = SpectrumSpec::unit(kind);
        for e in ensembles(&TWO_SPECIES, 1..=4, 1..=8) {
            for beta in ORACLE_BETAS {
                let a = partition_by_recursion(&e, &spec, beta, 1.0)?;
                let b = partition_by_enumeration(&e, &spec, beta, 1.0)?;
                log_dev = log_dev.max((a.log_z - b.log_z).abs());
                let scale = b.internal_energy.abs().max(1.0);
                u_dev = u_dev.max((a.internal_energy - b.internal_energy).abs() / scale);
            }
        }
    }
    Ok((log_dev, u_dev))
}

fn unit_geometry(compression_ratio: f64, hot: f64) -> Result<Geometry> {
    Geometry::new(1.0, compression_ratio, 1.0, hot)
}

/// Worst `|W/Q_h − (1 − R^{−p})|` over all spectra and statistics, `M ≤ 3`,
/// `N ≤ 6`, `R ∈ {2, 3, 4}`, at `T_h` of 2 and 10 times the threshold,
/// counting only cycles with `Q_h > 1e−12`. Also returns the worst first-law
/// residual `|W − (Q_h − Q_c)|`.
pub fn efficiency_identity() -> Result<(f64, f64)> {
    let mut eta_dev: f64 = 0.0;
    let mut first_law: f64 = 0.0;
    for kind in SpectrumKind::ALL {
        let spec = SpectrumSpec::unit(kind);
        for e in ensembles(&Statistics::ALL, 1..=3, 1..=6) {
            let substance = CanonicalEnsemble::new(e, spec, MethodChoice::default())?;
            for r in [2.0, 3.0, 4.0] {
                let threshold = unit_geometry(r, 1.0)?.positive_work_threshold(&spec);
                for k in [2.0, 10.0] {
                    let res = run_cycle_with(&substance, &unit_geometry(r, k * threshold)?)?;
                    first_law = first_law.max((res.work - (res.heat_in - res.heat_out)).abs());
                    if res.heat_in > 1e-12 {
                        let expected = 1.0 - spec.adiabatic_energy_ratio(1.0, r)?;
                        eta_dev = eta_dev.max((res.work / res.heat_in - expected).abs());
                        if let Some(eta) = res.efficiency {
                            eta_dev = eta_dev.max((eta - expected).abs());
                        }
                    }
                }
            }
        }
    }
    Ok((eta_dev, first_law))
}

/// Locates the sign change of `W(T_h)` by bisection on `[θ/2, 2θ]` with
/// `θ = R^p·T_c`; returns `|T_h* − θ|/θ`, or infinity when the sign does not
/// change across the bracket.
pub fn bisect_threshold(substance: &CanonicalEnsemble, base: &Geometry) -> Result<f64> {
    let threshold = base.positive_work_threshold(substance.spectrum());
    let work = |t: f64| -> Result<f64> { Ok(run_cycle_with(substance, &base.with_hot_temperature(t))?.work) };
    let (mut lo, mut hi) = (0.5 * threshold, 2.0 * threshold);
    if !(work(lo)? < 0.0 && work(hi)? > 0.0) {
        return Ok(f64::INFINITY);
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if work(mid)? > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((0.5 * (lo + hi) - threshold).abs() / threshold)
}

/// Worst bisection deviation over all spectra and statistics, `M ≤ 3`,
/// `2 ≤ N ≤ 6`, `R = 2`, skipping substances with a single many-body level.
pub fn threshold_bracketing() -> Result<f64> {
    let mut worst: f64 = 0.0;
    for kind in SpectrumKind::ALL {
        let spec = SpectrumSpec::unit(kind);
        for e in ensembles(&Statistics::ALL, 1..=3, 2..=6) {
            if e.state_count() == Some(1) {
                continue;
            }
            let substance = CanonicalEnsemble::new(e, spec, MethodChoice::default())?;
            worst = worst.max(bisect_threshold(&substance, &unit_geometry(2.0, 1.0)?)?);
        }
    }
    Ok(worst)
}

/// Worst relative deviation of truncated two-particle harmonic partition
/// functions from the closed forms, at both equilibrium corners of cycles
/// with `R = 2`, `T_c = 1`, `L1 = 1` and the given hot temperatures.
pub fn harmonic_z_deviation(lambda: f64, levels: usize, hots: &[f64], method: MethodChoice) -> Result<f64> {
    let spec = SpectrumSpec::new(SpectrumKind::Harmonic, lambda)?;
    let mut worst: f64 = 0.0;
    for stats in TWO_SPECIES {
        let substance = CanonicalEnsemble::new(EnsembleSpec::new(stats, 2, levels)?, spec, method)?;
        for &hot in hots {
            for (t, l) in [(hot, 1.0), (1.0, 2.0)] {
                let z = substance.partition(1.0 / t, l)?.log_z.exp();
                let closed = harmonic_closed_form_z(stats, t, l, lambda)?;
                worst = worst.max((z - closed).abs() / closed);
            }
        }
    }
    Ok(worst)
}

/// Worst `|W − W_closed|` over bosons and fermions, and worst `|W^B − W^F|`,
/// for two harmonic particles on `levels` levels.
pub fn harmonic_work_deviation(lambda: f64, levels: usize, hots: &[f64], method: MethodChoice) -> Result<(f64, f64)> {
    let spec = SpectrumSpec::new(SpectrumKind::Harmonic, lambda)?;
    let mut closed_dev: f64 = 0.0;
    let mut species_dev: f64 = 0.0;
    for &hot in hots {
        let g = unit_geometry(2.0, hot)?;
        let closed = harmonic_closed_form_work(1.0, 2.0, 1.0, hot, lambda)?;
        let mut works = Vec::new();
        for stats in TWO_SPECIES {
            let cfg = CycleConfig::new(spec, EnsembleSpec::new(stats, 2, levels)?, g)?.with_method(method);
            let w = run_cycle(&cfg)?.work;
            closed_dev = closed_dev.max((w - closed).abs());
            works.push(w);
        }
        species_dev = species_dev.max((works[0] - works[1]).abs());
    }
    Ok((closed_dev, species_dev))
}

/// `(λ, T_h/T_c)` points for the `(M+1)`-level fermion identity.
pub const LADDER_POINTS: [(f64, f64); 5] = [(0.05, 5.0), (0.5, 6.0), (1.0, 5.0), (1.0, 8.0), (3.0, 12.0)];

/// Worst `|W^F_M/W_s − 1|` for `M` harmonic fermions on `M + 1` levels,
/// `M ∈ {1, 2, 3, 4}`, over [`LADDER_POINTS`].
pub fn fermion_ladder_identity() -> Result<f64> {
    let mut worst: f64 = 0.0;
    for m in 1..=4 {
        for (lambda, hot) in LADDER_POINTS {
            let spec = SpectrumSpec::new(SpectrumKind::Harmonic, lambda)?;
            let g = unit_geometry(2.0, hot)?;
            let many = run_cycle(&CycleConfig::new(spec, EnsembleSpec::new(Statistics::Fermion, m, m + 1)?, g)?)?;
            let single = run_cycle(&CycleConfig::new(spec, EnsembleSpec::single(m + 1)?, g)?)?;
            worst = worst.max((many.work / single.work - 1.0).abs());
        }
    }
    Ok(worst)
}

/// Worst `|W_M − M·W_s|/|M·W_s|` for distinguishable particles, `M ≤ 4`,
/// all spectra, `N ∈ {2, 4, 6}`, by full enumeration of the `N^M` tuples.
pub fn distinguishable_factorization() -> Result<f64> {
    let mut worst: f64 = 0.0;
    for kind in SpectrumKind::ALL {
        let spec = SpectrumSpec::unit(kind);
        for n in [2, 4, 6] {
            let g = unit_geometry(2.0, 1.0)?;
            let g = g.with_hot_temperature(2.0 * g.positive_work_threshold(&spec));
            let single = run_cycle(&CycleConfig::new(spec, EnsembleSpec::single(n)?, g)?)?.work;
            for m in 1..=4 {
                let e = EnsembleSpec::new(Statistics::Distinguishable, m, n)?;
                let cfg = CycleConfig::new(spec, e, g)?.with_method(MethodChoice::Enumeration);
                let w = run_cycle(&cfg)?.work;
                let expected = m as f64 * single;
                worst = worst.max((w - expected).abs() / expected.abs());
            }
        }
    }
    Ok(worst)
}

/// Level count at which the `λ = 0.05` harmonic truncation is converged to
/// well below `1e−8`; evaluated with the recursion.
pub const HARMONIC_CONVERGED_LEVELS: usize = 6000;

pub fn run_all() -> Vec<Check> {
    let mut checks = Vec::new();

    let oracle = oracle_equivalence();
    let (log_dev, u_dev) = match oracle {
        Ok(v) => (Ok(v.0), Ok(v.1)),
        Err(e) => (Err(e.clone()), Err(e)),
    };
    checks.push(Check::new("recursion vs enumeration: ln Z", log_dev, 1e-10));
    checks.push(Check::new("recursion vs enumeration: U (relative)", u_dev, 1e-9));

    let (eta, first_law) = match efficiency_identity() {
        Ok(v) => (Ok(v.0), Ok(v.1)),
        Err(e) => (Err(e.clone()), Err(e)),
    };
    checks.push(Check::new("efficiency identity W/Qh = 1 - R^-p", eta, 1e-10));
    checks.push(Check::new("first law W = Qh - Qc", first_law, 0.0));
    checks.push(Check::new("positive-work threshold T_h = R^p T_c (bisection)", threshold_bracketing(), 1e-6));

    let hots = [5.0, 8.0];
    checks.push(Check::new(
        "harmonic pair closed-form Z (lambda=1, N=200)",
        harmonic_z_deviation(1.0, 200, &hots, MethodChoice::default()),
        1e-8,
    ));
    checks.push(Check::new(
        format!("harmonic pair closed-form Z (lambda=0.05, N={HARMONIC_CONVERGED_LEVELS})"),
        harmonic_z_deviation(0.05, HARMONIC_CONVERGED_LEVELS, &hots, MethodChoice::Recursion),
        1e-8,
    ));
    for (lambda, levels, method) in [
        (1.0, 200, MethodChoice::default()),
        (0.05, HARMONIC_CONVERGED_LEVELS, MethodChoice::Recursion),
    ] {
        let (closed, species) = match harmonic_work_deviation(lambda, levels, &hots, method) {
            Ok(v) => (Ok(v.0), Ok(v.1)),
            Err(e) => (Err(e.clone()), Err(e)),
        };
        checks.push(Check::new(format!("harmonic pair closed-form W (lambda={lambda}, N={levels})"), closed, 1e-8));
        checks.push(Check::new(format!("harmonic pair W^B = W^F (lambda={lambda}, N={levels})"), species, 1e-8));
    }
    checks.push(Check::new("(M+1)-level M-fermion identity W_M/W_s = 1", fermion_ladder_identity(), 1e-10));
    checks.push(Check::new("distinguishable factorization W_M = M W_s", distinguishable_factorization(), 1e-12));
    checks
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresh_build_passes_every_check() {
        for check in run_all() {
            assert!(check.passed(), "{} deviation {:e} > {:e}", check.name, check.deviation, check.tolerance);
        }
    }

    #[test]
    fn failed_computation_is_a_failed_check() {
        let c = Check::new("x", Err(crate::error::Error::Unsupported("y".into())), 1.0);
        assert!(!c.passed());
    }
}
