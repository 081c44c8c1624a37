use itertools::Itertools;

use super::{check_beta, EnsembleSpec, ManyBodyLevel, Method, PartitionEvaluation, Statistics};
use crate::error::Result;
use crate::numeric::KahanSum;
use crate::spectrum::SpectrumSpec;

/// A group of degenerate configurations sharing the integer shape sum `Σ g(n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Shell {
    pub shape: u64,
    pub multiplicity: u64,
}

/// Calls `visit` with the level offsets (0-based) of every configuration.
fn for_each_configuration(ensemble: &EnsembleSpec, mut visit: impl FnMut(&[usize])) {
    let (m, n) = (ensemble.particles(), ensemble.levels());
    match ensemble.statistics() {
        Statistics::Boson => (0..n).combinations_with_replacement(m).for_each(|c| visit(&c)),
        Statistics::Fermion => (0..n).combinations(m).for_each(|c| visit(&c)),
        Statistics::Distinguishable => (0..m)
            .map(|_| 0..n)
            .multi_cartesian_product()
            .for_each(|c| visit(&c)),
    }
}

/// Every many-body configuration exactly once, sorted by energy and then
/// lexicographically by occupation.
pub fn enumerate_states(ensemble: &EnsembleSpec, spectrum: &SpectrumSpec) -> Result<Vec<ManyBodyLevel>> {
    // Re-validate: EnsembleSpec can only be built valid, but keep the contract local.
    let ensemble = EnsembleSpec::new(ensemble.statistics(), ensemble.particles(), ensemble.levels())?;
    let n0 = spectrum.first_index();
    let mut states = Vec::new();
    for_each_configuration(&ensemble, |c| {
        let occupation: Vec<u64> = c.iter().map(|&k| n0 + k as u64).collect();
        let shape: u64 = c.iter().map(|&k| spectrum.shape_of_level(k)).sum();
        states.push((shape, occupation));
    });
    states.sort();
    Ok(states
        .into_iter()
        .map(|(shape, occupation)| ManyBodyLevel {
            occupation,
            energy_coefficient: spectrum.scale() * shape as f64,
        })
        .collect())
}

pub(crate) fn shells(ensemble: &EnsembleSpec, spectrum: &SpectrumSpec) -> Vec<Shell> {
    let mut sums = Vec::new();
    for_each_configuration(ensemble, |c| {
        sums.push(c.iter().map(|&k| spectrum.shape_of_level(k)).sum::<u64>());
    });
    sums.sort_unstable();
    sums.into_iter()
        .dedup_with_count()
        .map(|(count, shape)| Shell {
            shape,
            multiplicity: count as u64,
        })
        .collect()
}

/// Boltzmann sum over shells with the ground energy factored out.
/// `factor` is `L^{-p}`; shells must be sorted ascending and nonempty.
pub(crate) fn evaluate(shells: &[Shell], spectrum: &SpectrumSpec, beta: f64, factor: f64) -> PartitionEvaluation {
    let ground_shape = shells[0].shape;
    let ground = spectrum.scale() * ground_shape as f64 * factor;
    let mut z = KahanSum::new();
    let mut weighted = KahanSum::new();
    for shell in shells {
        let excitation = spectrum.scale() * (shell.shape - ground_shape) as f64 * factor;
        let w = shell.multiplicity as f64 * (-beta * excitation).exp();
        z.add(w);
        weighted.add(w * excitation);
    }
    let z = z.value();
    PartitionEvaluation {
        log_z: z.ln() - beta * ground,
        internal_energy: ground + weighted.value() / z,
        method: Method::Enumeration,
    }
}

pub fn partition_by_enumeration(
    ensemble: &EnsembleSpec,
    spectrum: &SpectrumSpec,
    beta: f64,
    width: f64,
) -> Result<PartitionEvaluation> {
    check_beta(beta)?;
    let factor = spectrum.width_factor(width)?;
    Ok(evaluate(&shells(ensemble, spectrum), spectrum, beta, factor))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::SpectrumKind;

    fn boxed() -> SpectrumSpec {
        SpectrumSpec::unit(SpectrumKind::Box)
    }

    fn coefficients(stats: Statistics, m: usize, n: usize) -> Vec<f64> {
        let e = EnsembleSpec::new(stats, m, n).unwrap();
        enumerate_states(&e, &boxed())
            .unwrap()
            .into_iter()
            .map(|l| l.energy_coefficient)
            .collect()
    }

    #[test]
    fn two_three_level_bosons() {
        assert_eq!(coefficients(Statistics::Boson, 2, 3), vec![2.0, 5.0, 8.0, 10.0, 13.0, 18.0]);
    }

    #[test]
    fn two_three_level_fermions() {
        assert_eq!(coefficients(Statistics::Fermion, 2, 3), vec![5.0, 10.0, 13.0]);
        assert_eq!(coefficients(Statistics::Fermion, 2, 2), vec![5.0]);
    }

    #[test]
    fn ordering_breaks_ties_lexicographically() {
        // 1² + 7² = 5² + 5² = 50
        let e = EnsembleSpec::new(Statistics::Boson, 2, 7).unwrap();
        let states = enumerate_states(&e, &boxed()).unwrap();
        let fifty: Vec<_> = states
            .iter()
            .filter(|l| l.energy_coefficient == 50.0)
            .map(|l| l.occupation.clone())
            .collect();
        assert_eq!(fifty, vec![vec![1, 7], vec![5, 5]]);
        let d = EnsembleSpec::new(Statistics::Distinguishable, 2, 2).unwrap();
        let occ: Vec<_> = enumerate_states(&d, &boxed()).unwrap().into_iter().map(|l| l.occupation).collect();
        assert_eq!(occ, vec![vec![1, 1], vec![1, 2], vec![2, 1], vec![2, 2]]);
    }

    #[test]
    fn occupations_stay_in_range() {
        let spec = SpectrumSpec::unit(SpectrumKind::Harmonic);
        for stats in Statistics::ALL {
            let e = EnsembleSpec::new(stats, 3, 5).unwrap();
            let states = enumerate_states(&e, &spec).unwrap();
            assert_eq!(states.len() as u128, e.state_count().unwrap());
            for l in &states {
                assert!(l.occupation.iter().all(|&n| n <= 4));
                let sum: u64 = l.occupation.iter().sum();
                assert_eq!(l.energy_coefficient, sum as f64);
                if stats == Statistics::Fermion {
                    assert!(l.occupation.windows(2).all(|w| w[0] < w[1]));
                }
            }
        }
    }

    #[test]
    fn infinite_temperature_counts_states() {
        let e = EnsembleSpec::new(Statistics::Boson, 2, 3).unwrap();
        let p = partition_by_enumeration(&e, &boxed(), 0.0, 1.0).unwrap();
        assert_eq!(p.log_z, 6f64.ln());
    }

    #[test]
    fn single_fermion_pair_energy() {
        let e = EnsembleSpec::new(Statistics::Fermion, 2, 2).unwrap();
        for beta in [0.0, 0.3, 10.0, 500.0] {
            let p = partition_by_enumeration(&e, &boxed(), beta, 1.0).unwrap();
            assert_eq!(p.internal_energy, 5.0);
        }
    }

    #[test]
    fn two_two_level_bosons_direct_sum() {
        // oracle: three-term direct sum
        let w: Vec<f64> = [2.0f64, 5.0, 8.0].iter().map(|e| (-e).exp()).collect();
        let z = w.iter().sum::<f64>();
        let u = (2.0 * w[0] + 5.0 * w[1] + 8.0 * w[2]) / z;
        let e = EnsembleSpec::new(Statistics::Boson, 2, 2).unwrap();
        let p = partition_by_enumeration(&e, &boxed(), 1.0, 1.0).unwrap();
        assert!((p.log_z - z.ln()).abs() < 1e-14);
        assert!((p.internal_energy - u).abs() < 1e-14);
    }

    #[test]
    fn deep_low_temperature_stays_finite() {
        let e = EnsembleSpec::new(Statistics::Fermion, 3, 6).unwrap();
        let p = partition_by_enumeration(&e, &boxed(), 1e4, 1.0).unwrap();
        assert!(p.log_z.is_finite());
        assert!((p.log_z + 1e4 * 14.0).abs() < 1e-9);
        assert_eq!(p.internal_energy, 14.0);
    }
}
