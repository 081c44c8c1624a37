//! Particle-number recursion for noninteracting bosons and fermions:
//!
//! ```text
//! Z_M(β) = (1/M) Σ_{m=1..M} (±1)^{m+1} Z₁(mβ) Z_{M−m}(β),   Z₀ = 1
//! ```
//!
//! differentiated term by term for `Z′_M`, so `U = −Z′_M/Z_M` needs no finite
//! differences. Energies are shifted by the lowest single-particle level so
//! every Boltzmann factor is at most one.
//!
//! The fermionic sum alternates and can cancel catastrophically at low
//! temperature. Alongside the signed recursion we run the same recursion with
//! all signs positive; its value bounds the magnitude of the cancelling terms
//! and gives a rounding-error estimate. When that estimate is too large the
//! recursion is rerun in exact dyadic arithmetic on the same Boltzmann factors.

use num_bigint::BigInt;

use super::{check_beta, EnsembleSpec, Method, PartitionEvaluation, Statistics};
use crate::error::{Error, Result};
use crate::numeric::{Dyadic, KahanSum};
use crate::spectrum::SpectrumSpec;

/// Relative error budget for `Z` before the exact path takes over.
const Z_TOLERANCE: f64 = 1e-13;
/// Error budget for the shifted internal energy, relative to `max(1, |U|)`.
const U_TOLERANCE: f64 = 1e-12;
/// Levels whose Boltzmann factor sits this many e-folds below the first
/// unoccupied fermion level are dropped on the exact path; their total
/// relative weight is below `N²·e^{-200}`.
const PRUNE_EFOLDS: f64 = 200.0;

pub(crate) fn unsupported() -> Error {
    Error::Unsupported("the recursion covers bosons and fermions; distinguishable particles factorize as Z = Z1^M".into())
}

fn sign(statistics: Statistics, m: usize) -> f64 {
    match statistics {
        Statistics::Fermion if m.is_multiple_of(2) => -1.0,
        _ => 1.0,
    }
}

pub fn partition_by_recursion(
    ensemble: &EnsembleSpec,
    spectrum: &SpectrumSpec,
    beta: f64,
    width: f64,
) -> Result<PartitionEvaluation> {
    check_beta(beta)?;
    if ensemble.statistics() == Statistics::Distinguishable {
        return Err(unsupported());
    }
    let factor = spectrum.width_factor(width)?;
    evaluate(ensemble, spectrum, beta, factor)
}

/// Shifted single-particle excitations `ε_k = E_k − E_0` and the shift `E_0`.
fn excitations(ensemble: &EnsembleSpec, spectrum: &SpectrumSpec, factor: f64) -> (Vec<f64>, f64) {
    let g0 = spectrum.shape_of_level(0);
    let eps = (0..ensemble.levels())
        .map(|k| spectrum.scale() * (spectrum.shape_of_level(k) - g0) as f64 * factor)
        .collect();
    (eps, spectrum.scale() * g0 as f64 * factor)
}

pub(crate) fn evaluate(
    ensemble: &EnsembleSpec,
    spectrum: &SpectrumSpec,
    beta: f64,
    factor: f64,
) -> Result<PartitionEvaluation> {
    let (eps, shift) = excitations(ensemble, spectrum, factor);
    let m = ensemble.particles();
    let statistics = ensemble.statistics();

    let shifted = match floating(&eps, m, statistics, beta) {
        Some(v) => v,
        None => exact(&eps, m, statistics, beta)?,
    };
    let (log_z, u) = shifted;
    Ok(PartitionEvaluation {
        log_z: log_z - beta * m as f64 * shift,
        internal_energy: u + m as f64 * shift,
        method: Method::Recursion,
    })
}

/// Double precision recursion. Returns shifted `(ln Z, U)`, or `None` when
/// the cancellation estimate exceeds the error budget.
fn floating(eps: &[f64], m: usize, statistics: Statistics, beta: f64) -> Option<(f64, f64)> {
    // Z₁(kβ) and d/dβ[Z₁(kβ)] = −k Σ ε e^{−kβε}, for k = 1..=m.
    let mut z1 = vec![0.0; m + 1];
    let mut dz1 = vec![0.0; m + 1];
    for k in 1..=m {
        let mut s = KahanSum::new();
        let mut d = KahanSum::new();
        for &e in eps {
            let w = (-(k as f64) * beta * e).exp();
            s.add(w);
            d.add(e * w);
        }
        z1[k] = s.value();
        dz1[k] = -(k as f64) * d.value();
    }

    let mut z = vec![0.0; m + 1];
    let mut dz = vec![0.0; m + 1];
    // Unsigned companions: upper bounds on the magnitude of the summed terms.
    let mut bound = vec![0.0; m + 1];
    let mut dbound = vec![0.0; m + 1];
    z[0] = 1.0;
    bound[0] = 1.0;
    for k in 1..=m {
        let mut s = KahanSum::new();
        let mut d = KahanSum::new();
        let mut b = 0.0;
        let mut db = 0.0;
        for j in 1..=k {
            let sg = sign(statistics, j);
            s.add(sg * z1[j] * z[k - j]);
            d.add(sg * (dz1[j] * z[k - j] + z1[j] * dz[k - j]));
            b += z1[j] * bound[k - j];
            db += dz1[j].abs() * bound[k - j] + z1[j] * dbound[k - j];
        }
        let inv = 1.0 / k as f64;
        z[k] = s.value() * inv;
        dz[k] = d.value() * inv;
        bound[k] = b * inv;
        dbound[k] = db * inv;
    }

    let (zm, dzm) = (z[m], dz[m]);
    if zm.is_nan() || zm <= 0.0 || !zm.is_finite() {
        return None;
    }
    let u = -dzm / zm;
    let unit = 4.0 * (m + 1) as f64 * f64::EPSILON;
    let z_err = unit * bound[m] / zm;
    let u_err = unit * (dbound[m] + u.abs() * bound[m]) / zm;
    if z_err > Z_TOLERANCE || u_err > U_TOLERANCE * u.abs().max(1.0) {
        return None;
    }
    Some((zm.ln(), u))
}

/// Exact recursion on `Y_k = k!·Z_k`:
///
/// `Y_k = Σ_j s_j (k−1)!/(k−j)! · Z₁(jβ) Y_{k−j}` with integer weights, so
/// the only rounding is in the Boltzmann factors themselves.
fn exact(eps: &[f64], m: usize, statistics: Statistics, beta: f64) -> Result<(f64, f64)> {
    let kept = prune(eps, m, beta);
    let x: Vec<Dyadic> = kept.iter().map(|&e| Dyadic::exp(-beta * e)).collect();
    let e: Vec<Dyadic> = kept.iter().map(|&e| Dyadic::from_f64(e)).collect();

    let mut z1 = vec![Dyadic::zero(); m + 1];
    let mut dz1 = vec![Dyadic::zero(); m + 1];
    let mut powers = x.clone();
    for k in 1..=m {
        if k > 1 {
            for (p, xi) in powers.iter_mut().zip(&x) {
                *p = &*p * xi;
            }
        }
        let mut s = Dyadic::zero();
        let mut d = Dyadic::zero();
        for (p, ei) in powers.iter().zip(&e) {
            s = &s + p;
            d = &d + &(ei * p);
        }
        z1[k] = s;
        dz1[k] = &Dyadic::from_integer(-(k as i64)) * &d;
    }

    let mut y = vec![Dyadic::zero(); m + 1];
    let mut dy = vec![Dyadic::zero(); m + 1];
    y[0] = Dyadic::from_integer(1);
    for k in 1..=m {
        let mut s = Dyadic::zero();
        let mut d = Dyadic::zero();
        // falling = (k−1)!/(k−j)!
        let mut falling = BigInt::from(1);
        for j in 1..=k {
            if j > 1 {
                falling *= k - j + 1;
            }
            let w = Dyadic::from_bigint(if sign(statistics, j) < 0.0 { -&falling } else { falling.clone() });
            s = &s + &(&w * &(&z1[j] * &y[k - j]));
            let inner = &(&dz1[j] * &y[k - j]) + &(&z1[j] * &dy[k - j]);
            d = &d + &(&w * &inner);
        }
        y[k] = s;
        dy[k] = d;
    }

    let ln_y = y[m].ln().ok_or(Error::NumericalCancellation { particles: m, beta })?;
    let ln_factorial: f64 = (2..=m).map(|k| (k as f64).ln()).sum();
    let u = -dy[m].ratio(&y[m]).expect("nonzero after ln");
    Ok((ln_y - ln_factorial, u))
}

fn prune(eps: &[f64], m: usize, beta: f64) -> &[f64] {
    if eps.len() <= m + 1 || beta == 0.0 {
        return eps;
    }
    let reference = eps[m];
    let keep = eps
        .iter()
        .position(|&e| beta * (e - reference) > PRUNE_EFOLDS)
        .unwrap_or(eps.len());
    &eps[..keep]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manybody::partition_by_enumeration;
    use crate::spectrum::SpectrumKind;

    fn boxed() -> SpectrumSpec {
        SpectrumSpec::unit(SpectrumKind::Box)
    }

    #[test]
    fn single_particle_is_z1() {
        let e = EnsembleSpec::new(Statistics::Boson, 1, 4).unwrap();
        let p = partition_by_recursion(&e, &boxed(), 0.2, 1.0).unwrap();
        let z1: f64 = [1.0f64, 4.0, 9.0, 16.0].iter().map(|x| (-0.2 * x).exp()).sum();
        assert!((p.log_z - z1.ln()).abs() < 1e-15);
        assert_eq!(p.method, Method::Recursion);
    }

    #[test]
    fn two_particles_unroll_once() {
        let beta = 0.4;
        let z1 = |b: f64| -> f64 { [1.0f64, 4.0, 9.0].iter().map(|x| (-b * x).exp()).sum() };
        for (stats, sg) in [(Statistics::Boson, 1.0), (Statistics::Fermion, -1.0)] {
            let e = EnsembleSpec::new(stats, 2, 3).unwrap();
            let p = partition_by_recursion(&e, &boxed(), beta, 1.0).unwrap();
            let expected = (z1(beta).powi(2) + sg * z1(2.0 * beta)) / 2.0;
            assert!((p.log_z - expected.ln()).abs() < 1e-14);
        }
    }

    #[test]
    fn three_level_fermion_pair_matches_enumeration() {
        let e = EnsembleSpec::new(Statistics::Fermion, 2, 3).unwrap();
        let r = partition_by_recursion(&e, &boxed(), 0.1, 1.0).unwrap();
        let n = partition_by_enumeration(&e, &boxed(), 0.1, 1.0).unwrap();
        assert!(((r.log_z.exp() - n.log_z.exp()) / n.log_z.exp()).abs() < 1e-12);
        assert!((r.internal_energy - n.internal_energy).abs() < 1e-12);
    }

    #[test]
    fn cancellation_goes_exact() {
        // Z_F ≈ e^{-300} from terms of order e^{-40}: hopeless in f64.
        let e = EnsembleSpec::new(Statistics::Fermion, 4, 8).unwrap();
        let (eps, _) = excitations(&e, &boxed(), 1.0);
        assert!(floating(&eps, 4, Statistics::Fermion, 10.0).is_none());
        let r = partition_by_recursion(&e, &boxed(), 10.0, 1.0).unwrap();
        let n = partition_by_enumeration(&e, &boxed(), 10.0, 1.0).unwrap();
        assert!((r.log_z - n.log_z).abs() < 1e-12);
        assert!((r.internal_energy - n.internal_energy).abs() < 1e-12);
    }

    #[test]
    fn extreme_beta_does_not_underflow() {
        let e = EnsembleSpec::new(Statistics::Fermion, 3, 40).unwrap();
        let r = partition_by_recursion(&e, &boxed(), 200.0, 1.0).unwrap();
        // ground configuration 1+4+9, first excitation 1+4+16
        assert!((r.log_z + 200.0 * 14.0).abs() < 1e-9);
        assert!((r.internal_energy - 14.0).abs() < 1e-9);
    }

    #[test]
    fn fully_packed_fermions() {
        let e = EnsembleSpec::new(Statistics::Fermion, 3, 3).unwrap();
        let r = partition_by_recursion(&e, &boxed(), 2.0, 1.0).unwrap();
        assert!((r.log_z + 28.0).abs() < 1e-12);
        assert!((r.internal_energy - 14.0).abs() < 1e-12);
    }

    #[test]
    fn distinguishable_is_unsupported() {
        let e = EnsembleSpec::new(Statistics::Distinguishable, 2, 3).unwrap();
        assert!(matches!(partition_by_recursion(&e, &boxed(), 1.0, 1.0), Err(Error::Unsupported(_))));
    }

    #[test]
    fn pruning_keeps_the_occupied_block() {
        let eps: Vec<f64> = (0..10).map(|k| (k * k) as f64).collect();
        assert_eq!(prune(&eps, 2, 0.0).len(), 10);
        // reference eps[2] = 4, cutoff beta*(e-4) > 200 with beta = 10 -> e > 24
        assert_eq!(prune(&eps, 2, 10.0).len(), 5);
    }
}
