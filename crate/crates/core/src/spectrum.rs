//! Single-particle spectra of the uniform-scaling family `E_n(L) = c·g(n)/L^p`.

use std::fmt;
use std::str::FromStr;

use crate::error::{ensure_positive, invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpectrumKind {
    /// Infinite square well: `g(n) = n²`, `p = 2`, `n ≥ 1`.
    Box,
    /// Harmonic trap with the zero-point energy dropped: `g(n) = n`, `p = 2`, `n ≥ 0`.
    Harmonic,
    /// Ultra-relativistic particle in a box: `g(n) = n`, `p = 1`, `n ≥ 1`.
    RelativisticBox,
    /// Quartic trap: `g(n) = n²`, `p = 4/3`, `n ≥ 1`.
    Quartic,
}

impl SpectrumKind {
    pub const ALL: [SpectrumKind; 4] = [
        SpectrumKind::Box,
        SpectrumKind::Harmonic,
        SpectrumKind::RelativisticBox,
        SpectrumKind::Quartic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SpectrumKind::Box => "box",
            SpectrumKind::Harmonic => "harmonic",
            SpectrumKind::RelativisticBox => "relativistic-box",
            SpectrumKind::Quartic => "quartic",
        }
    }

    pub fn power(self) -> Power {
        match self {
            SpectrumKind::Box | SpectrumKind::Harmonic => Power::new(2, 1),
            SpectrumKind::RelativisticBox => Power::new(1, 1),
            SpectrumKind::Quartic => Power::new(4, 3),
        }
    }

    pub fn first_index(self) -> u64 {
        match self {
            SpectrumKind::Harmonic => 0,
            _ => 1,
        }
    }

    /// Level shape `g(n)`.
    pub fn shape(self, n: u64) -> u64 {
        match self {
            SpectrumKind::Box | SpectrumKind::Quartic => n * n,
            SpectrumKind::Harmonic | SpectrumKind::RelativisticBox => n,
        }
    }
}

impl fmt::Display for SpectrumKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SpectrumKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "box" => Ok(SpectrumKind::Box),
            "harmonic" => Ok(SpectrumKind::Harmonic),
            "relativistic-box" | "relativistic" => Ok(SpectrumKind::RelativisticBox),
            "quartic" => Ok(SpectrumKind::Quartic),
            other => Err(invalid(format!("unknown spectrum `{other}`"))),
        }
    }
}

/// Rational exponent `numerator/denominator` of `1/L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Power {
    numerator: u32,
    denominator: u32,
}

impl Power {
    const fn new(numerator: u32, denominator: u32) -> Self {
        Power {
            numerator,
            denominator,
        }
    }

    pub fn value(self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }

    /// `x^p` for `x > 0`, taking integer and cube roots exactly where possible
    /// so that e.g. `8^(4/3)` is exactly 16.
    pub fn apply(self, x: f64) -> f64 {
        let root = match self.denominator {
            1 => x,
            2 => x.sqrt(),
            3 => x.cbrt(),
            d => x.powf(1.0 / d as f64),
        };
        root.powi(self.numerator as i32)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumSpec {
    kind: SpectrumKind,
    scale: f64,
}

impl SpectrumSpec {
    pub fn new(kind: SpectrumKind, scale: f64) -> Result<Self> {
        ensure_positive("scale", scale)?;
        Ok(SpectrumSpec { kind, scale })
    }

    /// Spectrum with unit energy scale.
    pub fn unit(kind: SpectrumKind) -> Self {
        SpectrumSpec { kind, scale: 1.0 }
    }

    pub fn kind(&self) -> SpectrumKind {
        self.kind
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn power(&self) -> Power {
        self.kind.power()
    }

    pub fn first_index(&self) -> u64 {
        self.kind.first_index()
    }

    /// Quantum numbers of the first `levels` single-particle states.
    pub fn indices(&self, levels: usize) -> impl Iterator<Item = u64> {
        let n0 = self.first_index();
        n0..n0 + levels as u64
    }

    /// `g(n)` for the `k`-th retained level (0-based).
    pub fn shape_of_level(&self, k: usize) -> u64 {
        self.kind.shape(self.first_index() + k as u64)
    }

    /// `c·g(n)`, i.e. the level energy times `L^p`.
    pub fn coefficient(&self, n: u64) -> f64 {
        self.scale * self.kind.shape(n) as f64
    }

    pub fn level_coefficients(&self, levels: usize) -> Vec<f64> {
        self.indices(levels).map(|n| self.coefficient(n)).collect()
    }

    /// Multiplier `L^{-p}` converting coefficients into energies at width `L`.
    pub fn width_factor(&self, width: f64) -> Result<f64> {
        ensure_positive("width", width)?;
        Ok(1.0 / self.power().apply(width))
    }

    pub fn single_particle_energies(&self, levels: usize, width: f64) -> Result<Vec<f64>> {
        if levels == 0 {
            return Err(invalid("level count must be at least 1"));
        }
        let factor = self.width_factor(width)?;
        Ok(self
            .indices(levels)
            .map(|n| self.coefficient(n) * factor)
            .collect())
    }

    /// Factor `(L_from/L_to)^p` by which every energy (and hence any internal
    /// energy with frozen occupations) changes when the width moves from
    /// `from` to `to`.
    pub fn adiabatic_energy_ratio(&self, from: f64, to: f64) -> Result<f64> {
        ensure_positive("L_from", from)?;
        ensure_positive("L_to", to)?;
        Ok(self.power().apply(from / to))
    }
}
