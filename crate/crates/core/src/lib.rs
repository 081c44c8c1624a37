//! Quantum Otto heat engines whose working substance is `M` identical
//! noninteracting particles (bosons, fermions or distinguishable particles)
//! on `N` levels of a uniformly scaling single-particle spectrum.
//!
//! - [`spectrum`]: `E_n(L) = c·g(n)/L^p` for box, harmonic, relativistic-box
//!   and quartic traps.
//! - [`manybody`]: canonical partition functions and internal energies by
//!   enumeration and by the particle-number recursion.
//! - [`thermo`]: the four-stroke cycle, heats, work, efficiency and work ratios.
//! - [`experiments`]: parameter sweeps, CSV output and harmonic closed forms.
//! - [`validate`]: self-checks used by `otto validate`.
//!
//! Units: `k_B = 1`, temperatures are energies, and physical prefactors
//! are absorbed into the spectrum scale `c`.

pub mod error;
pub mod exec;
pub mod experiments;
pub mod manybody;
pub mod numeric;
pub mod spectrum;
pub mod thermo;
pub mod validate;

pub use error::{Error, Result};
pub use exec::Execution;
pub use manybody::{CanonicalEnsemble, EnsembleSpec, MethodChoice, Statistics};
pub use spectrum::{SpectrumKind, SpectrumSpec};
pub use thermo::{run_cycle, CycleConfig, CycleResult, Geometry};
