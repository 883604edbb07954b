//! Collective effects in emission, absorption and transfer.
//!
//! The crate is organised bottom-up:
//!
//! * [`fockspace`] enumerates fixed-excitation sectors of spin and
//!   harmonic-oscillator aggregates and builds collective operators,
//!   Hamiltonians and unitary propagators on them.
//! * [`dicke`] constructs spin Dicke states `|N, l, m>` and oscillator
//!   collective-mode states `|N, R, d>` and measures delocalisation.
//! * [`rates`] holds the closed-form rate enhancements, the brute-force
//!   golden-rule oracle they are checked against, and the anharmonic
//!   interpolation between the two limits.
//! * [`cascade`] integrates the classical rate equations down a Dicke ladder.
//! * [`stochastic`] generates Ornstein-Uhlenbeck site-energy noise and runs
//!   the noisy-emission and static-disorder sweeps.
//!
//! Energies are in units of the single-site rate `gamma0`, times in `1/gamma0`.

pub mod cascade;
pub mod dicke;
mod error;
pub mod fockspace;
pub(crate) mod linalg;
pub mod rates;
pub mod stochastic;

pub use error::{Error, Result};
pub use num_complex::Complex64;

pub use cascade::{LadderSpec, PopulationTrajectory};
pub use dicke::{HoDickeLabel, Multiplet, SpinDickeLabel};
pub use fockspace::{BasisSector, HamiltonianSpec, SectorKind, SparseOperator, StateVector};
pub use rates::{Aggregate, MaxEnhancement, Process, RateEnhancement};
pub use stochastic::{OuParams, SweepResult, TrajectoryConfig};
