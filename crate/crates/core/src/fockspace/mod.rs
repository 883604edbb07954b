//! Exact finite-dimensional representation of spin and oscillator aggregates.
//!
//! Every dynamical process considered here conserves the number of
//! excitations, so all work happens inside a single [`BasisSector`]: the
//! ordered list of site-occupation configurations with a fixed total. Spin
//! sites hold 0 or 1 excitation, oscillator sites hold up to
//! `per_site_cutoff`.
//!
//! Hamiltonians are written in the frame rotating at the common site
//! frequency, so only detunings and couplings appear.

mod hamiltonian;
mod operator;
mod sector;
mod state;

pub use hamiltonian::{build_hamiltonian, evolve_step, HamiltonianSpec, Propagator};
pub use operator::{collective_op, site_op, CollectiveOp, SparseOperator};
pub use sector::{enumerate_sector, BasisSector, Config, SectorKind};
pub use state::{expectation_emission, StateVector};
