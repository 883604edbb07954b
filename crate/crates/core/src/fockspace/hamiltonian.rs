use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::operator::SparseOperator;
use super::sector::{BasisSector, SectorKind};
use super::state::StateVector;
use crate::error::{invalid, Error, Result};
use crate::linalg;

/// Site detunings and intra-aggregate couplings, in units of `gamma0`.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianSpec {
    site_energies: Vec<f64>,
    coupling: DMatrix<f64>,
}

impl HamiltonianSpec {
    /// `coupling` must be symmetric with a zero diagonal.
    pub fn new(site_energies: Vec<f64>, coupling: DMatrix<f64>) -> Result<Self> {
        let n = site_energies.len();
        if coupling.nrows() != n || coupling.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: coupling.nrows().max(coupling.ncols()),
            });
        }
        for i in 0..n {
            if coupling[(i, i)] != 0.0 {
                return Err(invalid(format!("coupling diagonal entry {i} is nonzero")));
            }
            for j in 0..i {
                if coupling[(i, j)] != coupling[(j, i)] {
                    return Err(invalid(format!("coupling is not symmetric at ({i}, {j})")));
                }
            }
        }
        if site_energies.iter().chain(coupling.iter()).any(|x| !x.is_finite()) {
            return Err(invalid("non-finite Hamiltonian parameter"));
        }
        Ok(HamiltonianSpec {
            site_energies,
            coupling,
        })
    }

    /// Equal coupling `v` between every pair of sites, given detunings.
    pub fn all_to_all(site_energies: Vec<f64>, v: f64) -> Result<Self> {
        let n = site_energies.len();
        let coupling = DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { v });
        Self::new(site_energies, coupling)
    }

    pub fn n_sites(&self) -> usize {
        self.site_energies.len()
    }

    pub fn site_energies(&self) -> &[f64] {
        &self.site_energies
    }

    pub fn coupling(&self) -> &DMatrix<f64> {
        &self.coupling
    }
}

/// `H = sum_i delta_i n_i + sum_{i<j} V_ij (hop_ij + hop_ji)` on one sector.
///
/// Spin hopping moves an excitation only onto an empty site; oscillator
/// hopping `a_i^dag a_j` carries the usual `sqrt(n_j (n_i + 1))` factor and
/// respects the sector's per-site cutoff.
pub fn build_hamiltonian(sector: &Arc<BasisSector>, spec: &HamiltonianSpec) -> Result<SparseOperator> {
    let n_sites = sector.n_sites();
    if spec.n_sites() != n_sites {
        return Err(Error::DimensionMismatch {
            expected: n_sites,
            got: spec.n_sites(),
        });
    }
    let mut entries = Vec::new();
    let mut work = vec![0u8; n_sites];
    for (col, config) in sector.configs().iter().enumerate() {
        let diag: f64 = config
            .iter()
            .zip(&spec.site_energies)
            .map(|(&n, &d)| n as f64 * d)
            .sum();
        if diag != 0.0 {
            entries.push((col, col, Complex64::new(diag, 0.0)));
        }
        for from in 0..n_sites {
            let n_from = config[from];
            if n_from == 0 {
                continue;
            }
            for to in 0..n_sites {
                let v = spec.coupling[(to, from)];
                if to == from || v == 0.0 {
                    continue;
                }
                let n_to = config[to];
                let amplitude = match sector.kind() {
                    SectorKind::Spin if n_to == 1 => continue,
                    SectorKind::Spin => 1.0,
                    SectorKind::Ho => (n_from as f64 * (n_to as f64 + 1.0)).sqrt(),
                };
                work.copy_from_slice(config);
                work[from] -= 1;
                work[to] += 1;
                let Some(row) = sector.index_of(&work) else {
                    continue;
                };
                entries.push((row, col, Complex64::new(v * amplitude, 0.0)));
            }
        }
    }
    SparseOperator::from_entries(sector.clone(), sector.clone(), entries)
}

/// Cached `exp(-i H dt)` for a fixed Hermitian `H`.
#[derive(Debug, Clone)]
pub struct Propagator {
    sector: Arc<BasisSector>,
    unitary: DMatrix<Complex64>,
}

impl Propagator {
    pub fn new(hamiltonian: &SparseOperator, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(invalid(format!("time step must be positive, got {dt}")));
        }
        let herm = hamiltonian
            .hermiticity_error()
            .ok_or_else(|| invalid("Hamiltonian must act within a single sector"))?;
        let dense = hamiltonian.to_dense();
        let scale = dense.iter().map(|v| v.norm()).fold(1.0, f64::max);
        if herm > 1e-12 * scale {
            return Err(Error::NotHermitian(herm));
        }
        let unitary = if dense.iter().all(|v| v.im == 0.0) {
            linalg::real_propagator(&dense.map(|v| v.re), dt)
        } else {
            linalg::herm_propagator(&dense, dt)
        };
        Ok(Propagator {
            sector: hamiltonian.domain().clone(),
            unitary,
        })
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        if **state.sector() != *self.sector {
            return Err(Error::DimensionMismatch {
                expected: self.sector.dim(),
                got: state.dim(),
            });
        }
        let psi = DVector::from_column_slice(state.amplitudes());
        let out = &self.unitary * psi;
        let mut next = StateVector::unnormalized(state.sector().clone(), out.as_slice().to_vec())?;
        if state.is_normalized() {
            next = StateVector::new(next.sector().clone(), next.into_amplitudes())?;
        }
        Ok(next)
    }
}

/// `exp(-i H dt) |psi>` by exact diagonalisation of the frozen `H`.
pub fn evolve_step(state: &StateVector, hamiltonian: &SparseOperator, dt: f64) -> Result<StateVector> {
    Propagator::new(hamiltonian, dt)?.apply(state)
}
