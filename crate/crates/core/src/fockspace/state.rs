use std::sync::Arc;

use num_complex::Complex64;
use serde_json::{json, Value};

use super::operator::{collective_op, CollectiveOp};
use super::sector::{BasisSector, SectorKind};
use crate::error::{invalid, Error, Result};

const NORM_TOL: f64 = 1e-12;

/// Complex amplitudes over the configurations of a sector.
///
/// A vector built with [`StateVector::new`] is checked to have unit norm.
/// Intermediate results such as `J^- |psi>` are created through
/// [`StateVector::unnormalized`] and carry that flag.
#[derive(Debug, Clone)]
pub struct StateVector {
    sector: Arc<BasisSector>,
    amplitudes: Vec<Complex64>,
    normalized: bool,
}

impl StateVector {
    pub fn new(sector: Arc<BasisSector>, amplitudes: Vec<Complex64>) -> Result<Self> {
        let state = Self::unnormalized(sector, amplitudes)?;
        let norm = state.norm();
        if (norm - 1.0).abs() > NORM_TOL * state.dim().max(1) as f64 {
            return Err(invalid(format!("state norm is {norm}, expected 1")));
        }
        Ok(StateVector {
            normalized: true,
            ..state
        })
    }

    pub fn unnormalized(sector: Arc<BasisSector>, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != sector.dim() {
            return Err(Error::DimensionMismatch {
                expected: sector.dim(),
                got: amplitudes.len(),
            });
        }
        Ok(StateVector {
            sector,
            amplitudes,
            normalized: false,
        })
    }

    /// Build from real amplitudes and rescale to unit norm.
    pub fn from_real(sector: Arc<BasisSector>, amplitudes: &[f64]) -> Result<Self> {
        let amps = amplitudes.iter().map(|&a| Complex64::new(a, 0.0)).collect();
        Self::unnormalized(sector, amps)?.normalize()
    }

    /// Localised state on a single configuration.
    pub fn basis(sector: Arc<BasisSector>, index: usize) -> Result<Self> {
        if index >= sector.dim() {
            return Err(invalid(format!(
                "basis index {index} out of range for sector of size {}",
                sector.dim()
            )));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); sector.dim()];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector {
            sector,
            amplitudes: amps,
            normalized: true,
        })
    }

    pub fn from_config(sector: Arc<BasisSector>, config: &[u8]) -> Result<Self> {
        let index = sector
            .index_of(config)
            .ok_or_else(|| invalid(format!("configuration {config:?} not in sector")))?;
        Self::basis(sector, index)
    }

    pub fn sector(&self) -> &Arc<BasisSector> {
        &self.sector
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Rescale to unit norm. Fails on the zero vector.
    pub fn normalize(mut self) -> Result<Self> {
        let norm = self.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(invalid("cannot normalise a zero or non-finite vector"));
        }
        let inv = 1.0 / norm;
        self.amplitudes.iter_mut().for_each(|a| *a *= inv);
        self.normalized = true;
        Ok(self)
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if *self.sector != *other.sector {
            return Err(Error::SectorMismatch(
                "inner product between different sectors".into(),
            ));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Multiply by the phase that makes the first non-negligible amplitude
    /// real and positive.
    pub fn canonical_phase(mut self) -> Self {
        let tol = 1e-12 * self.norm().max(1e-300);
        if let Some(first) = self.amplitudes.iter().find(|a| a.norm() > tol).copied() {
            let phase = first.conj() / first.norm();
            self.amplitudes.iter_mut().for_each(|a| *a *= phase);
        }
        self
    }

    /// `(sum_alpha |C_alpha|^4)^-1` over the site-configuration basis.
    pub fn participation_ratio(&self) -> f64 {
        let n2 = self.norm_sqr();
        let s4: f64 = self.amplitudes.iter().map(|a| a.norm_sqr().powi(2)).sum();
        n2 * n2 / s4
    }

    /// `[[config, re, im], ...]`, one entry per configuration.
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.sector
                .configs()
                .iter()
                .zip(&self.amplitudes)
                .map(|(c, a)| json!([c, a.re, a.im]))
                .collect(),
        )
    }

    /// Inverse of [`StateVector::to_json`]. Configurations may appear in any
    /// order; missing ones are zero.
    pub fn from_json(sector: Arc<BasisSector>, value: &Value) -> Result<Self> {
        let entries = value
            .as_array()
            .ok_or_else(|| invalid("state JSON must be an array"))?;
        let mut amps = vec![Complex64::new(0.0, 0.0); sector.dim()];
        for entry in entries {
            let triple = entry
                .as_array()
                .filter(|t| t.len() == 3)
                .ok_or_else(|| invalid("state JSON entries must be [config, re, im]"))?;
            let config: Vec<u8> = serde_json::from_value(triple[0].clone())
                .map_err(|e| invalid(format!("bad configuration: {e}")))?;
            let re = triple[1].as_f64().ok_or_else(|| invalid("re must be a number"))?;
            let im = triple[2].as_f64().ok_or_else(|| invalid("im must be a number"))?;
            let idx = sector
                .index_of(&config)
                .ok_or_else(|| invalid(format!("configuration {config:?} not in sector")))?;
            amps[idx] = Complex64::new(re, im);
        }
        Self::unnormalized(sector, amps)
    }
}

/// `<psi| J^+ J^- |psi>` for spins or `<psi| A^dag A |psi>` for oscillators,
/// evaluated as the squared norm of the lowered state.
pub fn expectation_emission(state: &StateVector) -> Result<f64> {
    let sector = state.sector();
    if sector.n_excitations() == 0 {
        return Ok(0.0);
    }
    let which = match sector.kind() {
        SectorKind::Spin => CollectiveOp::JMinus,
        SectorKind::Ho => CollectiveOp::ALower,
    };
    let lowered = collective_op(sector, which)?.apply(state)?;
    Ok(lowered.norm_sqr())
}
