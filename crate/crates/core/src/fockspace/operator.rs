use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::sector::{BasisSector, SectorKind};
use super::state::StateVector;
use crate::error::{invalid, Error, Result};

/// Collective ladder operators.
///
/// `JMinus`/`JPlus` are `sum_i sigma_i^-/+` on spins. `ALower`/`ARaise`
/// are `sum_j a_j` and its adjoint on oscillators (`A = sqrt(N) c_N`).
/// `C(k)` is the Fourier mode `c_k = N^-1/2 sum_j exp(2 pi i j k / N) a_j`
/// with sites numbered `j = 1..=N` and `k = 1..=N`; `k = N` is the bright
/// mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CollectiveOp {
    JMinus,
    JPlus,
    ALower,
    ARaise,
    C(usize),
    CDagger(usize),
}

/// Operator between two sectors stored as `(row, col, value)` triplets, with
/// rows indexing the codomain and columns the domain.
#[derive(Debug, Clone)]
pub struct SparseOperator {
    domain: Arc<BasisSector>,
    codomain: Arc<BasisSector>,
    entries: Vec<(usize, usize, Complex64)>,
}

impl SparseOperator {
    /// Duplicate `(row, col)` pairs are summed.
    pub fn from_entries(
        domain: Arc<BasisSector>,
        codomain: Arc<BasisSector>,
        entries: impl IntoIterator<Item = (usize, usize, Complex64)>,
    ) -> Result<Self> {
        let mut merged: Vec<(usize, usize, Complex64)> = Vec::new();
        let mut raw: Vec<_> = entries.into_iter().collect();
        for &(r, c, _) in &raw {
            if r >= codomain.dim() || c >= domain.dim() {
                return Err(invalid(format!(
                    "entry ({r}, {c}) outside {}x{} operator",
                    codomain.dim(),
                    domain.dim()
                )));
            }
        }
        raw.sort_by_key(|&(r, c, _)| (r, c));
        for (r, c, v) in raw {
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        Ok(SparseOperator {
            domain,
            codomain,
            entries: merged,
        })
    }

    pub fn zero(domain: Arc<BasisSector>, codomain: Arc<BasisSector>) -> Self {
        SparseOperator {
            domain,
            codomain,
            entries: Vec::new(),
        }
    }

    pub fn identity(sector: Arc<BasisSector>) -> Self {
        let entries = (0..sector.dim())
            .map(|i| (i, i, Complex64::new(1.0, 0.0)))
            .collect();
        SparseOperator {
            domain: sector.clone(),
            codomain: sector,
            entries,
        }
    }

    pub fn diagonal(sector: Arc<BasisSector>, values: &[f64]) -> Result<Self> {
        if values.len() != sector.dim() {
            return Err(Error::DimensionMismatch {
                expected: sector.dim(),
                got: values.len(),
            });
        }
        let entries = values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(i, &v)| (i, i, Complex64::new(v, 0.0)))
            .collect();
        Ok(SparseOperator {
            domain: sector.clone(),
            codomain: sector,
            entries,
        })
    }

    pub fn domain(&self) -> &Arc<BasisSector> {
        &self.domain
    }

    pub fn codomain(&self) -> &Arc<BasisSector> {
        &self.codomain
    }

    pub fn entries(&self) -> &[(usize, usize, Complex64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_square(&self) -> bool {
        *self.domain == *self.codomain
    }

    /// `O |psi>`, returned unnormalised.
    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        if **state.sector() != *self.domain {
            return Err(Error::SectorMismatch(format!(
                "operator domain {:?} does not match state sector {:?}",
                self.domain,
                state.sector()
            )));
        }
        let psi = state.amplitudes();
        let mut out = vec![Complex64::new(0.0, 0.0); self.codomain.dim()];
        for &(r, c, v) in &self.entries {
            out[r] += v * psi[c];
        }
        StateVector::unnormalized(self.codomain.clone(), out)
    }

    pub fn adjoint(&self) -> Self {
        let mut entries: Vec<_> = self
            .entries
            .iter()
            .map(|&(r, c, v)| (c, r, v.conj()))
            .collect();
        entries.sort_by_key(|&(r, c, _)| (r, c));
        SparseOperator {
            domain: self.codomain.clone(),
            codomain: self.domain.clone(),
            entries,
        }
    }

    /// `self * rhs` (apply `rhs` first).
    pub fn compose(&self, rhs: &SparseOperator) -> Result<Self> {
        if *rhs.codomain != *self.domain {
            return Err(Error::SectorMismatch(
                "composition of operators with incompatible sectors".into(),
            ));
        }
        let mut by_row: HashMap<usize, Vec<(usize, Complex64)>> = HashMap::new();
        for &(r, c, v) in &rhs.entries {
            by_row.entry(r).or_default().push((c, v));
        }
        let mut entries = Vec::new();
        for &(r1, c1, v1) in &self.entries {
            if let Some(cols) = by_row.get(&c1) {
                entries.extend(cols.iter().map(|&(c2, v2)| (r1, c2, v1 * v2)));
            }
        }
        Self::from_entries(rhs.domain.clone(), self.codomain.clone(), entries)
    }

    pub fn add(&self, other: &SparseOperator) -> Result<Self> {
        if *self.domain != *other.domain || *self.codomain != *other.codomain {
            return Err(Error::SectorMismatch(
                "sum of operators with different sectors".into(),
            ));
        }
        Self::from_entries(
            self.domain.clone(),
            self.codomain.clone(),
            self.entries.iter().chain(&other.entries).copied(),
        )
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        SparseOperator {
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
            entries: self
                .entries
                .iter()
                .map(|&(r, c, v)| (r, c, v * factor))
                .collect(),
        }
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.codomain.dim(), self.domain.dim());
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v;
        }
        m
    }

    /// Real part of a square operator as a dense matrix. Fails if any entry
    /// has an imaginary part.
    pub fn to_dense_real(&self) -> Result<DMatrix<f64>> {
        if !self.is_square() {
            return Err(invalid("operator is not square"));
        }
        let mut m = DMatrix::zeros(self.codomain.dim(), self.domain.dim());
        for &(r, c, v) in &self.entries {
            if v.im != 0.0 {
                return Err(invalid("operator has complex entries"));
            }
            m[(r, c)] += v.re;
        }
        Ok(m)
    }

    /// Largest `|O_rc - conj(O_cr)|`, or `None` for non-square operators.
    pub fn hermiticity_error(&self) -> Option<f64> {
        if !self.is_square() {
            return None;
        }
        let d = self.to_dense();
        let mut worst: f64 = 0.0;
        for r in 0..d.nrows() {
            for c in r..d.ncols() {
                worst = worst.max((d[(r, c)] - d[(c, r)].conj()).norm());
            }
        }
        Some(worst)
    }

    /// Entry-wise comparison over the dense representation.
    pub fn approx_eq(&self, other: &SparseOperator, tol: f64) -> bool {
        *self.domain == *other.domain
            && *self.codomain == *other.codomain
            && (self.to_dense() - other.to_dense())
                .iter()
                .all(|d| d.norm() <= tol)
    }
}

fn shifted_sector(sector: &BasisSector, raise: bool) -> Result<Arc<BasisSector>> {
    let n = sector.n_excitations();
    if raise {
        let cutoff = match sector.kind() {
            SectorKind::Spin => 1,
            SectorKind::Ho if !sector.is_truncated() => sector.per_site_cutoff().max(n + 1),
            SectorKind::Ho => sector.per_site_cutoff(),
        };
        if n + 1 > sector.n_sites() * cutoff {
            return Err(invalid(format!(
                "cannot raise: sector is full at {n} excitations"
            )));
        }
        BasisSector::new(sector.kind(), sector.n_sites(), n + 1, Some(cutoff)).map(Arc::new)
    } else {
        if n == 0 {
            return Err(invalid("cannot lower the vacuum sector"));
        }
        BasisSector::new(
            sector.kind(),
            sector.n_sites(),
            n - 1,
            Some(sector.per_site_cutoff()),
        )
        .map(Arc::new)
    }
}

/// Weighted sum of single-site ladder operators, `sum_j w_j b_j` with `b_j`
/// the site lowering (or raising) operator.
fn weighted_ladder(
    sector: &Arc<BasisSector>,
    raise: bool,
    weight: impl Fn(usize) -> Complex64,
) -> Result<SparseOperator> {
    let target = shifted_sector(sector, raise)?;
    let mut entries = Vec::new();
    let mut work = vec![0u8; sector.n_sites()];
    for (col, config) in sector.configs().iter().enumerate() {
        for site in 0..sector.n_sites() {
            let n = config[site];
            let amplitude = if raise {
                match sector.kind() {
                    SectorKind::Spin if n == 1 => continue,
                    SectorKind::Spin => 1.0,
                    SectorKind::Ho => (n as f64 + 1.0).sqrt(),
                }
            } else {
                if n == 0 {
                    continue;
                }
                (n as f64).sqrt()
            };
            work.copy_from_slice(config);
            work[site] = if raise { n + 1 } else { n - 1 };
            // raising past a truncation cutoff drops the term
            let Some(row) = target.index_of(&work) else {
                continue;
            };
            entries.push((row, col, weight(site) * amplitude));
        }
    }
    SparseOperator::from_entries(sector.clone(), target, entries)
}

/// Lowering (`raise = false`) or raising operator on one site.
pub fn site_op(sector: &Arc<BasisSector>, site: usize, raise: bool) -> Result<SparseOperator> {
    if site >= sector.n_sites() {
        return Err(invalid(format!("site {site} out of range")));
    }
    weighted_ladder(sector, raise, |j| {
        if j == site {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

pub fn collective_op(sector: &Arc<BasisSector>, which: CollectiveOp) -> Result<SparseOperator> {
    let kind = sector.kind();
    let n_sites = sector.n_sites();
    let one = |_: usize| Complex64::new(1.0, 0.0);
    match (which, kind) {
        (CollectiveOp::JMinus, SectorKind::Spin) => weighted_ladder(sector, false, one),
        (CollectiveOp::JPlus, SectorKind::Spin) => weighted_ladder(sector, true, one),
        (CollectiveOp::ALower, SectorKind::Ho) => weighted_ladder(sector, false, one),
        (CollectiveOp::ARaise, SectorKind::Ho) => weighted_ladder(sector, true, one),
        (CollectiveOp::C(k) | CollectiveOp::CDagger(k), SectorKind::Ho) => {
            if k == 0 || k > n_sites {
                return Err(invalid(format!("mode index {k} outside 1..={n_sites}")));
            }
            let raise = matches!(which, CollectiveOp::CDagger(_));
            let norm = 1.0 / (n_sites as f64).sqrt();
            weighted_ladder(sector, raise, |site| {
                // sites are numbered from 1 in the mode definition
                let phase = 2.0 * PI * ((site + 1) * k) as f64 / n_sites as f64;
                let w = Complex64::from_polar(norm, phase);
                if raise {
                    w.conj()
                } else {
                    w
                }
            })
        }
        _ => Err(invalid(format!(
            "operator {which:?} is not defined on a {kind} sector"
        ))),
    }
}
