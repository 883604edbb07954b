//! Spin Dicke states and oscillator collective-mode states.
//!
//! Spin labels use the shifted convention `|N, l, m>` with `l = l' + N/2`
//! and `m = m' + N/2`, so `m` counts excitations and `N/2 <= l <= N`. The
//! multiplet with a given `l` in the `m`-excitation sector is degenerate for
//! `l < N`; members are told apart by a degeneracy index into a fixed
//! orthonormal basis of the eigenspace.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fockspace::{
    collective_op, enumerate_sector, BasisSector, CollectiveOp, SectorKind, StateVector,
};
use crate::linalg;

const EIGEN_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpinDickeLabel {
    pub n_sites: usize,
    pub l: usize,
    pub m: usize,
}

impl SpinDickeLabel {
    pub fn new(n_sites: usize, l: usize, m: usize) -> Result<Self> {
        let label = SpinDickeLabel { n_sites, l, m };
        label.validate()?;
        Ok(label)
    }

    pub fn validate(&self) -> Result<()> {
        let SpinDickeLabel { n_sites, l, m } = *self;
        let ok = n_sites >= 1 && l <= n_sites && 2 * l >= n_sites && m + l >= n_sites && m <= l;
        if ok {
            Ok(())
        } else {
            Err(Error::NoSuchMultiplet {
                n_sites,
                l,
                m,
                index: 0,
            })
        }
    }

    /// Total angular momentum quantum number `l' = l - N/2`.
    pub fn l_prime(&self) -> f64 {
        self.l as f64 - self.n_sites as f64 / 2.0
    }

    /// Number of orthogonal multiplets sharing `(N, l)`, i.e. the
    /// degeneracy of this label within its excitation sector.
    pub fn multiplicity(&self) -> usize {
        let k = self.n_sites - self.l;
        let below = if k == 0 { 0 } else { binomial_coefficient(self.n_sites, k - 1) };
        binomial_coefficient(self.n_sites, k) - below
    }

    /// All valid labels for `N` sites, ordered by `m` then descending `l`.
    pub fn all(n_sites: usize) -> Vec<SpinDickeLabel> {
        let mut out = Vec::new();
        for m in 0..=n_sites {
            for l in (m.max(n_sites - m)..=n_sites).rev() {
                out.push(SpinDickeLabel { n_sites, l, m });
            }
        }
        out
    }
}

impl fmt::Display for SpinDickeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{},{},{}>", self.n_sites, self.l, self.m)
    }
}

/// Oscillator collective state `|N, R, d>`: `R` quanta in the bright mode
/// `c_N` and `d_k` quanta in dark mode `c_k`, `k = 1..N-1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HoDickeLabel {
    pub n_sites: usize,
    pub r: usize,
    pub dark: Vec<usize>,
}

impl HoDickeLabel {
    pub fn new(n_sites: usize, r: usize, dark: Vec<usize>) -> Result<Self> {
        let label = HoDickeLabel { n_sites, r, dark };
        label.validate()?;
        Ok(label)
    }

    /// Bright-mode state with all dark modes empty.
    pub fn bright(n_sites: usize, r: usize) -> Result<Self> {
        Self::new(n_sites, r, vec![0; n_sites.saturating_sub(1)])
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sites == 0 {
            return Err(invalid("an oscillator aggregate needs at least one site"));
        }
        if self.dark.len() != self.n_sites - 1 {
            return Err(Error::DimensionMismatch {
                expected: self.n_sites - 1,
                got: self.dark.len(),
            });
        }
        Ok(())
    }

    pub fn n_excitations(&self) -> usize {
        self.r + self.dark.iter().sum::<usize>()
    }

    /// Every label with `R <= max_r` and total dark occupation `<= max_dark`.
    pub fn all(n_sites: usize, max_r: usize, max_dark: usize) -> Vec<HoDickeLabel> {
        let mut darks = Vec::new();
        let mut cur = vec![0; n_sites.saturating_sub(1)];
        dark_vectors(&mut cur, 0, max_dark, &mut darks);
        let mut out = Vec::new();
        for r in 0..=max_r {
            for d in &darks {
                out.push(HoDickeLabel {
                    n_sites,
                    r,
                    dark: d.clone(),
                });
            }
        }
        out
    }
}

fn dark_vectors(cur: &mut Vec<usize>, pos: usize, left: usize, out: &mut Vec<Vec<usize>>) {
    if pos == cur.len() {
        out.push(cur.clone());
        return;
    }
    for k in 0..=left {
        cur[pos] = k;
        dark_vectors(cur, pos + 1, left - k, out);
    }
    cur[pos] = 0;
}

impl fmt::Display for HoDickeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d: Vec<String> = self.dark.iter().map(|d| d.to_string()).collect();
        write!(f, "|{},{},{{{}}}>", self.n_sites, self.r, d.join(","))
    }
}

/// One member of a (possibly degenerate) spin multiplet.
#[derive(Debug, Clone)]
pub struct Multiplet {
    pub label: SpinDickeLabel,
    pub index: usize,
    pub state: StateVector,
}

pub fn binomial_coefficient(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

/// `J^2 = (J+J- + J-J+)/2 + Jz^2` on a spin sector, with `J = sum sigma / 2`.
pub fn total_spin_squared(sector: &Arc<BasisSector>) -> Result<DMatrix<f64>> {
    if sector.kind() != SectorKind::Spin {
        return Err(invalid("J^2 is defined on spin sectors only"));
    }
    let dim = sector.dim();
    let mut j2 = DMatrix::<f64>::zeros(dim, dim);
    if sector.n_excitations() > 0 {
        let down = collective_op(sector, CollectiveOp::JMinus)?;
        let up = collective_op(down.codomain(), CollectiveOp::JPlus)?;
        j2 += up.compose(&down)?.to_dense_real()? * 0.5;
    }
    if sector.n_excitations() < sector.n_sites() {
        let up = collective_op(sector, CollectiveOp::JPlus)?;
        let down = collective_op(up.codomain(), CollectiveOp::JMinus)?;
        j2 += down.compose(&up)?.to_dense_real()? * 0.5;
    }
    let jz = sector.n_excitations() as f64 - sector.n_sites() as f64 / 2.0;
    for i in 0..dim {
        j2[(i, i)] += jz * jz;
    }
    Ok(j2)
}

/// Orthonormal basis of the `l` multiplet in the `m`-excitation sector.
pub fn spin_multiplet(label: SpinDickeLabel) -> Result<Vec<Multiplet>> {
    label.validate()?;
    let sector = enumerate_sector(SectorKind::Spin, label.n_sites, label.m, None)?;
    let (values, vectors) = linalg::sym_eigen(total_spin_squared(&sector)?);
    let lp = label.l_prime();
    let target = lp * (lp + 1.0);
    let cols: Vec<usize> = (0..values.len())
        .filter(|&i| (values[i] - target).abs() < EIGEN_TOL)
        .collect();
    if cols.len() != label.multiplicity() {
        return Err(Error::NoSuchMultiplet {
            n_sites: label.n_sites,
            l: label.l,
            m: label.m,
            index: 0,
        });
    }
    let span = vectors.select_columns(&cols);
    linalg::canonical_span_basis(&span)
        .into_iter()
        .enumerate()
        .map(|(index, v)| {
            let amps = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
            Ok(Multiplet {
                label,
                index,
                state: StateVector::new(sector.clone(), amps)?,
            })
        })
        .collect()
}

/// Simultaneous eigenvector of `J^2` and `Jz` labelled by `(N, l, m)`.
pub fn spin_dicke_state(label: SpinDickeLabel, degeneracy_index: usize) -> Result<StateVector> {
    label.validate()?;
    if degeneracy_index >= label.multiplicity() {
        return Err(Error::NoSuchMultiplet {
            n_sites: label.n_sites,
            l: label.l,
            m: label.m,
            index: degeneracy_index,
        });
    }
    let mut members = spin_multiplet(label)?;
    Ok(members.swap_remove(degeneracy_index).state)
}

/// `(c_N^dag)^R / sqrt(R!) prod_k (c_k^dag)^{d_k} / sqrt(d_k!) |0>`.
///
/// `cutoff` is the per-site occupation limit of the returned sector; it
/// defaults to the excitation number, and anything smaller would clip the
/// state.
pub fn ho_collective_state(label: &HoDickeLabel, cutoff: Option<usize>) -> Result<StateVector> {
    label.validate()?;
    let n = label.n_excitations();
    if let Some(c) = cutoff {
        if c < n {
            return Err(Error::TruncationOverflow {
                cutoff: c,
                excitations: n,
            });
        }
    }
    let vacuum = enumerate_sector(SectorKind::Ho, label.n_sites, 0, None)?;
    let mut state = StateVector::basis(vacuum, 0)?;
    let modes = std::iter::repeat_n(label.n_sites, label.r).chain(
        label
            .dark
            .iter()
            .enumerate()
            .flat_map(|(k, &d)| std::iter::repeat_n(k + 1, d)),
    );
    for k in modes {
        let op = collective_op(state.sector(), CollectiveOp::CDagger(k))?;
        state = op.apply(&state)?;
    }
    let mut norm = factorial(label.r);
    for &d in &label.dark {
        norm *= factorial(d);
    }
    let scale = 1.0 / norm.sqrt();
    let target = enumerate_sector(SectorKind::Ho, label.n_sites, n, cutoff)?;
    let amps = state.into_amplitudes().into_iter().map(|a| a * scale).collect();
    Ok(StateVector::new(target, amps)?.canonical_phase())
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `(sum |C_a|^4)^-1` over site configurations.
pub fn participation_ratio(state: &StateVector) -> f64 {
    state.participation_ratio()
}
