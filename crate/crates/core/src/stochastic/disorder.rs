use nalgebra::DMatrix;
use rayon::prelude::*;
use serde_json::{json, Map};

use super::emission::EmissionEstimate;
use super::stream_rng;
use super::sweep::SweepResult;
use crate::error::{invalid, Result};
use crate::fockspace::{build_hamiltonian, enumerate_sector, HamiltonianSpec, SectorKind};
use crate::linalg;
use rand_distr::{Distribution, StandardNormal};

/// Disorder RMS substituted for `Lambda = 0`, where exact degeneracies
/// would leave the eigenbasis arbitrary.
pub const DISORDER_FLOOR: f64 = 1e-8;

/// Mean participation ratio over all eigenvectors of a real symmetric `H`.
pub fn mean_eigenstate_pr(h: DMatrix<f64>) -> f64 {
    let (_, vectors) = linalg::sym_eigen(h);
    let n = vectors.ncols();
    let total: f64 = vectors
        .column_iter()
        .map(|c| 1.0 / c.iter().map(|x| x.powi(4)).sum::<f64>())
        .sum();
    total / n as f64
}

/// Static-disorder scan of eigenstate delocalisation.
///
/// For every `(V, Lambda)` cell and realization, site energies are drawn
/// from the stationary OU marginal `N(0, Lambda^2)`, the all-to-all
/// Hamiltonian with coupling `V` is diagonalised in the spin sector with
/// `n_excitations`, and the participation ratio is averaged over its
/// eigenstates. `mean` and `stderr` are taken over realizations.
pub fn disorder_pr_scan(
    n_sites: usize,
    n_excitations: usize,
    v_grid: &[f64],
    lambda_grid: &[f64],
    n_realizations: usize,
    seed: u64,
) -> Result<SweepResult> {
    if v_grid.is_empty() || lambda_grid.is_empty() {
        return Err(invalid("grids must be non-empty"));
    }
    if n_realizations == 0 {
        return Err(invalid("n_realizations must be at least 1"));
    }
    if lambda_grid.iter().any(|l| !(*l >= 0.0 && l.is_finite())) {
        return Err(invalid("disorder amplitudes must be finite and >= 0"));
    }
    if v_grid.iter().any(|v| !v.is_finite()) {
        return Err(invalid("couplings must be finite"));
    }
    if lambda_grid.contains(&0.0) {
        log::warn!("Lambda = 0 replaced by {DISORDER_FLOOR:e} to lift exact degeneracies");
    }
    let sector = enumerate_sector(SectorKind::Spin, n_sites, n_excitations, None)?;
    let occupations: Vec<Vec<f64>> = sector
        .configs()
        .iter()
        .map(|c| c.iter().map(|&n| n as f64).collect())
        .collect();
    let cells: Vec<(usize, usize)> = (0..v_grid.len())
        .flat_map(|i| (0..lambda_grid.len()).map(move |j| (i, j)))
        .collect();
    let estimates: Vec<EmissionEstimate> = cells
        .par_iter()
        .map(|&(i, j)| {
            let v = v_grid[i];
            let lambda = if lambda_grid[j] == 0.0 { DISORDER_FLOOR } else { lambda_grid[j] };
            let cell = (i * lambda_grid.len() + j) as u64;
            let hop = build_hamiltonian(&sector, &HamiltonianSpec::all_to_all(vec![0.0; n_sites], v)?)?
                .to_dense_real()?;
            let samples: Vec<f64> = (0..n_realizations)
                .into_par_iter()
                .map(|r| {
                    let delta: Vec<f64> = (0..n_sites)
                        .map(|site| {
                            let xi: f64 = StandardNormal.sample(&mut stream_rng(seed, cell, r as u64, site as u64));
                            lambda * xi
                        })
                        .collect();
                    let mut h = hop.clone();
                    for (k, occ) in occupations.iter().enumerate() {
                        h[(k, k)] += occ.iter().zip(&delta).map(|(n, d)| n * d).sum::<f64>();
                    }
                    mean_eigenstate_pr(h)
                })
                .collect();
            Ok(EmissionEstimate::from_samples(&samples))
        })
        .collect::<Result<_>>()?;

    let mut metadata = Map::new();
    metadata.insert("experiment".into(), json!("disorder-pr"));
    metadata.insert("n_sites".into(), json!(n_sites));
    metadata.insert("n_excitations".into(), json!(n_excitations));
    metadata.insert("n_realizations".into(), json!(n_realizations));
    metadata.insert("seed".into(), json!(seed));
    metadata.insert("disorder_floor".into(), json!(DISORDER_FLOOR));
    metadata.insert("pr_max".into(), json!(sector.dim()));
    Ok(SweepResult::from_cells(
        "V",
        "Lambda",
        v_grid.to_vec(),
        lambda_grid.to_vec(),
        &estimates,
        metadata,
    ))
}
