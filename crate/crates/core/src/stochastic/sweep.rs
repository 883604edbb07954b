use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use super::emission::{simulate_cell, EmissionEstimate};
use super::ou::OuParams;
use super::{default_dt, step_count, TrajectoryConfig};
use crate::dicke::SpinDickeLabel;
use crate::error::{invalid, Result};

/// Grid of estimates indexed by `(axis1[i], axis2[j])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axis1_name: String,
    pub axis2_name: String,
    pub axis1: Vec<f64>,
    pub axis2: Vec<f64>,
    pub mean: Vec<Vec<f64>>,
    pub stderr: Vec<Vec<f64>>,
    pub counts: Vec<Vec<usize>>,
    pub metadata: Map<String, Value>,
}

impl SweepResult {
    pub(crate) fn from_cells(
        axis1_name: &str,
        axis2_name: &str,
        axis1: Vec<f64>,
        axis2: Vec<f64>,
        cells: &[EmissionEstimate],
        metadata: Map<String, Value>,
    ) -> Self {
        let cols = axis2.len();
        let grid = |f: &dyn Fn(&EmissionEstimate) -> f64| -> Vec<Vec<f64>> {
            cells.chunks(cols).map(|row| row.iter().map(f).collect()).collect()
        };
        SweepResult {
            axis1_name: axis1_name.into(),
            axis2_name: axis2_name.into(),
            mean: grid(&|e| e.mean),
            stderr: grid(&|e| e.stderr),
            counts: cells.chunks(cols).map(|row| row.iter().map(|e| e.n_traj).collect()).collect(),
            axis1,
            axis2,
            metadata,
        }
    }

    /// `(axis1, axis2, mean, stderr, count)` in row-major order.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, f64, f64, usize)> + '_ {
        self.axis1.iter().enumerate().flat_map(move |(i, &a)| {
            self.axis2
                .iter()
                .enumerate()
                .map(move |(j, &b)| (a, b, self.mean[i][j], self.stderr[i][j], self.counts[i][j]))
        })
    }
}

/// Which noise parameter is swept against the coupling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SweepMode {
    /// Second axis is `Lambda`; `tau_c` is fixed.
    VVsLambda { tau_c: f64 },
    /// Second axis is `1/tau_c` (0 meaning static disorder); `Lambda` is fixed.
    VVsInvTauC { amplitude: f64 },
}

/// Noisy-emission estimates over a coupling grid and a noise grid.
///
/// Cells share `cfg.seed`; cell `(i, j)` draws from streams addressed by
/// its row-major index, so any cell can be reproduced on its own.
pub fn noise_sweep(
    mode: SweepMode,
    initial: SpinDickeLabel,
    v_grid: &[f64],
    noise_grid: &[f64],
    cfg: &TrajectoryConfig,
) -> Result<SweepResult> {
    cfg.validate()?;
    initial.validate()?;
    if v_grid.is_empty() || noise_grid.is_empty() {
        return Err(invalid("grids must be non-empty"));
    }
    if v_grid.iter().any(|v| !v.is_finite()) || noise_grid.iter().any(|x| !(*x >= 0.0 && x.is_finite())) {
        return Err(invalid("grid values must be finite, noise values >= 0"));
    }
    let cells: Vec<(usize, usize)> = (0..v_grid.len())
        .flat_map(|i| (0..noise_grid.len()).map(move |j| (i, j)))
        .collect();
    let params: Vec<OuParams> = cells
        .iter()
        .map(|&(i, j)| {
            let (amplitude, tau_c) = match mode {
                SweepMode::VVsLambda { tau_c } => (noise_grid[j], tau_c),
                SweepMode::VVsInvTauC { amplitude } => (amplitude, 1.0 / noise_grid[j]),
            };
            let dt = cfg.dt.unwrap_or_else(|| default_dt(amplitude, tau_c, v_grid[i], cfg.t_final));
            OuParams::new(amplitude, tau_c, dt)
        })
        .collect::<Result<_>>()?;
    let estimates: Vec<EmissionEstimate> = cells
        .par_iter()
        .zip(params.par_iter())
        .map(|(&(i, j), ou)| {
            let cell = (i * noise_grid.len() + j) as u64;
            simulate_cell(initial, v_grid[i], ou, cfg, cell)
        })
        .collect::<Result<_>>()?;

    let steps: Vec<Vec<usize>> = params
        .chunks(noise_grid.len())
        .map(|row| row.iter().map(|p| step_count(cfg.t_final, p.dt)).collect())
        .collect();
    let mut metadata = Map::new();
    metadata.insert("experiment".into(), json!("noise-sweep"));
    metadata.insert("mode".into(), serde_json::to_value(mode).unwrap_or(Value::Null));
    metadata.insert("initial".into(), serde_json::to_value(initial).unwrap_or(Value::Null));
    metadata.insert("n_trajectories".into(), json!(cfg.n_trajectories));
    metadata.insert("t_final".into(), json!(cfg.t_final));
    metadata.insert("seed".into(), json!(cfg.seed));
    metadata.insert("n_steps".into(), json!(steps));
    let axis2_name = match mode {
        SweepMode::VVsLambda { .. } => "Lambda",
        SweepMode::VVsInvTauC { .. } => "inv_tau_c",
    };
    Ok(SweepResult::from_cells(
        "V",
        axis2_name,
        v_grid.to_vec(),
        noise_grid.to_vec(),
        &estimates,
        metadata,
    ))
}
