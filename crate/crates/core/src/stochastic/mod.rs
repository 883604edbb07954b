//! Site-energy noise and the robustness experiments built on it.
//!
//! Every random number is drawn from a ChaCha stream addressed by
//! `(seed, cell, trajectory, site)`, so results do not depend on how work
//! is scheduled across threads.

mod disorder;
mod emission;
mod ou;
mod sweep;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub use disorder::{disorder_pr_scan, mean_eigenstate_pr, DISORDER_FLOOR};
pub use emission::{simulate_noisy_emission, EmissionEstimate};
pub use ou::{ou_path, OuParams, OuProcess};
pub use sweep::{noise_sweep, SweepMode, SweepResult};

/// Random stream for one site of one trajectory in one sweep cell.
pub fn stream_rng(seed: u64, cell: u64, trajectory: u64, site: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&cell.to_le_bytes());
    key[16..24].copy_from_slice(&trajectory.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(site);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryConfig {
    pub n_trajectories: usize,
    /// Averaging window in units of `1/gamma0`.
    pub t_final: f64,
    /// Noise step; `None` selects [`default_dt`].
    pub dt: Option<f64>,
    pub seed: u64,
}

impl Default for TrajectoryConfig {
    fn default() -> Self {
        TrajectoryConfig {
            n_trajectories: 200,
            t_final: 1.0,
            dt: None,
            seed: 0,
        }
    }
}

impl TrajectoryConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_trajectories == 0 {
            return Err(invalid("n_trajectories must be at least 1"));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(invalid(format!("t_final must be positive, got {}", self.t_final)));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(invalid(format!("dt must be positive, got {dt}")));
            }
        }
        Ok(())
    }
}

/// `min(tau_c, 1/V, 1/Lambda, t_final) / 20`, ignoring infinite terms.
pub fn default_dt(amplitude: f64, tau_c: f64, v_dd: f64, t_final: f64) -> f64 {
    [tau_c, 1.0 / v_dd.abs(), 1.0 / amplitude, t_final]
        .into_iter()
        .filter(|x| x.is_finite() && *x > 0.0)
        .fold(f64::INFINITY, f64::min)
        / 20.0
}

/// Number of steps covering `t_final` with steps no longer than `dt`.
pub(crate) fn step_count(t_final: f64, dt: f64) -> usize {
    ((t_final / dt) - 1e-9).ceil().max(1.0) as usize
}
