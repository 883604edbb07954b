use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ou::OuParams;
use super::{step_count, stream_rng, TrajectoryConfig};
use crate::dicke::{spin_dicke_state, SpinDickeLabel};
use crate::error::{Error, Result};
use crate::fockspace::{build_hamiltonian, collective_op, CollectiveOp, HamiltonianSpec};
use crate::linalg;

const NORM_DRIFT: f64 = 1e-8;

/// Ensemble mean of the time-averaged `<J+J->` with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmissionEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_traj: usize,
}

impl EmissionEstimate {
    pub(crate) fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let stderr = if n > 1 {
            let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        EmissionEstimate {
            mean,
            stderr,
            n_traj: n,
        }
    }
}

/// Time-averaged collective emission of a spin aggregate under site noise.
///
/// Each trajectory starts in the Dicke state `initial` (first member of a
/// degenerate multiplet), evolves under
/// `H(t) = sum_i delta_i(t) n_i + V sum_{i<j} hop_ij` with the detunings held
/// constant over each step, and records `<J+J->` on the step grid. The
/// time average over `[0, t_final]` uses the trapezoidal rule. The step is
/// `cfg.dt` or the params' `dt`, shortened so that it divides `t_final`.
pub fn simulate_noisy_emission(
    initial: SpinDickeLabel,
    v_dd: f64,
    ou: &OuParams,
    cfg: &TrajectoryConfig,
) -> Result<EmissionEstimate> {
    simulate_cell(initial, v_dd, ou, cfg, 0)
}

pub(crate) fn simulate_cell(
    initial: SpinDickeLabel,
    v_dd: f64,
    ou: &OuParams,
    cfg: &TrajectoryConfig,
    cell: u64,
) -> Result<EmissionEstimate> {
    cfg.validate()?;
    let psi0 = spin_dicke_state(initial, 0)?;
    let sector = psi0.sector().clone();
    let n_sites = sector.n_sites();
    let hop = build_hamiltonian(&sector, &HamiltonianSpec::all_to_all(vec![0.0; n_sites], v_dd)?)?
        .to_dense_real()?;
    let emission = if sector.n_excitations() > 0 {
        let down = collective_op(&sector, CollectiveOp::JMinus)?;
        let up = collective_op(down.codomain(), CollectiveOp::JPlus)?;
        up.compose(&down)?.to_dense_real()?
    } else {
        DMatrix::zeros(sector.dim(), sector.dim())
    };
    let occupations: Vec<Vec<f64>> = sector
        .configs()
        .iter()
        .map(|c| c.iter().map(|&n| n as f64).collect())
        .collect();

    let n_steps = step_count(cfg.t_final, cfg.dt.unwrap_or(ou.dt));
    let dt = cfg.t_final / n_steps as f64;
    let process = OuParams { dt, ..*ou }.process();

    let samples: Vec<f64> = (0..cfg.n_trajectories)
        .into_par_iter()
        .map(|traj| {
            let mut rngs: Vec<_> = (0..n_sites)
                .map(|site| stream_rng(cfg.seed, cell, traj as u64, site as u64))
                .collect();
            let mut delta: Vec<f64> = rngs.iter_mut().map(|r| process.stationary(r)).collect();
            let mut psi = psi0.amplitudes().to_vec();
            let mut acc = 0.5 * expectation(&emission, &psi);
            for step in 1..=n_steps {
                let mut h = hop.clone();
                for (i, occ) in occupations.iter().enumerate() {
                    h[(i, i)] += occ.iter().zip(&delta).map(|(n, d)| n * d).sum::<f64>();
                }
                linalg::propagate_real_in_place(h, dt, &mut psi);
                let drift = (psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt() - 1.0).abs();
                if drift > NORM_DRIFT {
                    return Err(Error::PropagationTolerance { drift, step });
                }
                let e = expectation(&emission, &psi);
                acc += if step == n_steps { 0.5 * e } else { e };
                for (d, rng) in delta.iter_mut().zip(rngs.iter_mut()) {
                    *d = process.step(*d, rng);
                }
            }
            Ok(acc / n_steps as f64)
        })
        .collect::<Result<_>>()?;
    Ok(EmissionEstimate::from_samples(&samples))
}

fn expectation(op: &DMatrix<f64>, psi: &[Complex64]) -> f64 {
    let n = psi.len();
    let mut total = 0.0;
    for i in 0..n {
        let mut row = Complex64::new(0.0, 0.0);
        for j in 0..n {
            row += psi[j] * op[(i, j)];
        }
        total += (psi[i].conj() * row).re;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: usize, seed: u64) -> TrajectoryConfig {
        TrajectoryConfig {
            n_trajectories: n,
            t_final: 1.0,
            dt: None,
            seed,
        }
    }

    #[test]
    fn noise_free_dicke_state_is_stationary() {
        for n in 1..=6 {
            for m in 0..=n {
                let label = SpinDickeLabel::new(n, n, m).unwrap();
                let want = (m * (n - m + 1)) as f64;
                for v in [0.0, 1.0, 37.0] {
                    let ou = OuParams::new(0.0, 0.33, 0.01).unwrap();
                    let est = simulate_noisy_emission(label, v, &ou, &cfg(2, 0)).unwrap();
                    assert!((est.mean - want).abs() < 1e-8, "N={n} m={m} V={v}: {}", est.mean);
                }
            }
        }
    }

    /// Uncoupled sites only dephase: `<J+J->(t) = m + 4 exp(-Var theta(t))`
    /// for `|4,4,2>`, with `theta` the integrated OU detuning.
    fn dephasing_oracle(lambda: f64, tau: f64) -> f64 {
        let curve = |t: f64| {
            let var = 2.0 * lambda * lambda * tau * tau * (t / tau - 1.0 + (-t / tau).exp());
            2.0 + 4.0 * (-var).exp()
        };
        let n = 20_000;
        let h = 1.0 / n as f64;
        (0..=n)
            .map(|k| {
                let w = if k == 0 || k == n { 0.5 } else { 1.0 };
                w * curve(k as f64 * h)
            })
            .sum::<f64>()
            * h
    }

    #[test]
    fn uncoupled_ensemble_matches_dephasing_oracle() {
        let label = SpinDickeLabel::new(4, 4, 2).unwrap();
        for (lambda, tau) in [(1.0, 0.33), (5.0, 0.33), (2.0, 2.0)] {
            let dt = super::super::default_dt(lambda, tau, 0.0, 1.0) / 4.0;
            let ou = OuParams::new(lambda, tau, dt).unwrap();
            let est = simulate_noisy_emission(label, 0.0, &ou, &cfg(4000, 9)).unwrap();
            let want = dephasing_oracle(lambda, tau);
            assert!(
                (est.mean - want).abs() < 4.0 * est.stderr + 5e-3,
                "lambda={lambda}: {} +- {} vs {want}",
                est.mean,
                est.stderr
            );
        }
    }

    #[test]
    fn replay_and_thread_independence() {
        let label = SpinDickeLabel::new(4, 4, 2).unwrap();
        let ou = OuParams::new(2.0, 0.33, 0.005).unwrap();
        let a = simulate_noisy_emission(label, 3.0, &ou, &cfg(16, 4)).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| simulate_noisy_emission(label, 3.0, &ou, &cfg(16, 4)).unwrap());
        assert_eq!(a, b);
        let c = simulate_noisy_emission(label, 3.0, &ou, &cfg(16, 5)).unwrap();
        assert_ne!(a.mean, c.mean);
    }
}
