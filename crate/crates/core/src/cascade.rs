//! Rate equations down the bright Dicke ladder.
//!
//! Level `k` holds `k` excitations and decays to `k - 1` with rate
//! `gamma_k`: `k (N - k + 1)` for spins and `N k` for oscillators. The
//! populations obey `dp_k/dt = gamma_{k+1} p_{k+1} - gamma_k p_k` and the
//! instantaneous emission rate is `sum_k gamma_k p_k`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fockspace::SectorKind;

const ATOL: f64 = 1e-10;
const RTOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderSpec {
    pub kind: SectorKind,
    pub n_sites: usize,
    pub max_level: usize,
    /// `rates[k - 1]` is the decay rate of level `k`.
    pub rates: Vec<f64>,
}

impl LadderSpec {
    pub fn rate(&self, level: usize) -> f64 {
        if level == 0 {
            0.0
        } else {
            self.rates[level - 1]
        }
    }
}

/// Ladder cap used when none is given: `N` for spins, `4 R0` for oscillators.
pub fn default_max_level(kind: SectorKind, n_sites: usize, initial_level: usize) -> usize {
    match kind {
        SectorKind::Spin => n_sites,
        SectorKind::Ho => (4 * initial_level).max(1),
    }
}

pub fn ladder_rates(kind: SectorKind, n_sites: usize, max_level: usize) -> Result<LadderSpec> {
    if n_sites == 0 {
        return Err(invalid("a ladder needs at least one site"));
    }
    if kind == SectorKind::Spin && max_level > n_sites {
        return Err(invalid(format!(
            "spin ladder of {n_sites} sites has no level {max_level}"
        )));
    }
    let rates = (1..=max_level)
        .map(|k| match kind {
            SectorKind::Spin => (k * (n_sites - k + 1)) as f64,
            SectorKind::Ho => (n_sites * k) as f64,
        })
        .collect();
    Ok(LadderSpec {
        kind,
        n_sites,
        max_level,
        rates,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationTrajectory {
    pub times: Vec<f64>,
    /// `populations[i][k]` is the population of level `k` at `times[i]`.
    pub populations: Vec<Vec<f64>>,
    /// Emission rate in units of `gamma0`.
    pub gamma: Vec<f64>,
}

impl PopulationTrajectory {
    pub fn mean_level(&self, i: usize) -> f64 {
        self.populations[i]
            .iter()
            .enumerate()
            .map(|(k, p)| k as f64 * p)
            .sum()
    }

    /// Trapezoidal integral of the emission rate.
    pub fn integrated_emission(&self) -> f64 {
        self.times
            .windows(2)
            .zip(self.gamma.windows(2))
            .map(|(t, g)| 0.5 * (t[1] - t[0]) * (g[0] + g[1]))
            .sum()
    }

    /// Largest deviation of the total population from one.
    pub fn conservation_error(&self) -> f64 {
        self.populations
            .iter()
            .map(|p| (p.iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

fn derivative(rates: &[f64], p: &[f64], dp: &mut [f64]) {
    let top = p.len() - 1;
    for k in 0..=top {
        let gain = if k < top { rates[k] * p[k + 1] } else { 0.0 };
        let loss = if k > 0 { rates[k - 1] * p[k] } else { 0.0 };
        dp[k] = gain - loss;
    }
}

// Dormand-Prince 5(4) tableau; the system is autonomous so the nodes are unused.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Adaptive Dormand-Prince integration of the ladder from `t0` to `t1`.
fn integrate(rates: &[f64], y: &mut [f64], t0: f64, t1: f64, h: &mut f64) -> Result<()> {
    let n = y.len();
    let mut k = vec![vec![0.0; n]; 7];
    let mut stage = vec![0.0; n];
    let mut y5 = vec![0.0; n];
    let mut t = t0;
    while t < t1 {
        let step = h.min(t1 - t);
        if step < 1e-14 * t1.abs().max(1.0) {
            return Err(Error::StepSizeFailure { t });
        }
        derivative(rates, y, &mut k[0]);
        for s in 1..7 {
            for i in 0..n {
                stage[i] = y[i] + step * (0..s).map(|j| A[s][j] * k[j][i]).sum::<f64>();
            }
            derivative(rates, &stage, &mut k[s]);
        }
        let mut err: f64 = 0.0;
        for i in 0..n {
            y5[i] = y[i] + step * (0..7).map(|s| B5[s] * k[s][i]).sum::<f64>();
            let y4 = y[i] + step * (0..7).map(|s| B4[s] * k[s][i]).sum::<f64>();
            let scale = ATOL + RTOL * y[i].abs().max(y5[i].abs());
            err = err.max((y5[i] - y4).abs() / scale);
        }
        if err <= 1.0 {
            t += step;
            y.copy_from_slice(&y5);
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        *h = step * factor;
    }
    Ok(())
}

/// Populations on `n_steps + 1` equally spaced times in `[0, t_final]`,
/// starting with all weight on `initial_level`.
pub fn evolve_cascade(
    spec: &LadderSpec,
    initial_level: usize,
    t_final: f64,
    n_steps: usize,
) -> Result<PopulationTrajectory> {
    if initial_level > spec.max_level {
        return Err(invalid(format!(
            "initial level {initial_level} above ladder top {}",
            spec.max_level
        )));
    }
    if !(t_final > 0.0 && t_final.is_finite()) {
        return Err(invalid(format!("t_final must be positive, got {t_final}")));
    }
    if n_steps == 0 {
        return Err(invalid("need at least one output step"));
    }
    if spec.rates.len() != spec.max_level || spec.rates.iter().any(|r| r.is_nan() || *r < 0.0) {
        return Err(invalid("ladder rates must be non-negative, one per level"));
    }
    let mut p = vec![0.0; spec.max_level + 1];
    p[initial_level] = 1.0;
    let gamma_of = |p: &[f64]| -> f64 { (1..p.len()).map(|k| spec.rates[k - 1] * p[k]).sum() };
    let fastest = spec.rates.iter().fold(1.0f64, |a, &r| a.max(r));
    let mut h = 0.01 / fastest;
    let mut times = vec![0.0];
    let mut populations = vec![p.clone()];
    let mut gamma = vec![gamma_of(&p)];
    for i in 1..=n_steps {
        let t0 = t_final * (i - 1) as f64 / n_steps as f64;
        let t1 = t_final * i as f64 / n_steps as f64;
        integrate(&spec.rates, &mut p, t0, t1, &mut h)?;
        times.push(t1);
        gamma.push(gamma_of(&p));
        populations.push(p.clone());
    }
    let tail: f64 = populations
        .last()
        .map(|p| p[initial_level + 1..].iter().map(|x| x.abs()).sum())
        .unwrap_or(0.0);
    if tail > 1e-12 {
        return Err(invalid(format!("population {tail:e} leaked above the initial level")));
    }
    Ok(PopulationTrajectory {
        times,
        populations,
        gamma,
    })
}

/// Time of the emission maximum when it lies strictly after `t = 0`.
pub fn peak_time(trajectory: &PopulationTrajectory) -> Option<f64> {
    let g0 = *trajectory.gamma.first()?;
    let (i, gmax) = trajectory
        .gamma
        .iter()
        .enumerate()
        .fold((0, g0), |(bi, bg), (i, &g)| if g > bg { (i, g) } else { (bi, bg) });
    (i > 0 && gmax > g0 + 1e-12 * g0.abs().max(1.0)).then(|| trajectory.times[i])
}
