use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Ornstein-Uhlenbeck site-energy noise.
///
/// `amplitude` is the stationary RMS of the detuning, so the stationary
/// variance is `amplitude^2` and the autocorrelation is
/// `amplitude^2 exp(-|t - t'| / tau_c)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OuParams {
    pub amplitude: f64,
    pub tau_c: f64,
    pub dt: f64,
}

impl OuParams {
    /// `tau_c` may be infinite, which freezes the initial draw.
    pub fn new(amplitude: f64, tau_c: f64, dt: f64) -> Result<Self> {
        if !(amplitude >= 0.0 && amplitude.is_finite()) {
            return Err(invalid(format!("amplitude must be >= 0, got {amplitude}")));
        }
        if tau_c.is_nan() || tau_c <= 0.0 {
            return Err(invalid(format!("tau_c must be > 0, got {tau_c}")));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(invalid(format!("dt must be > 0, got {dt}")));
        }
        if dt > tau_c / 10.0 {
            log::warn!("dt = {dt} exceeds tau_c / 10 = {}", tau_c / 10.0);
        }
        Ok(OuParams {
            amplitude,
            tau_c,
            dt,
        })
    }

    pub fn process(&self) -> OuProcess {
        OuProcess::new(self)
    }
}

/// Exact one-step update `x <- x e^{-dt/tau} + sigma sqrt(1 - e^{-2dt/tau}) xi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OuProcess {
    sigma: f64,
    decay: f64,
    kick: f64,
}

impl OuProcess {
    pub fn new(params: &OuParams) -> Self {
        let decay = (-params.dt / params.tau_c).exp();
        OuProcess {
            sigma: params.amplitude,
            decay,
            kick: params.amplitude * (1.0 - decay * decay).sqrt(),
        }
    }

    pub fn stationary<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let xi: f64 = rng.sample(StandardNormal);
        self.sigma * xi
    }

    pub fn step<R: Rng + ?Sized>(&self, x: f64, rng: &mut R) -> f64 {
        let xi: f64 = rng.sample(StandardNormal);
        x * self.decay + self.kick * xi
    }
}

/// One stationary path sampled at `t = 0, dt, ..., n_steps dt`.
pub fn ou_path<R: Rng + ?Sized>(params: &OuParams, n_steps: usize, rng: &mut R) -> Vec<f64> {
    let p = params.process();
    let mut x = p.stationary(rng);
    let mut path = Vec::with_capacity(n_steps + 1);
    path.push(x);
    for _ in 0..n_steps {
        x = p.step(x, rng);
        path.push(x);
    }
    path
}
