use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ModelParams;

/// Default bound on `exp(-alpha * horizon)` for payoff estimation.
pub const DEFAULT_TRUNCATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Euler step.
    pub dt: f64,
    /// Paths are cut off at this time.
    pub horizon: f64,
    pub n_paths: usize,
    pub seed: u64,
    /// Pair each path with its mirror image `-dW`.
    pub antithetic: bool,
    /// Required upper bound on the discount factor at the horizon.
    pub truncation_tol: f64,
}

impl SimConfig {
    /// Payoff-estimation config: horizon picked so the discounted tail is
    /// below [`DEFAULT_TRUNCATION_TOL`], antithetic pairs on.
    pub fn for_params(params: &ModelParams, dt: f64, n_paths: usize, seed: u64) -> Self {
        SimConfig {
            dt,
            horizon: horizon_for(params.alpha, DEFAULT_TRUNCATION_TOL),
            n_paths,
            seed,
            antithetic: true,
            truncation_tol: DEFAULT_TRUNCATION_TOL,
        }
    }

    /// Ruin-time config: fixed horizon, independent paths, no discount check.
    pub fn for_ruin_times(dt: f64, horizon: f64, n_paths: usize, seed: u64) -> Self {
        SimConfig {
            dt,
            horizon,
            n_paths,
            seed,
            antithetic: false,
            truncation_tol: 1.0,
        }
    }

    pub fn steps(&self) -> usize {
        (self.horizon / self.dt).ceil() as usize
    }

    /// Independent sampling units: antithetic pairs or single paths.
    pub fn units(&self) -> usize {
        if self.antithetic {
            self.n_paths / 2
        } else {
            self.n_paths
        }
    }

    pub fn validate(&self, params: &ModelParams) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return fail(format!("dt must be positive (got {})", self.dt));
        }
        if !(self.horizon >= self.dt && self.horizon.is_finite()) {
            return fail(format!(
                "horizon {} must be at least dt {}",
                self.horizon, self.dt
            ));
        }
        if self.n_paths == 0 {
            return fail("n_paths must be positive".into());
        }
        if self.antithetic && !self.n_paths.is_multiple_of(2) {
            return fail(format!(
                "antithetic sampling needs an even path count (got {})",
                self.n_paths
            ));
        }
        let tail = (-params.alpha * self.horizon).exp();
        if tail > self.truncation_tol {
            return fail(format!(
                "discount factor at the horizon is {tail:e}, above the truncation tolerance {:e}",
                self.truncation_tol
            ));
        }
        Ok(())
    }
}

/// Horizon with `exp(-alpha T) <= tol`, padded past the rounding boundary.
pub fn horizon_for(alpha: f64, tol: f64) -> f64 {
    -tol.ln() / alpha * (1.0 + 1e-12)
}
