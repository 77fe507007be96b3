use serde::{Deserialize, Serialize};

use crate::value::StrategyKind;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub order: u32,
    pub mean: f64,
    pub stderr: f64,
}

/// Sample moments of the ruin time over paths absorbed before the horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuinMoments {
    /// `E[tau^n]` for `n = 1..=4`.
    pub moments: Vec<MomentEstimate>,
    pub absorbed: usize,
    /// Fraction of paths still alive at the horizon.
    pub censored_fraction: f64,
    /// False when more than 1% of paths were censored.
    pub reliable: bool,
}

/// Largest censored fraction for which ruin moments are trusted.
pub const MAX_CENSORED_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimEstimate {
    pub strategy: StrategyKind,
    pub barrier: f64,
    pub x0: f64,
    pub dt: f64,
    /// Mean discounted payoff: dividends minus `k` times injections.
    pub mean: f64,
    /// Sample standard deviation over independent units (antithetic pairs
    /// or single paths) divided by the square root of their count.
    pub stderr: f64,
    pub n_paths: usize,
    pub ruin_fraction: f64,
    pub mean_disc_dividends: f64,
    pub mean_disc_injections: f64,
    /// Upper barrier runs only.
    pub ruin_time_moments: Option<RuinMoments>,
}

/// Compensated (Neumaier) summation; the order of `values` fixes the result.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Mean and standard error of the mean.
pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = compensated_sum(values.iter().copied()) / n as f64;
    if n == 1 {
        return (mean, f64::NAN);
    }
    let ss = compensated_sum(values.iter().map(|v| (v - mean) * (v - mean)));
    (mean, (ss / (n - 1) as f64 / n as f64).sqrt())
}

pub(crate) fn ruin_moments(times: &[f64], total_paths: usize) -> RuinMoments {
    let moments = (1..=4)
        .map(|order| {
            let powers: Vec<f64> = times.iter().map(|t| t.powi(order as i32)).collect();
            let (mean, stderr) = mean_and_stderr(&powers);
            MomentEstimate {
                order,
                mean,
                stderr,
            }
        })
        .collect();
    let censored_fraction = (total_paths - times.len()) as f64 / total_paths as f64;
    RuinMoments {
        moments,
        absorbed: times.len(),
        censored_fraction,
        reliable: censored_fraction <= MAX_CENSORED_FRACTION,
    }
}
