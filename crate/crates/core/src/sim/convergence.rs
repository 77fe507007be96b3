//! Step-halving study of the projected Euler scheme.
//!
//! Levels `dt, 2 dt, 4 dt, ...` are driven by the same Brownian paths, so the
//! increments between neighbouring levels carry little sampling noise even
//! when the bias itself is below the standard error of a single level. The
//! per-halving shrinkage factor and the bias constant `C` are read off these
//! increments; the known value is only used to report errors.

use serde::{Deserialize, Serialize};

use super::config::SimConfig;
use super::engine::coupled_unit_payoffs;
use super::estimate::{compensated_sum, mean_and_stderr, SimEstimate};
use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::solution::StrategySpec;

/// Sample size schedule. The study starts at `initial_paths` and doubles
/// until every increment is at least `resolution` standard errors from zero,
/// or `max_paths` is reached.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalvingPlan {
    pub initial_paths: usize,
    pub max_paths: usize,
    pub resolution: f64,
}

impl Default for HalvingPlan {
    fn default() -> Self {
        HalvingPlan {
            initial_paths: 20_000,
            max_paths: 320_000,
            resolution: 8.0,
        }
    }
}

impl HalvingPlan {
    /// A single pass at `paths`.
    pub fn fixed(paths: usize) -> Self {
        HalvingPlan {
            initial_paths: paths,
            max_paths: paths,
            resolution: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelResult {
    pub dt: f64,
    pub mean: f64,
    pub stderr: f64,
    /// `mean - exact`.
    pub error: f64,
}

/// Coupled change in the estimate when the step doubles from `dt` to `2 dt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Increment {
    pub dt: f64,
    pub mean: f64,
    pub stderr: f64,
}

impl Increment {
    pub fn significance(&self) -> f64 {
        self.mean.abs() / self.stderr
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalvingStudy {
    pub exact: f64,
    pub n_paths: usize,
    /// Finest step first.
    pub levels: Vec<LevelResult>,
    /// Finest pair first.
    pub increments: Vec<Increment>,
    /// Error shrinkage per halving, `increment(2 dt) / increment(dt)`.
    pub ratios: Vec<f64>,
    /// Delta-method standard errors of `ratios`.
    pub ratio_stderrs: Vec<f64>,
    /// `C` such that the extrapolated bias satisfies `|bias(dt)| <= C sqrt(dt)`
    /// on every studied level. NaN when the increments do not shrink.
    pub fitted_c: f64,
    /// Every increment reached the plan's resolution.
    pub resolved: bool,
}

impl HalvingStudy {
    /// Runs `levels` coupled step sizes starting at `cfg.dt`; `cfg.n_paths`
    /// is ignored in favour of `plan`.
    pub fn run(
        params: &ModelParams,
        spec: &StrategySpec,
        x0: f64,
        cfg: &SimConfig,
        levels: usize,
        exact: f64,
        plan: &HalvingPlan,
    ) -> Result<Self> {
        if levels < 2 {
            return Err(Error::Config(format!(
                "a halving study needs at least 2 levels (got {levels})"
            )));
        }
        if plan.initial_paths == 0 || plan.max_paths < plan.initial_paths {
            return Err(Error::Config(format!(
                "invalid path schedule {} to {}",
                plan.initial_paths, plan.max_paths
            )));
        }
        let per_unit = if cfg.antithetic { 2 } else { 1 };
        let mut payoffs: Vec<Vec<f64>> = vec![Vec::new(); levels];
        let mut paths = plan.initial_paths;
        let mut done = 0;
        loop {
            let run_cfg = SimConfig {
                n_paths: paths,
                ..*cfg
            };
            let chunk =
                coupled_unit_payoffs(params, spec, x0, &run_cfg, levels, done..run_cfg.units())?;
            done = run_cfg.units();
            for (all, new) in payoffs.iter_mut().zip(chunk) {
                all.extend(new);
            }
            let dts: Vec<f64> = (0..levels).map(|l| cfg.dt * (1 << l) as f64).collect();
            let study = Self::from_unit_payoffs(&payoffs, &dts, exact, done * per_unit, plan);
            if study.resolved || paths >= plan.max_paths {
                return Ok(study);
            }
            paths = (paths * 2).min(plan.max_paths);
        }
    }

    /// Builds the study from coupled per-unit payoffs, finest level first.
    pub fn from_unit_payoffs(
        payoffs: &[Vec<f64>],
        dts: &[f64],
        exact: f64,
        n_paths: usize,
        plan: &HalvingPlan,
    ) -> Self {
        let levels: Vec<LevelResult> = payoffs
            .iter()
            .zip(dts)
            .map(|(values, &dt)| {
                let (mean, stderr) = mean_and_stderr(values);
                LevelResult {
                    dt,
                    mean,
                    stderr,
                    error: mean - exact,
                }
            })
            .collect();
        let diffs: Vec<Vec<f64>> = payoffs
            .windows(2)
            .map(|w| w[1].iter().zip(&w[0]).map(|(c, f)| c - f).collect())
            .collect();
        let increments: Vec<Increment> = diffs
            .iter()
            .zip(dts)
            .map(|(d, &dt)| {
                let (mean, stderr) = mean_and_stderr(d);
                Increment { dt, mean, stderr }
            })
            .collect();
        let mut ratios = Vec::new();
        let mut ratio_stderrs = Vec::new();
        for i in 1..increments.len() {
            let (a, b) = (&diffs[i - 1], &diffs[i]);
            let (ma, mb) = (increments[i - 1].mean, increments[i].mean);
            let rho = mb / ma;
            let n = a.len() as f64;
            let cov = |x: &[f64], mx: f64, y: &[f64], my: f64| {
                compensated_sum(x.iter().zip(y).map(|(u, v)| (u - mx) * (v - my))) / (n - 1.0)
            };
            let var =
                cov(b, mb, b, mb) + rho * rho * cov(a, ma, a, ma) - 2.0 * rho * cov(a, ma, b, mb);
            ratios.push(rho);
            ratio_stderrs.push((var.max(0.0) / n).sqrt() / ma.abs());
        }
        let resolved = increments
            .iter()
            .all(|inc| inc.significance() >= plan.resolution);
        let fitted_c = fit_c(&increments, &ratios, dts);
        HalvingStudy {
            exact,
            n_paths,
            levels,
            increments,
            ratios,
            ratio_stderrs,
            fitted_c,
            resolved,
        }
    }

    /// Every shrinkage factor lies in `[lo, hi]`.
    pub fn shrinkage_within(&self, lo: f64, hi: f64) -> bool {
        !self.ratios.is_empty() && self.ratios.iter().all(|r| (lo..=hi).contains(r))
    }

    /// Bias allowance `C sqrt(dt)`.
    pub fn allowance(&self, dt: f64) -> f64 {
        self.fitted_c * dt.sqrt()
    }

    /// `|mean - exact| <= 3 stderr + C sqrt(dt)` for an independent estimate.
    pub fn accepts(&self, estimate: &SimEstimate) -> bool {
        (estimate.mean - self.exact).abs() <= 3.0 * estimate.stderr + self.allowance(estimate.dt)
    }

    pub fn level(&self, dt: f64) -> Option<&LevelResult> {
        self.levels.iter().find(|l| (l.dt - dt).abs() <= 1e-12 * dt)
    }
}

/// Richardson extrapolation with the observed shrinkage: the bias at the
/// finest level is `increment / (rho - 1)` and grows by `rho` per doubling.
/// With a single increment the `sqrt(dt)` rate is assumed.
fn fit_c(increments: &[Increment], ratios: &[f64], dts: &[f64]) -> f64 {
    let rho = if ratios.is_empty() {
        std::f64::consts::SQRT_2
    } else {
        ratios
            .iter()
            .product::<f64>()
            .powf(1.0 / ratios.len() as f64)
    };
    if !(rho > 1.0) || increments.is_empty() {
        return f64::NAN;
    }
    let finest = increments[0].mean.abs() / (rho - 1.0);
    dts.iter()
        .enumerate()
        .map(|(l, dt)| finest * rho.powi(l as i32) / dt.sqrt())
        .fold(0.0, f64::max)
}
