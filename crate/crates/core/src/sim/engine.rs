//! Euler scheme with per-step projection onto `[0, b]` (double barrier) or
//! onto `(-inf, b]` with absorption below zero (upper barrier).
//!
//! Every sampling unit (a single path, or an antithetic pair) draws its
//! normals from its own xoshiro256++ stream keyed by `(seed, unit)`, and unit
//! results are reduced in index order, so estimates depend only on
//! `(seed, config, params)` and not on the thread count.
//!
//! Coarser step sizes `dt * 2^l` can be driven by the same Brownian path
//! (sums of consecutive fine increments), which is what the step-halving
//! study uses.

use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::ops::Range;

use super::config::SimConfig;
use super::estimate::{mean_and_stderr, ruin_moments, RuinMoments, SimEstimate};
use super::path::{Control, PathState};
use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::solution::StrategySpec;
use crate::value::StrategyKind;

/// Most step sizes that can share one Brownian path.
pub const MAX_LEVELS: usize = 4;

fn unit_rng(seed: u64, unit: usize) -> Xoshiro256PlusPlus {
    // splitmix64 finalizer; a bijection, so distinct units get distinct keys.
    let mut z = seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    Xoshiro256PlusPlus::seed_from_u64(z ^ unit as u64)
}

fn control_for(params: &ModelParams, spec: &StrategySpec, x0: f64) -> Result<Control> {
    if !(spec.upper > 0.0 && spec.upper.is_finite()) {
        return Err(Error::Config(format!(
            "barrier must be positive (got {})",
            spec.upper
        )));
    }
    if spec.upper < params.b_r {
        return Err(Error::Config(format!(
            "barrier {} lies below the payout barrier {}",
            spec.upper, params.b_r
        )));
    }
    if !(x0 >= 0.0 && x0.is_finite()) {
        return Err(Error::NegativeSurplus(x0));
    }
    Ok(Control {
        kind: spec.kind,
        barrier: spec.upper,
    })
}

/// Simulates one unit on `L` nested step sizes with `M` mirrored paths;
/// index `[mirror][level]`.
fn run_unit<const L: usize, const M: usize>(
    control: &Control,
    params: &ModelParams,
    x0: f64,
    cfg: &SimConfig,
    unit: usize,
) -> [[PathState; L]; 2] {
    let start = PathState::start(control, x0);
    let b = control.barrier;
    let mut rng = unit_rng(cfg.seed, unit);
    let mut x = [[start.x; L]; M];
    let mut div = [[0.0_f64; L]; M];
    let mut inj = [[0.0_f64; L]; M];
    let mut ruin_step = [[0_usize; L]; M];
    let mut acc = [0.0_f64; L];
    let mut drift = [0.0_f64; L];
    for (l, d) in drift.iter_mut().enumerate() {
        *d = params.mu * cfg.dt * (1usize << l) as f64;
    }
    let vol = params.sigma * cfg.dt.sqrt();
    let decay = (-params.alpha * cfg.dt).exp();
    let absorbing = control.kind == StrategyKind::UpperBarrier;
    let mut discount = 1.0;

    if !start.ruined {
        for n in 1..=cfg.steps() {
            let z: f64 = StandardNormal.sample(&mut rng);
            discount *= decay;
            for l in 0..L {
                acc[l] += z;
                if n & ((1 << l) - 1) != 0 {
                    continue;
                }
                let w = vol * acc[l];
                acc[l] = 0.0;
                for m in 0..M {
                    let dx = if m == 0 { drift[l] + w } else { drift[l] - w };
                    let y = x[m][l] + dx;
                    if absorbing {
                        if ruin_step[m][l] != 0 {
                            continue;
                        }
                        div[m][l] += discount * (y - b).max(0.0);
                        x[m][l] = y.min(b);
                        if y < 0.0 {
                            ruin_step[m][l] = n;
                        }
                    } else {
                        div[m][l] += discount * (y - b).max(0.0);
                        inj[m][l] += discount * (-y).max(0.0);
                        x[m][l] = y.clamp(0.0, b);
                    }
                }
            }
            if absorbing && n % 64 == 0 && ruin_step.iter().flatten().all(|&r| r != 0) {
                break;
            }
        }
    }

    let mut out = [[start; L]; 2];
    for m in 0..M {
        for l in 0..L {
            let s = &mut out[m][l];
            s.x = x[m][l];
            s.disc_dividends += div[m][l];
            s.disc_injections = inj[m][l];
            if ruin_step[m][l] != 0 {
                s.ruined = true;
                s.ruin_time = Some(ruin_step[m][l] as f64 * cfg.dt);
            }
        }
    }
    out
}

fn run_all<const L: usize>(
    control: &Control,
    params: &ModelParams,
    x0: f64,
    cfg: &SimConfig,
    units: Range<usize>,
) -> Vec<Vec<[PathState; 2]>> {
    let units: Vec<[[PathState; L]; 2]> = units
        .into_par_iter()
        .map(|u| {
            if cfg.antithetic {
                run_unit::<L, 2>(control, params, x0, cfg, u)
            } else {
                run_unit::<L, 1>(control, params, x0, cfg, u)
            }
        })
        .collect();
    (0..L)
        .map(|l| units.iter().map(|u| [u[0][l], u[1][l]]).collect())
        .collect()
}

fn summarize(
    control: &Control,
    params: &ModelParams,
    x0: f64,
    dt: f64,
    cfg: &SimConfig,
    units: &[[PathState; 2]],
) -> (SimEstimate, Vec<f64>) {
    let mirrors = if cfg.antithetic { 2 } else { 1 };
    let unit_values: Vec<f64> = units
        .iter()
        .map(|u| unit_payoff(u, mirrors, params.k))
        .collect();
    let (mean, stderr) = mean_and_stderr(&unit_values);
    let paths: Vec<&PathState> = units.iter().flat_map(|u| &u[..mirrors]).collect();
    let total = paths.len();
    let ruined = paths.iter().filter(|s| s.ruined).count();
    let (mean_disc_dividends, _) =
        mean_and_stderr(&paths.iter().map(|s| s.disc_dividends).collect::<Vec<_>>());
    let (mean_disc_injections, _) =
        mean_and_stderr(&paths.iter().map(|s| s.disc_injections).collect::<Vec<_>>());
    let ruin_time_moments = (control.kind == StrategyKind::UpperBarrier).then(|| {
        let times: Vec<f64> = paths.iter().filter_map(|s| s.ruin_time).collect();
        ruin_moments(&times, total)
    });
    let estimate = SimEstimate {
        strategy: control.kind,
        barrier: control.barrier,
        x0,
        dt,
        mean,
        stderr,
        n_paths: total,
        ruin_fraction: ruined as f64 / total as f64,
        mean_disc_dividends,
        mean_disc_injections,
        ruin_time_moments,
    };
    (estimate, unit_values)
}

fn run_levels(
    control: &Control,
    params: &ModelParams,
    x0: f64,
    cfg: &SimConfig,
    levels: usize,
    units: Range<usize>,
) -> Result<Vec<Vec<[PathState; 2]>>> {
    Ok(match levels {
        1 => run_all::<1>(control, params, x0, cfg, units),
        2 => run_all::<2>(control, params, x0, cfg, units),
        3 => run_all::<3>(control, params, x0, cfg, units),
        4 => run_all::<4>(control, params, x0, cfg, units),
        _ => {
            return Err(Error::Config(format!(
                "levels must be between 1 and {MAX_LEVELS} (got {levels})"
            )))
        }
    })
}

/// Per-unit payoffs, indexed `[level][unit - units.start]`, for a slice of
/// the unit sequence. Concatenating consecutive slices reproduces a longer
/// run exactly, which lets callers grow a sample without recomputing it.
pub fn coupled_unit_payoffs(
    params: &ModelParams,
    spec: &StrategySpec,
    x0: f64,
    cfg: &SimConfig,
    levels: usize,
    units: Range<usize>,
) -> Result<Vec<Vec<f64>>> {
    cfg.validate(params)?;
    let control = control_for(params, spec, x0)?;
    let mirrors = if cfg.antithetic { 2 } else { 1 };
    let per_level = run_levels(&control, params, x0, cfg, levels, units)?;
    Ok(per_level
        .iter()
        .map(|level| {
            level
                .iter()
                .map(|u| unit_payoff(u, mirrors, params.k))
                .collect()
        })
        .collect())
}

fn unit_payoff(unit: &[PathState; 2], mirrors: usize, k: f64) -> f64 {
    unit[..mirrors].iter().map(|s| s.payoff(k)).sum::<f64>() / mirrors as f64
}

/// Output of a coupled multi-step-size run.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelRun {
    /// Finest step first.
    pub estimates: Vec<SimEstimate>,
    /// Per-unit payoffs for each level, in unit order. Units share Brownian
    /// paths across levels, so differences between levels are coupled.
    pub unit_payoffs: Vec<Vec<f64>>,
}

/// Runs `levels` coupled step sizes `cfg.dt * 2^l`, `l = 0..levels`, on
/// shared Brownian paths.
pub fn simulate_levels_detailed(
    params: &ModelParams,
    spec: &StrategySpec,
    x0: f64,
    cfg: &SimConfig,
    levels: usize,
) -> Result<LevelRun> {
    cfg.validate(params)?;
    let control = control_for(params, spec, x0)?;
    let per_level = run_levels(&control, params, x0, cfg, levels, 0..cfg.units())?;
    let mut run = LevelRun {
        estimates: Vec::with_capacity(levels),
        unit_payoffs: Vec::with_capacity(levels),
    };
    for (l, units) in per_level.iter().enumerate() {
        let (estimate, payoffs) =
            summarize(&control, params, x0, cfg.dt * (1 << l) as f64, cfg, units);
        run.estimates.push(estimate);
        run.unit_payoffs.push(payoffs);
    }
    Ok(run)
}

/// Estimates for `levels` coupled step sizes, finest first.
pub fn simulate_levels(
    params: &ModelParams,
    spec: &StrategySpec,
    x0: f64,
    cfg: &SimConfig,
    levels: usize,
) -> Result<Vec<SimEstimate>> {
    simulate_levels_detailed(params, spec, x0, cfg, levels).map(|r| r.estimates)
}

pub fn simulate_strategy(
    params: &ModelParams,
    spec: &StrategySpec,
    x0: f64,
    cfg: &SimConfig,
) -> Result<SimEstimate> {
    let mut out = simulate_levels(params, spec, x0, cfg, 1)?;
    Ok(out.remove(0))
}

/// Reflect at `b`, absorb below zero.
pub fn simulate_upper_barrier(
    params: &ModelParams,
    b: f64,
    x0: f64,
    cfg: &SimConfig,
) -> Result<SimEstimate> {
    simulate_strategy(params, &StrategySpec::upper_barrier(b), x0, cfg)
}

/// Reflect at `b` and at zero.
pub fn simulate_double_barrier(
    params: &ModelParams,
    b: f64,
    x0: f64,
    cfg: &SimConfig,
) -> Result<SimEstimate> {
    simulate_strategy(params, &StrategySpec::double_barrier(b), x0, cfg)
}

/// Ruin-time moments of an upper barrier strategy, from independent paths.
pub fn estimate_ruin_moments(
    params: &ModelParams,
    spec: &StrategySpec,
    x0: f64,
    cfg: &SimConfig,
) -> Result<RuinMoments> {
    if spec.kind != StrategyKind::UpperBarrier {
        return Err(Error::Mode {
            expected: "upper barrier",
        });
    }
    let cfg = SimConfig {
        antithetic: false,
        ..*cfg
    };
    let estimate = simulate_strategy(params, spec, x0, &cfg)?;
    Ok(estimate
        .ruin_time_moments
        .expect("upper barrier runs report ruin moments"))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: f64,
    pub x: f64,
    pub dividend: f64,
    pub injection: f64,
}

/// Step-by-step record of one path (the first path of `unit`) at `cfg.dt`.
pub fn trace_path(
    params: &ModelParams,
    spec: &StrategySpec,
    x0: f64,
    cfg: &SimConfig,
    unit: usize,
) -> Result<Vec<TraceRow>> {
    cfg.validate(params)?;
    let control = control_for(params, spec, x0)?;
    let mut rng = unit_rng(cfg.seed, unit);
    let mut state = PathState::start(&control, x0);
    let mut rows = vec![TraceRow {
        t: 0.0,
        x: state.x,
        dividend: state.disc_dividends,
        injection: 0.0,
    }];
    let drift = params.mu * cfg.dt;
    let vol = params.sigma * cfg.dt.sqrt();
    let decay = (-params.alpha * cfg.dt).exp();
    let mut discount = 1.0;
    for n in 1..=cfg.steps() {
        if state.ruined {
            break;
        }
        let z: f64 = StandardNormal.sample(&mut rng);
        discount *= decay;
        let t = n as f64 * cfg.dt;
        let flows = state.step(&control, drift + vol * z, t, discount);
        rows.push(TraceRow {
            t,
            x: state.x,
            dividend: flows.dividend,
            injection: flows.injection,
        });
    }
    Ok(rows)
}

/// CSV with header `t,x,dD,dC`.
pub fn trace_to_csv(rows: &[TraceRow]) -> String {
    let mut out = String::from("t,x,dD,dC\n");
    for r in rows {
        out.push_str(&format!("{},{},{},{}\n", r.t, r.x, r.dividend, r.injection));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn traced_final(
        params: &ModelParams,
        spec: &StrategySpec,
        x0: f64,
        cfg: &SimConfig,
    ) -> (f64, f64, Option<f64>) {
        let rows = trace_path(params, spec, x0, cfg, 3).unwrap();
        let decay = (-params.alpha * cfg.dt).exp();
        let (mut div, mut inj) = (0.0, 0.0);
        let mut discount = 1.0;
        for r in &rows[1..] {
            discount *= decay;
            div += discount * r.dividend;
            inj += discount * r.injection;
        }
        let last = rows.last().unwrap();
        let ruin = (spec.kind == StrategyKind::UpperBarrier && last.x < 0.0).then_some(last.t);
        (div + rows[0].dividend, inj, ruin)
    }

    #[test]
    fn kernel_matches_step_by_step_trace() {
        let params = ModelParams::reference(1.4).unwrap();
        let cfg = SimConfig {
            antithetic: false,
            ..SimConfig::for_params(&params, 0.01, 8, 5)
        };
        for (spec, x0) in [
            (StrategySpec::double_barrier(1.4), 0.3),
            (StrategySpec::upper_barrier(1.4), 0.3),
            (StrategySpec::upper_barrier(1.4), 2.0),
        ] {
            let control = control_for(&params, &spec, x0).unwrap();
            let state = run_unit::<1, 1>(&control, &params, x0, &cfg, 3)[0][0];
            let (div, inj, ruin) = traced_final(&params, &spec, x0, &cfg);
            assert!((state.disc_dividends - div).abs() < 1e-12, "{spec:?}");
            assert!((state.disc_injections - inj).abs() < 1e-12, "{spec:?}");
            if spec.kind == StrategyKind::UpperBarrier {
                assert!(state.ruined);
                assert_eq!(state.ruin_time, ruin);
            }
        }
    }

    #[test]
    fn coarse_levels_leave_the_finest_untouched() {
        let params = ModelParams::reference(0.0).unwrap();
        let cfg = SimConfig::for_params(&params, 0.02, 40, 9);
        let spec = StrategySpec::double_barrier(0.3);
        let control = control_for(&params, &spec, 0.2).unwrap();
        for u in 0..20 {
            let one = run_unit::<1, 2>(&control, &params, 0.2, &cfg, u);
            let four = run_unit::<4, 2>(&control, &params, 0.2, &cfg, u);
            assert_eq!(one[0][0], four[0][0]);
            assert_eq!(one[1][0], four[1][0]);
        }
    }

    #[test]
    fn unit_streams_differ() {
        let a: f64 = StandardNormal.sample(&mut unit_rng(1, 0));
        let b: f64 = StandardNormal.sample(&mut unit_rng(1, 1));
        let c: f64 = StandardNormal.sample(&mut unit_rng(2, 0));
        assert!(a != b && a != c && b != c);
    }
}
