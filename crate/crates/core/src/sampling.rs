//! Random parameter sets for property suites.
//!
//! Ranges: `mu` in `[0.005, 0.5]`, `sigma^2` in `[0.01, 1]`, `alpha` in
//! `[0.005, 0.5]`, `k` in `(1, 3]`. Draws alternate between the two cost
//! regimes so both are covered evenly.

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::barriers::{critical_cost, Regime};
use crate::error::Result;
use crate::params::ModelParams;
use crate::solution::Solution;

pub const MU_RANGE: (f64, f64) = (0.005, 0.5);
pub const SIGMA2_RANGE: (f64, f64) = (0.01, 1.0);
pub const ALPHA_RANGE: (f64, f64) = (0.005, 0.5);
pub const K_MAX: f64 = 3.0;

pub struct ParamSampler {
    rng: Xoshiro256PlusPlus,
    draws: usize,
}

impl ParamSampler {
    pub fn new(seed: u64) -> Self {
        ParamSampler {
            rng: Xoshiro256PlusPlus::seed_from_u64(seed),
            draws: 0,
        }
    }

    /// Next parameter set with `b_r = 0`. Sets whose probe payout barriers
    /// would trip the overflow guard are redrawn.
    pub fn next_params(&mut self) -> ModelParams {
        let want_low = self.draws.is_multiple_of(2);
        self.draws += 1;
        loop {
            let mu = self.rng.random_range(MU_RANGE.0..=MU_RANGE.1);
            let sigma2 = self.rng.random_range(SIGMA2_RANGE.0..=SIGMA2_RANGE.1);
            let alpha = self.rng.random_range(ALPHA_RANGE.0..=ALPHA_RANGE.1);
            let probe = ModelParams::from_variance(mu, sigma2, alpha, 2.0, 0.0)
                .expect("sampling ranges are admissible");
            let k_critical = critical_cost(&probe.roots());
            let k_range = if want_low {
                1.0..k_critical.min(K_MAX)
            } else if k_critical < K_MAX {
                k_critical..K_MAX
            } else {
                continue;
            };
            let k = self.rng.random_range(k_range);
            if k <= 1.0 {
                continue;
            }
            let params = probe.with_cost(k).expect("k > 1");
            if probes_admissible(&params) {
                return params;
            }
        }
    }
}

/// Payout barriers that probe every branch of the strategy selection:
/// zero, between and at the free barriers, at `b_hat`, and beyond.
pub fn probe_payout_barriers(solution: &Solution) -> Vec<f64> {
    let b = &solution.barriers;
    let (bs, bss) = (b.b_star, b.b_double_star);
    match (solution.cost.regime, b.b_hat) {
        (Regime::LowCost, Some(bh)) => vec![
            0.0,
            bss / 2.0,
            (bss + bs) / 2.0,
            bs,
            (bs + bh) / 2.0,
            bh,
            2.0 * bh,
        ],
        _ => vec![
            0.0,
            bs / 2.0,
            bs,
            (bs + bss) / 2.0,
            bss,
            2.0 * bss,
            4.0 * bss,
        ],
    }
}

/// Every probe payout barrier of `params` passes validation.
pub fn probes_admissible(params: &ModelParams) -> bool {
    Solution::new(*params).is_ok_and(|sol| {
        probe_payout_barriers(&sol)
            .into_iter()
            .all(|b_r| params.with_payout_barrier(b_r).is_ok())
    })
}

/// `count` sampled solutions, each paired with its probe payout barriers.
pub fn sample_cases(seed: u64, count: usize) -> Result<Vec<Solution>> {
    let mut sampler = ParamSampler::new(seed);
    let mut out = Vec::with_capacity(count * 7);
    for _ in 0..count {
        let base = Solution::new(sampler.next_params())?;
        for b_r in probe_payout_barriers(&base) {
            out.push(base.with_payout_barrier(b_r)?);
        }
    }
    Ok(out)
}
