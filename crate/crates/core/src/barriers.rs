//! Injection-cost threshold and the three reflection barriers.
//!
//! * `b_star` maximises the no-injection value and is fixed by `f''(b) = 0`.
//! * `b_double_star` maximises the no-bankruptcy value.
//! * `b_hat` is the payout barrier at which saving the firm stops paying off;
//!   it exists only when injection costs are low.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{ModelParams, Roots};
use crate::rootfind::increasing_root;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    LowCost,
    HighCost,
}

/// Classification of the injection cost `k` against its critical value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostRegime {
    pub regime: Regime,
    pub k_critical: f64,
}

impl CostRegime {
    /// `k == k_critical` counts as low cost.
    pub fn classify(roots: &Roots, k: f64) -> Self {
        let k_critical = critical_cost(roots);
        let regime = if k <= k_critical {
            Regime::LowCost
        } else {
            Regime::HighCost
        };
        CostRegime { regime, k_critical }
    }

    pub fn is_low(&self) -> bool {
        self.regime == Regime::LowCost
    }
}

/// The largest injection cost for which saving the firm can be optimal.
///
/// Equals `h(b_star)`, the maximum of [`marginal_value_at_zero`].
pub fn critical_cost(roots: &Roots) -> f64 {
    let Roots { r1, r2 } = *roots;
    let spread = r1 - r2;
    let ratio = (r2 * r2) / (r1 * r1);
    spread / (r1 * ratio.powf(r1 / spread) - r2 * ratio.powf(r2 / spread))
}

/// Reflection barrier of the absorption problem (no capital injection).
pub fn b_star(roots: &Roots) -> f64 {
    let Roots { r1, r2 } = *roots;
    ((r2 * r2) / (r1 * r1)).ln() / (r1 - r2)
}

/// `r1 e^{r1 b} - r2 e^{r2 b}`: the denominator shared by `G` and `h`.
pub(crate) fn absorption_denominator(roots: &Roots, b: f64) -> f64 {
    roots.r1 * (roots.r1 * b).exp() - roots.r2 * (roots.r2 * b).exp()
}

/// `h(b) = G'(0)` for a reflection barrier `b`; unimodal with its peak at `b_star`.
pub fn marginal_value_at_zero(roots: &Roots, b: f64) -> f64 {
    roots.spread() / absorption_denominator(roots, b)
}

/// Left side of the `b_double_star` equation, `r1 e^{-r2 b} - r2 e^{-r1 b}`.
pub fn double_star_lhs(roots: &Roots, b: f64) -> f64 {
    roots.r1 * (-roots.r2 * b).exp() - roots.r2 * (-roots.r1 * b).exp()
}

/// Unique positive root of `r1 e^{-r2 b} - r2 e^{-r1 b} = k (r1 - r2)`.
pub fn b_double_star(params: &ModelParams, roots: &Roots) -> Result<f64> {
    let target = params.k * roots.spread();
    increasing_root(|b| double_star_lhs(roots, b) - target, 0.0)
}

/// Root of `r1 e^{r1 b} - r2 e^{r2 b} = (r1 - r2) / k` on `[b_star, inf)`.
///
/// The left side is increasing only past `b_star`, and the root is known to
/// lie there, so the search starts at `b_star` rather than `b_double_star`.
pub fn b_hat(params: &ModelParams, roots: &Roots, regime: &CostRegime) -> Result<f64> {
    if !regime.is_low() {
        return Err(Error::HighCostRegime {
            k: params.k,
            k_critical: regime.k_critical,
        });
    }
    let target = roots.spread() / params.k;
    increasing_root(|b| absorption_denominator(roots, b) - target, b_star(roots))
}

/// All barriers for one parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarrierSet {
    pub b_star: f64,
    pub b_double_star: f64,
    /// Present only in the low-cost regime.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_hat: Option<f64>,
    /// Reflection level of the no-injection strategy, `max(b_r, b_star)`.
    #[serde(rename = "b_effective_G")]
    pub b_effective_g: f64,
    /// Reflection level of the no-bankruptcy strategy, `max(b_r, b_double_star)`.
    #[serde(rename = "b_effective_H")]
    pub b_effective_h: f64,
}

impl BarrierSet {
    pub fn new(params: &ModelParams, roots: &Roots, regime: &CostRegime) -> Result<Self> {
        let b_star = b_star(roots);
        let b_double_star = b_double_star(params, roots)?;
        let b_hat = if regime.is_low() {
            Some(b_hat(params, roots, regime)?)
        } else {
            None
        };
        Ok(BarrierSet {
            b_star,
            b_double_star,
            b_hat,
            b_effective_g: params.b_r.max(b_star),
            b_effective_h: params.b_r.max(b_double_star),
        })
    }

    /// Recomputes the effective barriers for another payout barrier.
    pub fn with_payout_barrier(&self, b_r: f64) -> Self {
        BarrierSet {
            b_effective_g: b_r.max(self.b_star),
            b_effective_h: b_r.max(self.b_double_star),
            ..*self
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> (ModelParams, Roots, CostRegime) {
        let p = ModelParams::reference(0.0).unwrap();
        let r = p.roots();
        let c = CostRegime::classify(&r, p.k);
        (p, r, c)
    }

    #[test]
    fn reference_regime_and_threshold() {
        let (_, r, c) = reference();
        assert_eq!(c.regime, Regime::LowCost);
        // Frozen from the closed form, cross-checked against h(b_star) below.
        assert!((c.k_critical - 1.220_608_341_173_952).abs() < 1e-12);
        assert!((marginal_value_at_zero(&r, b_star(&r)) - c.k_critical).abs() < 1e-12);
    }

    #[test]
    fn threshold_is_inclusive() {
        let (_, r, c) = reference();
        assert_eq!(
            CostRegime::classify(&r, c.k_critical).regime,
            Regime::LowCost
        );
        let above = c.k_critical * (1.0 + f64::EPSILON);
        assert_eq!(CostRegime::classify(&r, above).regime, Regime::HighCost);
    }

    #[test]
    fn reference_barriers() {
        let (p, r, c) = reference();
        let set = BarrierSet::new(&p, &r, &c).unwrap();
        assert!((set.b_star - 0.747_560).abs() < 5e-7);
        assert!((set.b_double_star - 0.170_443).abs() < 5e-7);
        assert!((set.b_hat.unwrap() - 1.5813).abs() < 5e-5);
        let smooth =
            r.r1 * r.r1 * (r.r1 * set.b_star).exp() - r.r2 * r.r2 * (r.r2 * set.b_star).exp();
        assert!(smooth.abs() < 1e-10);
    }

    #[test]
    fn h_at_zero_and_at_b_hat() {
        let (p, r, c) = reference();
        assert!((marginal_value_at_zero(&r, 0.0) - 1.0).abs() < 1e-15);
        let bh = b_hat(&p, &r, &c).unwrap();
        assert!((marginal_value_at_zero(&r, bh) - p.k).abs() < 1e-12);
    }

    #[test]
    fn b_double_star_vanishes_as_k_tends_to_one() {
        let (p, r, _) = reference();
        let mut prev = f64::INFINITY;
        for k in [1.1, 1.01, 1.001, 1.0001, 1.000_001] {
            let b = b_double_star(&p.with_cost(k).unwrap(), &r).unwrap();
            assert!(b > 0.0 && b < prev);
            prev = b;
        }
        assert!(prev < 1e-2);
    }

    #[test]
    fn barriers_coincide_at_critical_cost() {
        let (p, r, c) = reference();
        let pk = p.with_cost(c.k_critical).unwrap();
        let ck = CostRegime::classify(&r, pk.k);
        let set = BarrierSet::new(&pk, &r, &ck).unwrap();
        assert!((set.b_double_star - set.b_star).abs() < 1e-6);
        assert!((set.b_hat.unwrap() - set.b_star).abs() < 1e-6);
    }

    #[test]
    fn b_hat_rejected_in_high_cost_regime() {
        let (p, r, _) = reference();
        let high = p.with_cost(1.3).unwrap();
        let c = CostRegime::classify(&r, high.k);
        assert_eq!(c.regime, Regime::HighCost);
        assert!(matches!(
            b_hat(&high, &r, &c),
            Err(Error::HighCostRegime { .. })
        ));
        assert!(BarrierSet::new(&high, &r, &c).unwrap().b_hat.is_none());
    }
}
