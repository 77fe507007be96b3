//! Optimal strategy selection and the combined value `V = max(H, G)`.

use serde::{Deserialize, Serialize};

use crate::barriers::{BarrierSet, CostRegime};
use crate::error::Result;
use crate::params::{ModelParams, Roots};
use crate::value::{DoubleBarrierValue, StrategyKind, StrategyValue, UpperBarrierValue};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrategySpec {
    pub kind: StrategyKind,
    /// Dividend reflection barrier.
    pub upper: f64,
    /// Injection barrier; `Some(0.0)` for double barrier strategies.
    pub lower: Option<f64>,
    /// Set when the payout barrier sits exactly at `b_hat`, where both
    /// families are optimal. The reported strategy is then the double barrier.
    pub both_optimal: bool,
}

impl StrategySpec {
    pub fn upper_barrier(b: f64) -> Self {
        StrategySpec {
            kind: StrategyKind::UpperBarrier,
            upper: b,
            lower: None,
            both_optimal: false,
        }
    }

    pub fn double_barrier(b: f64) -> Self {
        StrategySpec {
            kind: StrategyKind::DoubleBarrier,
            upper: b,
            lower: Some(0.0),
            both_optimal: false,
        }
    }
}

/// Everything needed to evaluate and simulate the optimal policy for one
/// parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub params: ModelParams,
    pub roots: Roots,
    pub cost: CostRegime,
    pub barriers: BarrierSet,
}

impl Solution {
    pub fn new(params: ModelParams) -> Result<Self> {
        let roots = params.roots();
        let cost = CostRegime::classify(&roots, params.k);
        let barriers = BarrierSet::new(&params, &roots, &cost)?;
        Ok(Solution {
            params,
            roots,
            cost,
            barriers,
        })
    }

    /// Same model under a different payout barrier; no root finding is redone.
    pub fn with_payout_barrier(&self, b_r: f64) -> Result<Self> {
        Ok(Solution {
            params: self.params.with_payout_barrier(b_r)?,
            barriers: self.barriers.with_payout_barrier(b_r),
            ..*self
        })
    }

    /// No-injection value `G(.; b_r)`.
    pub fn upper_value(&self) -> StrategyValue {
        StrategyValue::Upper(
            UpperBarrierValue::new(self.roots, self.barriers.b_effective_g)
                .expect("b_star is positive"),
        )
    }

    /// No-bankruptcy value `H(.; b_r)`.
    pub fn double_value(&self) -> StrategyValue {
        StrategyValue::Double(
            DoubleBarrierValue::new(self.roots, self.params.k, self.barriers.b_effective_h)
                .expect("b_double_star is positive"),
        )
    }

    pub fn optimal_strategy(&self) -> StrategySpec {
        match self.barriers.b_hat {
            Some(b_hat) if self.params.b_r <= b_hat => StrategySpec {
                both_optimal: self.params.b_r == b_hat,
                ..StrategySpec::double_barrier(self.barriers.b_effective_h)
            },
            _ => StrategySpec::upper_barrier(self.barriers.b_effective_g),
        }
    }

    /// Value function of the selected strategy.
    pub fn optimal_value_fn(&self) -> StrategyValue {
        match self.optimal_strategy().kind {
            StrategyKind::UpperBarrier => self.upper_value(),
            StrategyKind::DoubleBarrier => self.double_value(),
        }
    }

    /// Optimal value `V(x; b_r) = max(H, G)`.
    pub fn value(&self, x: f64) -> Result<f64> {
        Ok(self
            .upper_value()
            .value(x)?
            .max(self.double_value().value(x)?))
    }

    /// Optimal value read off the selected branch rather than the maximum.
    pub fn selected_value(&self, x: f64) -> Result<f64> {
        self.optimal_value_fn().value(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::barriers::Regime;

    fn reference(b_r: f64) -> Solution {
        Solution::new(ModelParams::reference(b_r).unwrap()).unwrap()
    }

    #[test]
    fn strategy_by_payout_barrier() {
        let s = reference(0.0).optimal_strategy();
        assert_eq!(s.kind, StrategyKind::DoubleBarrier);
        assert!((s.upper - 0.170_443).abs() < 1e-6);
        assert_eq!(s.lower, Some(0.0));

        let s = reference(1.4).optimal_strategy();
        assert_eq!(s, StrategySpec::double_barrier(1.4));

        let s = reference(2.4).optimal_strategy();
        assert_eq!(s, StrategySpec::upper_barrier(2.4));
    }

    #[test]
    fn tie_at_b_hat_is_flagged() {
        let base = reference(0.0);
        let at = base
            .with_payout_barrier(base.barriers.b_hat.unwrap())
            .unwrap();
        let s = at.optimal_strategy();
        assert_eq!(s.kind, StrategyKind::DoubleBarrier);
        assert!(s.both_optimal);
        assert!(at.double_value().value(0.0).unwrap().abs() < 1e-9);
        assert_eq!(at.upper_value().value(0.0).unwrap(), 0.0);
    }

    #[test]
    fn high_cost_always_upper_barrier() {
        let p = ModelParams::reference(0.0).unwrap().with_cost(1.3).unwrap();
        let sol = Solution::new(p).unwrap();
        assert_eq!(sol.cost.regime, Regime::HighCost);
        for b_r in [0.0, 0.5, 1.0, 3.0] {
            let s = sol.with_payout_barrier(b_r).unwrap();
            assert_eq!(s.optimal_strategy().kind, StrategyKind::UpperBarrier);
            for x in [0.0, 0.3, 1.0, 4.0] {
                assert_eq!(s.value(x).unwrap(), s.upper_value().value(x).unwrap());
            }
        }
    }

    #[test]
    fn v_at_zero_on_either_side_of_b_hat() {
        let low = reference(1.0);
        assert!(low.value(0.0).unwrap() > 0.0);
        assert_eq!(
            low.value(0.0).unwrap(),
            low.double_value().value(0.0).unwrap()
        );
        let high = reference(2.0);
        assert_eq!(high.value(0.0).unwrap(), 0.0);
        assert!(high.double_value().value(0.0).unwrap() < 0.0);
    }

    #[test]
    fn max_matches_selected_branch() {
        for b_r in [0.0, 0.5, 1.4, 1.6, 2.4, 5.0] {
            let s = reference(b_r);
            for i in 0..=50 {
                let x = i as f64 * 0.1;
                assert!((s.value(x).unwrap() - s.selected_value(x).unwrap()).abs() <= 1e-12);
            }
        }
    }
}
