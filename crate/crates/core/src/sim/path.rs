//! State of one controlled surplus path under a barrier strategy.

use serde::{Deserialize, Serialize};

use crate::value::StrategyKind;

/// Reflection rules for one simulated strategy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Control {
    pub kind: StrategyKind,
    pub barrier: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathState {
    pub x: f64,
    /// Accumulated discounted dividends.
    pub disc_dividends: f64,
    /// Accumulated discounted injections, before the cost factor `k`.
    pub disc_injections: f64,
    pub ruined: bool,
    pub ruin_time: Option<f64>,
}

/// Undiscounted cash flows of a single step.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Flows {
    pub dividend: f64,
    pub injection: f64,
}

impl PathState {
    /// Initial state. Surplus above the barrier is paid out at once; an
    /// upper barrier path started at zero is ruined immediately.
    pub fn start(control: &Control, x0: f64) -> Self {
        let mut state = PathState {
            x: x0,
            disc_dividends: 0.0,
            disc_injections: 0.0,
            ruined: false,
            ruin_time: None,
        };
        if x0 > control.barrier {
            state.disc_dividends = x0 - control.barrier;
            state.x = control.barrier;
        }
        if control.kind == StrategyKind::UpperBarrier && x0 <= 0.0 {
            state.ruined = true;
            state.ruin_time = Some(0.0);
        }
        state
    }

    /// Applies the increment `dx` over a step ending at time `t`, then
    /// projects back into the admissible region. `discount` is `exp(-alpha t)`.
    #[inline]
    pub fn step(&mut self, control: &Control, dx: f64, t: f64, discount: f64) -> Flows {
        self.x += dx;
        if self.x > control.barrier {
            let dividend = self.x - control.barrier;
            self.disc_dividends += discount * dividend;
            self.x = control.barrier;
            return Flows {
                dividend,
                injection: 0.0,
            };
        }
        if self.x < 0.0 {
            match control.kind {
                StrategyKind::UpperBarrier => {
                    self.ruined = true;
                    self.ruin_time = Some(t);
                }
                StrategyKind::DoubleBarrier => {
                    let injection = -self.x;
                    self.disc_injections += discount * injection;
                    self.x = 0.0;
                    return Flows {
                        dividend: 0.0,
                        injection,
                    };
                }
            }
        }
        Flows::default()
    }

    pub fn payoff(&self, k: f64) -> f64 {
        self.disc_dividends - k * self.disc_injections
    }
}
