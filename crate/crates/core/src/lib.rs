//! Optimal dividend payout and capital injection for a Brownian surplus with
//! drift, when dividends may only be paid while the surplus is at or above a
//! payout barrier `b_r`.
//!
//! The optimal policy is always one of two barrier strategies: reflect at
//! `max(b_r, b_double_star)` and inject capital at zero (no bankruptcy), or
//! reflect at `max(b_r, b_star)` and let the firm fail at zero. [`Solution`]
//! computes the barriers, picks the strategy and evaluates the value
//! function; [`verify`] certifies the closed forms numerically and [`sim`]
//! checks them by Monte Carlo.
//!
//! ```
//! use divcap_core::{ModelParams, Solution, StrategyKind};
//!
//! let params = ModelParams::reference(0.0).unwrap();
//! let solution = Solution::new(params).unwrap();
//! assert_eq!(solution.optimal_strategy().kind, StrategyKind::DoubleBarrier);
//! assert!((solution.barriers.b_star - 0.7476).abs() < 1e-4);
//! ```

// `!(x > 0.0)` is used deliberately so that NaN takes the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod barriers;
pub mod error;
pub mod params;
pub mod rootfind;
pub mod sampling;
pub mod sim;
pub mod solution;
pub mod sweep;
pub mod value;
pub mod verify;

pub use barriers::{BarrierSet, CostRegime, Regime};
pub use error::{Error, Result};
pub use params::{ModelParams, Roots};
pub use sim::{SimConfig, SimEstimate};
pub use solution::{Solution, StrategySpec};
pub use sweep::{SweepMode, ValueCurve};
pub use value::{Evaluation, StrategyKind, StrategyValue};
pub use verify::{VerificationReport, VerifyConfig};
