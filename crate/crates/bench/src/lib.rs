//! Shared fixtures for the benchmarks.

use divcap_core::{ModelParams, Solution};

/// The reference parameter set at payout barrier `b_r`.
pub fn reference(b_r: f64) -> Solution {
    Solution::new(ModelParams::reference(b_r).expect("valid parameters")).expect("solvable")
}
