//! Value curves over a surplus grid or a payout-barrier grid, with CSV output.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solution::Solution;

/// Default number of grid points for sweeps.
pub const DEFAULT_POINTS: usize = 501;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SweepMode {
    /// Abscissae are surplus levels; the payout barrier is fixed.
    Surplus { b_r: f64 },
    /// Abscissae are payout barriers; the surplus is fixed.
    PayoutBarrier { x: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueCurve {
    pub mode: SweepMode,
    pub abscissae: Vec<f64>,
    #[serde(rename = "values_G")]
    pub values_g: Vec<f64>,
    #[serde(rename = "values_H")]
    pub values_h: Vec<f64>,
    #[serde(rename = "values_V")]
    pub values_v: Vec<f64>,
}

/// `n` evenly spaced points on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (n - 1) as f64;
            (0..n)
                .map(|i| if i + 1 == n { hi } else { lo + step * i as f64 })
                .collect()
        }
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let sorted = grid.windows(2).all(|w| w[0] <= w[1]);
    if !sorted || !(grid[0] >= 0.0) || grid.iter().any(|v| !v.is_finite()) {
        return Err(Error::UnsortedGrid);
    }
    Ok(())
}

/// `G`, `H` and `V` along a surplus grid at the solution's payout barrier.
pub fn sweep_surplus(solution: &Solution, grid: &[f64]) -> Result<ValueCurve> {
    check_grid(grid)?;
    let g = solution.upper_value();
    let h = solution.double_value();
    let mut curve = ValueCurve::empty(
        SweepMode::Surplus {
            b_r: solution.params.b_r,
        },
        grid.len(),
    );
    for &x in grid {
        curve.push(x, g.value(x)?, h.value(x)?);
    }
    Ok(curve)
}

/// `G`, `H` and `V` at a fixed surplus `x` as the payout barrier varies.
pub fn sweep_payout_barrier(solution: &Solution, x: f64, grid: &[f64]) -> Result<ValueCurve> {
    check_grid(grid)?;
    if !(x >= 0.0) {
        return Err(Error::NegativeSurplus(x));
    }
    let mut curve = ValueCurve::empty(SweepMode::PayoutBarrier { x }, grid.len());
    for &b_r in grid {
        let s = solution.with_payout_barrier(b_r)?;
        curve.push(b_r, s.upper_value().value(x)?, s.double_value().value(x)?);
    }
    Ok(curve)
}

impl ValueCurve {
    fn empty(mode: SweepMode, capacity: usize) -> Self {
        ValueCurve {
            mode,
            abscissae: Vec::with_capacity(capacity),
            values_g: Vec::with_capacity(capacity),
            values_h: Vec::with_capacity(capacity),
            values_v: Vec::with_capacity(capacity),
        }
    }

    fn push(&mut self, at: f64, g: f64, h: f64) {
        self.abscissae.push(at);
        self.values_g.push(g);
        self.values_h.push(h);
        self.values_v.push(g.max(h));
    }

    pub fn len(&self) -> usize {
        self.abscissae.len()
    }

    pub fn is_empty(&self) -> bool {
        self.abscissae.is_empty()
    }

    /// CSV with header `x_or_br,G,H,V`. `precision` is a number of
    /// significant digits; `None` writes the shortest round-trip form.
    pub fn to_csv(&self, precision: Option<usize>) -> String {
        let mut out = String::from("x_or_br,G,H,V\n");
        for i in 0..self.len() {
            let row = [
                self.abscissae[i],
                self.values_g[i],
                self.values_h[i],
                self.values_v[i],
            ];
            let fields: Vec<String> = row.iter().map(|&v| format_number(v, precision)).collect();
            let _ = writeln!(out, "{}", fields.join(","));
        }
        out
    }
}

/// Formats `v` with `precision` significant digits, or shortest round-trip.
/// Magnitudes below 1e-4 switch to exponent notation.
pub fn format_number(v: f64, precision: Option<usize>) -> String {
    match precision {
        None => format!("{v}"),
        Some(_) if v == 0.0 || !v.is_finite() => format!("{v}"),
        Some(digits) => {
            let digits = digits.max(1) as i32;
            let magnitude = v.abs().log10().floor() as i32;
            if magnitude < -4 {
                let decimals = (digits - 1) as usize;
                return format!("{v:.decimals$e}");
            }
            let decimals = (digits - 1 - magnitude).max(0) as usize;
            format!("{v:.decimals$}")
        }
    }
}
