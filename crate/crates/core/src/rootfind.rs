//! Bisection on increasing functions with geometric bracket expansion.

use crate::error::{Error, Result};

/// Absolute tolerance on the located root.
pub const ROOT_TOL: f64 = 1e-13;
/// Largest bracket width tried before giving up.
pub const BRACKET_CAP: f64 = 1_152_921_504_606_846_976.0; // 2^60

/// Finds the root of a strictly increasing `f` on `[lo, inf)`.
///
/// Requires `f(lo) <= 0`. The bracket `[lo, lo + 1]` is widened by doubling
/// its width until `f` changes sign; `lo` itself is returned when `f(lo) >= 0`.
pub fn increasing_root<F>(f: F, lo: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let f_lo = f(lo);
    if f_lo >= 0.0 {
        return Ok(lo);
    }
    let mut width = 1.0;
    let mut a = lo;
    let b = loop {
        let candidate = lo + width;
        let value = f(candidate);
        if value >= 0.0 {
            break candidate;
        }
        if !value.is_finite() || width >= BRACKET_CAP {
            return Err(Error::BracketExhausted { limit: lo + width });
        }
        a = candidate;
        width *= 2.0;
    };
    Ok(bisect(&f, a, b))
}

/// Bisection on `[a, b]` with `f(a) < 0 <= f(b)`.
fn bisect<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64) -> f64 {
    while b - a > ROOT_TOL {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if f(mid) < 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    // Report whichever endpoint has the smaller residual.
    if f(a).abs() < f(b).abs() {
        a
    } else {
        b
    }
}
