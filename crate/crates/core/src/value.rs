//! Closed-form values of the two barrier strategy families.
//!
//! Both functions solve `alpha f = mu f' + sigma^2 f'' / 2` below their
//! reflection barrier `b` and continue with slope one above it. Numerators and
//! denominators are divided through by `e^{r1 b}` so no exponent is positive
//! on `[0, b]`; large barriers therefore cannot overflow.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::Roots;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StrategyKind {
    /// Reflect at `b`, never inject; ruin at the first passage below zero.
    UpperBarrier,
    /// Reflect at `b` by paying dividends and at zero by injecting capital.
    DoubleBarrier,
}

/// Value and derivatives at one surplus level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub value: f64,
    pub slope: f64,
    /// Second derivative. At the barrier itself this is the left limit and
    /// `at_kink` is set; the right limit is zero.
    pub curvature: f64,
    pub at_kink: bool,
}

fn check_surplus(x: f64) -> Result<()> {
    if x >= 0.0 {
        Ok(())
    } else {
        Err(Error::NegativeSurplus(x))
    }
}

fn check_barrier(b: f64) -> Result<()> {
    if b > 0.0 && b.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "barrier",
            requirement: "be positive",
            value: b,
        })
    }
}

/// `G`: expected discounted dividends of the upper barrier strategy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpperBarrierValue {
    roots: Roots,
    barrier: f64,
    denom: f64,
}

impl UpperBarrierValue {
    pub fn new(roots: Roots, barrier: f64) -> Result<Self> {
        check_barrier(barrier)?;
        let denom = roots.r1 - roots.r2 * ((roots.r2 - roots.r1) * barrier).exp();
        Ok(UpperBarrierValue {
            roots,
            barrier,
            denom,
        })
    }

    pub fn barrier(&self) -> f64 {
        self.barrier
    }

    fn ode_branch(&self, x: f64) -> (f64, f64, f64) {
        let Roots { r1, r2 } = self.roots;
        let u1 = (r1 * (x - self.barrier)).exp();
        let u2 = (r2 * x - r1 * self.barrier).exp();
        (
            (u1 - u2) / self.denom,
            (r1 * u1 - r2 * u2) / self.denom,
            (r1 * r1 * u1 - r2 * r2 * u2) / self.denom,
        )
    }
}

/// `H`: expected discounted dividends net of `k` times injections for the
/// double barrier strategy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleBarrierValue {
    roots: Roots,
    barrier: f64,
    c1: f64,
    c2: f64,
    denom: f64,
}

impl DoubleBarrierValue {
    pub fn new(roots: Roots, k: f64, barrier: f64) -> Result<Self> {
        check_barrier(barrier)?;
        let Roots { r1, r2 } = roots;
        Ok(DoubleBarrierValue {
            roots,
            barrier,
            c1: (1.0 - k * (r2 * barrier).exp()) / r1,
            c2: ((-r1 * barrier).exp() - k) / r2,
            denom: -((r2 - r1) * barrier).exp_m1(),
        })
    }

    pub fn barrier(&self) -> f64 {
        self.barrier
    }

    fn ode_branch(&self, x: f64) -> (f64, f64, f64) {
        let Roots { r1, r2 } = self.roots;
        let a = self.c1 * (r1 * (x - self.barrier)).exp();
        let c = self.c2 * (r2 * x).exp();
        (
            (a - c) / self.denom,
            (r1 * a - r2 * c) / self.denom,
            (r1 * r1 * a - r2 * r2 * c) / self.denom,
        )
    }
}

/// Either closed-form value function, evaluated piecewise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StrategyValue {
    Upper(UpperBarrierValue),
    Double(DoubleBarrierValue),
}

impl StrategyValue {
    pub fn kind(&self) -> StrategyKind {
        match self {
            StrategyValue::Upper(_) => StrategyKind::UpperBarrier,
            StrategyValue::Double(_) => StrategyKind::DoubleBarrier,
        }
    }

    pub fn barrier(&self) -> f64 {
        match self {
            StrategyValue::Upper(g) => g.barrier(),
            StrategyValue::Double(h) => h.barrier(),
        }
    }

    fn ode_branch(&self, x: f64) -> (f64, f64, f64) {
        match self {
            StrategyValue::Upper(g) => g.ode_branch(x),
            StrategyValue::Double(h) => h.ode_branch(x),
        }
    }

    pub fn eval(&self, x: f64) -> Result<Evaluation> {
        check_surplus(x)?;
        let b = self.barrier();
        if x < b {
            let (value, slope, curvature) = self.ode_branch(x);
            return Ok(Evaluation {
                value,
                slope,
                curvature,
                at_kink: false,
            });
        }
        let (at_b, _, left_curvature) = self.ode_branch(b);
        let at_kink = x == b;
        Ok(Evaluation {
            value: x - b + at_b,
            slope: 1.0,
            curvature: if at_kink { left_curvature } else { 0.0 },
            at_kink,
        })
    }

    pub fn value(&self, x: f64) -> Result<f64> {
        self.eval(x).map(|e| e.value)
    }

    pub fn slope(&self, x: f64) -> Result<f64> {
        self.eval(x).map(|e| e.slope)
    }

    /// Raw ODE-branch formulas at any `x`, ignoring the barrier. Used to
    /// probe one-sided limits and branch continuity.
    pub fn ode_branch_at(&self, x: f64) -> Evaluation {
        let (value, slope, curvature) = self.ode_branch(x);
        Evaluation {
            value,
            slope,
            curvature,
            at_kink: false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::barriers::{b_double_star, b_star};
    use crate::params::ModelParams;

    /// Direct transcription of the unscaled closed forms.
    fn g_direct(r: &Roots, b: f64, x: f64) -> f64 {
        let den = r.r1 * (r.r1 * b).exp() - r.r2 * (r.r2 * b).exp();
        if x <= b {
            ((r.r1 * x).exp() - (r.r2 * x).exp()) / den
        } else {
            x - b + g_direct(r, b, b)
        }
    }

    fn h_direct(r: &Roots, k: f64, b: f64, x: f64) -> f64 {
        if x > b {
            return x - b + h_direct(r, k, b, b);
        }
        let d = (r.r1 * b).exp() - (r.r2 * b).exp();
        ((1.0 - k * (r.r2 * b).exp()) / r.r1 * (r.r1 * x).exp()
            - (1.0 - k * (r.r1 * b).exp()) / r.r2 * (r.r2 * x).exp())
            / d
    }

    #[test]
    fn rescaled_forms_match_direct_formulas() {
        let p = ModelParams::reference(0.0).unwrap();
        let r = p.roots();
        for b in [0.17, 0.75, 1.4, 2.4, 6.0] {
            let g = StrategyValue::Upper(UpperBarrierValue::new(r, b).unwrap());
            let h = StrategyValue::Double(DoubleBarrierValue::new(r, p.k, b).unwrap());
            for i in 0..=40 {
                let x = i as f64 * 0.2;
                assert!((g.value(x).unwrap() - g_direct(&r, b, x)).abs() < 1e-12);
                assert!((h.value(x).unwrap() - h_direct(&r, p.k, b, x)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn boundary_values() {
        let p = ModelParams::reference(0.0).unwrap();
        let r = p.roots();
        let bs = b_star(&r);
        let bss = b_double_star(&p, &r).unwrap();
        let g = StrategyValue::Upper(UpperBarrierValue::new(r, bs).unwrap());
        let h = StrategyValue::Double(DoubleBarrierValue::new(r, p.k, bss).unwrap());
        assert_eq!(g.value(0.0).unwrap(), 0.0);
        assert!((g.ode_branch_at(bs).slope - 1.0).abs() < 1e-13);
        assert!((h.slope(0.0).unwrap() - p.k).abs() < 1e-13);
        assert!((h.ode_branch_at(bss).slope - 1.0).abs() < 1e-13);
        // At the smooth-fit barrier the generator vanishes on the linear branch: G(b*) = mu / alpha.
        assert!((g.value(bs).unwrap() - p.mu / p.alpha).abs() < 1e-12);
    }

    #[test]
    fn kink_reports_left_limit() {
        let p = ModelParams::reference(0.0).unwrap();
        let r = p.roots();
        let g = StrategyValue::Upper(UpperBarrierValue::new(r, 2.4).unwrap());
        let at = g.eval(2.4).unwrap();
        assert!(at.at_kink);
        assert!(at.curvature > 0.0);
        let right = g.eval(2.4 + 1e-9).unwrap();
        assert!(!right.at_kink);
        assert_eq!(right.curvature, 0.0);
        let left = g.eval(2.4 - 1e-9).unwrap();
        assert!((left.curvature - at.curvature).abs() < 1e-8);
    }

    #[test]
    fn continuity_across_the_barrier() {
        let p = ModelParams::reference(0.0).unwrap();
        let r = p.roots();
        let bss = b_double_star(&p, &r).unwrap();
        let h = StrategyValue::Double(DoubleBarrierValue::new(r, p.k, bss).unwrap());
        let ode = h.ode_branch_at(bss);
        let lin = h.eval(bss).unwrap();
        assert!((ode.value - lin.value).abs() < 1e-12);
        assert!((ode.slope - lin.slope).abs() < 1e-12);
        let x = 1.0;
        assert!((h.value(x).unwrap() - (x - bss + h.value(bss).unwrap())).abs() < 1e-12);
    }

    #[test]
    fn negative_surplus_is_a_domain_error() {
        let r = ModelParams::reference(0.0).unwrap().roots();
        let g = StrategyValue::Upper(UpperBarrierValue::new(r, 1.0).unwrap());
        assert!(matches!(g.eval(-0.1), Err(Error::NegativeSurplus(_))));
        assert!(UpperBarrierValue::new(r, 0.0).is_err());
        assert!(DoubleBarrierValue::new(r, 1.1, -1.0).is_err());
    }

    #[test]
    fn huge_barriers_stay_finite() {
        let r = ModelParams::reference(0.0).unwrap().roots();
        let h = StrategyValue::Double(DoubleBarrierValue::new(r, 1.01, 1000.0).unwrap());
        let g = StrategyValue::Upper(UpperBarrierValue::new(r, 1000.0).unwrap());
        for x in [0.0, 1.0, 500.0, 1000.0, 1200.0] {
            assert!(h.value(x).unwrap().is_finite());
            assert!(g.value(x).unwrap().is_finite());
        }
    }
}
