//! Numerical certification of a candidate value function.
//!
//! The checks are the computable side of the optimality argument: the ODE
//! holds below the barrier, the boundary and smooth-fit conditions hold, the
//! slope stays within `[1, k]` where required, the generator is nonpositive
//! above the barrier, and the curvature changes sign at most once.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::solution::Solution;
use crate::sweep::linspace;
use crate::value::{StrategyKind, StrategyValue};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Bound on `|alpha f - mu f' - sigma^2 f'' / 2|` and on the linear-branch error.
    pub ode_residual: f64,
    /// Bound on boundary and smooth-fit errors.
    pub boundary: f64,
    /// Allowed float slack on weak inequalities.
    pub inequality_slack: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            ode_residual: 1e-8,
            boundary: 1e-9,
            inequality_slack: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub condition: String,
    pub x: f64,
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub max_ode_residual: f64,
    pub max_linear_residual: f64,
    pub boundary_errors: BTreeMap<String, f64>,
    pub inequality_violations: Vec<Violation>,
    /// Interior sign changes of `f''` found per function.
    pub curvature_sign_changes: BTreeMap<String, Vec<f64>>,
    pub tolerances: Tolerances,
    pub passed: bool,
}

impl VerificationReport {
    pub fn new(tolerances: Tolerances) -> Self {
        VerificationReport {
            max_ode_residual: 0.0,
            max_linear_residual: 0.0,
            boundary_errors: BTreeMap::new(),
            inequality_violations: Vec::new(),
            curvature_sign_changes: BTreeMap::new(),
            tolerances,
            passed: true,
        }
    }

    pub fn merge(&mut self, other: VerificationReport) {
        self.max_ode_residual = self.max_ode_residual.max(other.max_ode_residual);
        self.max_linear_residual = self.max_linear_residual.max(other.max_linear_residual);
        self.boundary_errors.extend(other.boundary_errors);
        self.inequality_violations
            .extend(other.inequality_violations);
        self.curvature_sign_changes
            .extend(other.curvature_sign_changes);
        self.refresh();
    }

    /// Recomputes `passed` from the collected numbers.
    pub fn refresh(&mut self) {
        let t = &self.tolerances;
        self.passed = self.max_ode_residual < t.ode_residual
            && self.max_linear_residual < t.ode_residual
            && self.boundary_errors.values().all(|e| *e < t.boundary)
            && self.inequality_violations.is_empty();
    }

    /// Worst boundary error among entries whose name contains `needle`.
    pub fn worst_boundary(&self, needle: &str) -> f64 {
        self.boundary_errors
            .iter()
            .filter(|(k, _)| k.contains(needle))
            .map(|(_, v)| *v)
            .fold(0.0, f64::max)
    }

    fn violate(&mut self, condition: impl Into<String>, x: f64, magnitude: f64) {
        self.inequality_violations.push(Violation {
            condition: condition.into(),
            x,
            magnitude,
        });
    }
}

/// A value function together with the barrier it claims is optimal when
/// unconstrained (`b_star` for `G`, `b_double_star` for `H`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub value: StrategyValue,
    pub free_barrier: f64,
}

impl Candidate {
    pub fn label(&self) -> &'static str {
        match self.value.kind() {
            StrategyKind::UpperBarrier => "G",
            StrategyKind::DoubleBarrier => "H",
        }
    }

    /// True when reflection happens at the free barrier rather than at `b_r`.
    pub fn at_free_barrier(&self) -> bool {
        let b = self.value.barrier();
        (b - self.free_barrier).abs() <= 1e-12 * b.max(1.0)
    }

    pub fn upper(solution: &Solution) -> Self {
        Candidate {
            value: solution.upper_value(),
            free_barrier: solution.barriers.b_star,
        }
    }

    pub fn double(solution: &Solution) -> Self {
        Candidate {
            value: solution.double_value(),
            free_barrier: solution.barriers.b_double_star,
        }
    }

    pub fn optimal(solution: &Solution) -> Self {
        match solution.optimal_strategy().kind {
            StrategyKind::UpperBarrier => Self::upper(solution),
            StrategyKind::DoubleBarrier => Self::double(solution),
        }
    }
}

/// Evenly spaced points on `[0, b)` stopping one step short of `b`.
pub fn interior_grid(b: f64, n: usize) -> Vec<f64> {
    let mut grid = linspace(0.0, b, n + 1);
    grid.pop();
    grid
}

/// Evenly spaced points on `(b, b + span]`.
pub fn exterior_grid(b: f64, span: f64, n: usize) -> Vec<f64> {
    linspace(b, b + span, n + 1).into_iter().skip(1).collect()
}

/// Max ODE residual on `grid`, which must lie in `[0, b)`.
pub fn ode_residual(f: &StrategyValue, params: &ModelParams, grid: &[f64]) -> Result<f64> {
    let b = f.barrier();
    let mut worst: f64 = 0.0;
    for &x in grid {
        if !(0.0..b).contains(&x) {
            return Err(Error::GridDomain { x, lo: 0.0, hi: b });
        }
        let e = f.eval(x)?;
        let r = params.alpha * e.value - params.mu * e.slope - 0.5 * params.sigma2() * e.curvature;
        worst = worst.max(r.abs());
    }
    Ok(worst)
}

/// Max deviation from `f(x) = x - b + f(b)` on `grid`, which must lie above `b`.
pub fn linear_branch_residual(f: &StrategyValue, grid: &[f64]) -> Result<f64> {
    let b = f.barrier();
    let at_b = f.ode_branch_at(b).value;
    let mut worst: f64 = 0.0;
    for &x in grid {
        if !(x > b) {
            return Err(Error::GridDomain {
                x,
                lo: b,
                hi: f64::INFINITY,
            });
        }
        worst = worst.max((f.value(x)? - (x - b + at_b)).abs());
    }
    Ok(worst)
}

/// ODE and linear-branch residuals for one candidate.
pub fn ode_residual_sweep(
    candidate: &Candidate,
    params: &ModelParams,
    points: usize,
    span_above: f64,
    tolerances: Tolerances,
) -> Result<VerificationReport> {
    let b = candidate.value.barrier();
    let mut report = VerificationReport::new(tolerances);
    report.max_ode_residual = ode_residual(&candidate.value, params, &interior_grid(b, points))?;
    report.max_linear_residual =
        linear_branch_residual(&candidate.value, &exterior_grid(b, span_above, points))?;
    report.refresh();
    Ok(report)
}

/// Boundary conditions at zero and at the barrier, plus smooth fit (free
/// barrier) or strictly positive left curvature (barrier pushed up to `b_r`).
pub fn boundary_conditions(
    candidate: &Candidate,
    params: &ModelParams,
    tolerances: Tolerances,
) -> Result<VerificationReport> {
    let f = &candidate.value;
    let b = f.barrier();
    let name = candidate.label();
    let mut report = VerificationReport::new(tolerances);
    let at_zero = f.eval(0.0)?;
    let at_b = f.ode_branch_at(b);
    match f.kind() {
        StrategyKind::UpperBarrier => {
            report
                .boundary_errors
                .insert(format!("{name}(0)"), at_zero.value.abs());
        }
        StrategyKind::DoubleBarrier => {
            report
                .boundary_errors
                .insert(format!("{name}'(0)-k"), (at_zero.slope - params.k).abs());
        }
    }
    report
        .boundary_errors
        .insert(format!("{name}'(b)-1"), (at_b.slope - 1.0).abs());
    if candidate.at_free_barrier() {
        report
            .boundary_errors
            .insert(format!("{name}''(b-) smooth fit"), at_b.curvature.abs());
    } else if !(at_b.curvature > 0.0) {
        report.violate(format!("{name}''(b-) > 0"), b, -at_b.curvature);
    }
    report.refresh();
    Ok(report)
}

/// The pointwise inequalities that make `g` dominate every admissible payoff.
pub fn theorem_inequalities(
    candidate: &Candidate,
    params: &ModelParams,
    grid: &[f64],
    tolerances: Tolerances,
) -> Result<VerificationReport> {
    let g = &candidate.value;
    let b = g.barrier();
    let name = candidate.label();
    let slack = tolerances.inequality_slack;
    let at_free = candidate.at_free_barrier();
    let mut report = VerificationReport::new(tolerances);
    for &x in grid {
        let e = g.eval(x)?;
        if x > b {
            let generator = params.mu - params.alpha * e.value;
            if generator > slack {
                report.violate(format!("mu - alpha {name} <= 0 above b"), x, generator);
            }
        }
        if e.slope > params.k + slack {
            report.violate(format!("{name}' <= k"), x, e.slope - params.k);
        }
        if at_free && e.slope < 1.0 - slack {
            report.violate(format!("{name}' >= 1"), x, 1.0 - e.slope);
        }
        if !at_free && x >= b && (e.slope - 1.0).abs() > slack {
            report.violate(format!("{name}' = 1 above b_r"), x, (e.slope - 1.0).abs());
        }
        if !(e.slope > 0.0) {
            report.violate(format!("{name}' > 0"), x, -e.slope);
        }
        if e.value < -slack {
            report.violate(format!("{name} >= 0"), x, -e.value);
        }
    }
    report.refresh();
    Ok(report)
}

/// Sign structure of `g''` on `[0, b)`: negative throughout when reflecting
/// at the free barrier, otherwise at most one switch from negative to positive.
pub fn convexity_switch_check(
    candidate: &Candidate,
    points: usize,
    tolerances: Tolerances,
) -> Result<VerificationReport> {
    let g = &candidate.value;
    let name = candidate.label();
    let slack = tolerances.inequality_slack;
    let mut report = VerificationReport::new(tolerances);
    let grid = interior_grid(g.barrier(), points);
    let curvature: Vec<f64> = grid
        .iter()
        .map(|&x| g.eval(x).map(|e| e.curvature))
        .collect::<Result<_>>()?;

    let mut changes = Vec::new();
    for i in 1..grid.len() {
        let (prev, cur) = (curvature[i - 1], curvature[i]);
        if prev < 0.0 && cur >= 0.0 {
            changes.push(grid[i]);
        } else if prev > 0.0 && cur <= 0.0 {
            report.violate(
                format!("{name}'' switches from + to -"),
                grid[i],
                prev - cur,
            );
        }
    }
    if candidate.at_free_barrier() {
        for (&x, &c) in grid.iter().zip(&curvature) {
            if c > slack {
                report.violate(format!("{name}'' < 0 below free barrier"), x, c);
            }
        }
    } else if changes.len() > 1 {
        report.violate(
            format!("{name}'' has one sign change"),
            changes[1],
            changes.len() as f64,
        );
    }
    report
        .curvature_sign_changes
        .insert(name.to_string(), changes);
    report.refresh();
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub ode_points: usize,
    pub inequality_points: usize,
    /// Inequality grids extend this far above the barrier.
    pub span_above: f64,
    pub tolerances: Tolerances,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            ode_points: 1000,
            inequality_points: 10_000,
            span_above: 10.0,
            tolerances: Tolerances::default(),
        }
    }
}

/// Runs every check: residuals, boundaries and convexity for both `G` and
/// `H`, and the dominance inequalities for the selected optimal function.
pub fn verify_solution(solution: &Solution, config: &VerifyConfig) -> Result<VerificationReport> {
    let t = config.tolerances;
    let params = &solution.params;
    let mut report = VerificationReport::new(t);
    for candidate in [Candidate::upper(solution), Candidate::double(solution)] {
        report.merge(ode_residual_sweep(
            &candidate,
            params,
            config.ode_points,
            config.span_above,
            t,
        )?);
        report.merge(boundary_conditions(&candidate, params, t)?);
        report.merge(convexity_switch_check(&candidate, config.ode_points, t)?);
    }
    let optimal = Candidate::optimal(solution);
    let grid = linspace(
        0.0,
        optimal.value.barrier() + config.span_above,
        config.inequality_points,
    );
    report.merge(theorem_inequalities(&optimal, params, &grid, t)?);
    Ok(report)
}
