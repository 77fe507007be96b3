//! Command-line front end for `divcap-core`.
//!
//! Exit codes: 0 success, 2 invalid input, 3 I/O failure, 4 failed
//! verification.

pub mod args;

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use divcap_core::sampling::sample_cases;
use divcap_core::sim::{simulate_strategy, trace_path, trace_to_csv};
use divcap_core::sweep::{format_number, linspace, sweep_payout_barrier, sweep_surplus};
use divcap_core::value::{DoubleBarrierValue, UpperBarrierValue};
use divcap_core::verify::verify_solution;
use divcap_core::{
    BarrierSet, ModelParams, Regime, Roots, SimConfig, SimEstimate, Solution, StrategyKind,
    StrategySpec, StrategyValue, ValueCurve, VerificationReport, VerifyConfig,
};
use serde::Serialize;
use thiserror::Error;

pub use args::Cli;
use args::{
    BarrierArgs, Command, Format, GridArgs, OutputArgs, SimulateArgs, SolveArgs, StrategyChoice,
    SurplusArgs, SweepCommand, VerifyArgs,
};

/// Horizon for ruin-time moments when none is given.
pub const DEFAULT_RUIN_HORIZON: f64 = 2000.0;

const TEXT_DIGITS: usize = 6;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Input(#[from] divcap_core::Error),
    #[error("{0}")]
    Usage(String),
    #[error("cannot write {}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("verification failed")]
    VerificationFailed,
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) | CliError::Usage(_) => 2,
            CliError::Io { .. } => 3,
            CliError::VerificationFailed => 4,
        }
    }
}

/// Runs one command, writing reports to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let text = match cli.command {
        Command::Solve(a) => solve(&a)?,
        Command::Sweep(a) => match a.mode {
            SweepCommand::Surplus(s) => sweep_x(&s)?,
            SweepCommand::Barrier(b) => sweep_br(&b)?,
        },
        Command::Simulate(a) => simulate(&a)?,
        Command::Verify(a) => {
            let (text, passed) = verify(&a)?;
            emit(out, &text)?;
            return if passed {
                Ok(())
            } else {
                Err(CliError::VerificationFailed)
            };
        }
    };
    emit(out, &text)
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|source| CliError::Io {
            path: PathBuf::from("<stdout>"),
            source,
        })
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

struct Numbers {
    digits: Option<usize>,
    trim: bool,
}

impl Numbers {
    fn for_output(o: &OutputArgs) -> Self {
        match o.format {
            Format::Text => Numbers {
                digits: Some(o.precision.unwrap_or(TEXT_DIGITS)),
                trim: true,
            },
            _ => Numbers {
                digits: o.precision,
                trim: false,
            },
        }
    }

    fn f(&self, v: f64) -> String {
        let s = format_number(v, self.digits);
        if !self.trim || !s.contains('.') {
            return s;
        }
        let (mantissa, exponent) = s.split_at(s.find('e').unwrap_or(s.len()));
        format!(
            "{}{exponent}",
            mantissa.trim_end_matches('0').trim_end_matches('.')
        )
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    fs::create_dir_all(dir)
        .and_then(|_| fs::write(&path, contents))
        .map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
    Ok(path)
}

#[derive(Debug, Serialize)]
struct ValueRow {
    x: f64,
    #[serde(rename = "G")]
    g: f64,
    #[serde(rename = "H")]
    h: f64,
    #[serde(rename = "V")]
    v: f64,
}

/// Output of `solve --format json`.
#[derive(Debug, Serialize)]
pub struct SolveReport {
    pub params: ModelParams,
    pub roots: Roots,
    pub k_critical: f64,
    pub regime: Regime,
    pub barriers: BarrierSet,
    pub strategy: StrategySpec,
    values: Vec<ValueRow>,
}

fn describe(spec: &StrategySpec, n: &Numbers) -> String {
    let mut s = match spec.kind {
        StrategyKind::UpperBarrier => format!("upper barrier at {}, no injection", n.f(spec.upper)),
        StrategyKind::DoubleBarrier => format!(
            "double barrier, dividends at {}, injection at {}",
            n.f(spec.upper),
            n.f(spec.lower.unwrap_or(0.0))
        ),
    };
    if spec.both_optimal {
        s.push_str(" (upper barrier equally optimal)");
    }
    s
}

fn solve(a: &SolveArgs) -> Result<String, CliError> {
    let sol = Solution::new(a.params.resolve()?)?;
    let mut values = Vec::with_capacity(a.x0.len());
    for &x in &a.x0 {
        let (g, h) = (sol.upper_value().value(x)?, sol.double_value().value(x)?);
        values.push(ValueRow {
            x,
            g,
            h,
            v: g.max(h),
        });
    }
    let report = SolveReport {
        params: sol.params,
        roots: sol.roots,
        k_critical: sol.cost.k_critical,
        regime: sol.cost.regime,
        barriers: sol.barriers,
        strategy: sol.optimal_strategy(),
        values,
    };
    let n = Numbers::for_output(&a.output);
    let p = &report.params;
    let b = &report.barriers;
    let mut rows: Vec<(String, String)> = vec![
        ("mu".into(), n.f(p.mu)),
        ("sigma2".into(), n.f(p.sigma2())),
        ("alpha".into(), n.f(p.alpha)),
        ("k".into(), n.f(p.k)),
        ("b_r".into(), n.f(p.b_r)),
        ("r1".into(), n.f(report.roots.r1)),
        ("r2".into(), n.f(report.roots.r2)),
        ("k_critical".into(), n.f(report.k_critical)),
        ("regime".into(), format!("{:?}", report.regime)),
        ("b_star".into(), n.f(b.b_star)),
        ("b_double_star".into(), n.f(b.b_double_star)),
    ];
    if let Some(bh) = b.b_hat {
        rows.push(("b_hat".into(), n.f(bh)));
    }
    rows.push(("b_effective_G".into(), n.f(b.b_effective_g)));
    rows.push(("b_effective_H".into(), n.f(b.b_effective_h)));
    let mut out = String::new();
    match a.output.format {
        Format::Json => return Ok(json(&report)),
        Format::Csv => {
            rows.push(("strategy".into(), format!("{:?}", report.strategy.kind)));
            rows.push(("strategy_barrier".into(), n.f(report.strategy.upper)));
            rows.push((
                "both_optimal".into(),
                report.strategy.both_optimal.to_string(),
            ));
            out.push_str("quantity,value\n");
            for (k, v) in &rows {
                let _ = writeln!(out, "{k},{v}");
            }
            for r in &report.values {
                for (name, v) in [("G", r.g), ("H", r.h), ("V", r.v)] {
                    let _ = writeln!(out, "{name}({}),{}", n.f(r.x), n.f(v));
                }
            }
        }
        Format::Text => {
            rows.push(("strategy".into(), describe(&report.strategy, &n)));
            for (k, v) in &rows {
                let _ = writeln!(out, "{k:<15}{v}");
            }
            if !report.values.is_empty() {
                let _ = writeln!(out, "\n{:>12} {:>12} {:>12} {:>12}", "x", "G", "H", "V");
                for r in &report.values {
                    let _ = writeln!(
                        out,
                        "{:>12} {:>12} {:>12} {:>12}",
                        n.f(r.x),
                        n.f(r.g),
                        n.f(r.h),
                        n.f(r.v)
                    );
                }
            }
        }
    }
    Ok(out)
}

fn grid_for(g: &GridArgs, max: f64) -> Vec<f64> {
    g.grid
        .clone()
        .unwrap_or_else(|| linspace(0.0, max, g.points))
}

fn curve_file(
    out: &OutputArgs,
    stem: &str,
    curve: &ValueCurve,
    written: &mut Vec<PathBuf>,
) -> Result<(), CliError> {
    let (name, contents) = match out.format {
        Format::Json => (format!("{stem}.json"), json(curve)),
        Format::Text | Format::Csv => (format!("{stem}.csv"), curve.to_csv(out.precision)),
    };
    written.push(write_file(&out.out_dir, &name, &contents)?);
    Ok(())
}

fn written_list(out: &OutputArgs, written: &[PathBuf]) -> String {
    match out.format {
        Format::Json => json(&written),
        _ => written
            .iter()
            .map(|p| format!("{}\n", p.display()))
            .collect(),
    }
}

fn sweep_x(a: &SurplusArgs) -> Result<String, CliError> {
    let params = a.params.resolve()?;
    let base = Solution::new(params)?;
    let barriers = if a.br_values.is_empty() {
        vec![params.b_r]
    } else {
        a.br_values.clone()
    };
    let grid = grid_for(&a.grid, a.x_max);
    // Compute everything before writing so bad input leaves no partial output.
    let curves = barriers
        .iter()
        .map(|&b_r| sweep_surplus(&base.with_payout_barrier(b_r)?, &grid))
        .collect::<Result<Vec<_>, _>>()?;
    let mut written = Vec::new();
    for (b_r, curve) in barriers.iter().zip(&curves) {
        curve_file(&a.output, &format!("surplus_br{b_r}"), curve, &mut written)?;
    }
    Ok(written_list(&a.output, &written))
}

fn sweep_br(a: &BarrierArgs) -> Result<String, CliError> {
    let base = Solution::new(a.params.resolve()?)?;
    let grid = grid_for(&a.grid, a.br_max);
    let curves =
        a.x.iter()
            .map(|&x| sweep_payout_barrier(&base, x, &grid))
            .collect::<Result<Vec<_>, _>>()?;
    let mut written = Vec::new();
    for (x, curve) in a.x.iter().zip(&curves) {
        curve_file(&a.output, &format!("barrier_x{x}"), curve, &mut written)?;
    }
    Ok(written_list(&a.output, &written))
}

/// Output of `simulate --format json`.
#[derive(Debug, Serialize)]
pub struct SimulateReport {
    pub strategy: StrategySpec,
    pub closed_form: f64,
    pub error: f64,
    pub estimate: SimEstimate,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<PathBuf>,
}

fn simulate(a: &SimulateArgs) -> Result<String, CliError> {
    let params = a.params.resolve()?;
    let sol = Solution::new(params)?;
    let spec = match a.strategy {
        StrategyChoice::Auto => {
            let mut spec = sol.optimal_strategy();
            if let Some(b) = a.barrier {
                spec.upper = b;
                spec.both_optimal = false;
            }
            spec
        }
        StrategyChoice::Upper => {
            StrategySpec::upper_barrier(a.barrier.unwrap_or(sol.barriers.b_effective_g))
        }
        StrategyChoice::Double => {
            StrategySpec::double_barrier(a.barrier.unwrap_or(sol.barriers.b_effective_h))
        }
    };
    let closed = match spec.kind {
        StrategyKind::UpperBarrier => {
            StrategyValue::Upper(UpperBarrierValue::new(sol.roots, spec.upper)?)
        }
        StrategyKind::DoubleBarrier => {
            StrategyValue::Double(DoubleBarrierValue::new(sol.roots, params.k, spec.upper)?)
        }
    };
    let closed_form = closed.value(a.x0)?;
    let cfg = if a.ruin_moments {
        if spec.kind != StrategyKind::UpperBarrier {
            return Err(CliError::Usage(
                "--ruin-moments needs an upper barrier strategy; double barrier paths are never ruined".into(),
            ));
        }
        SimConfig::for_ruin_times(
            a.dt,
            a.horizon.unwrap_or(DEFAULT_RUIN_HORIZON),
            a.paths,
            a.seed,
        )
    } else {
        let mut cfg = SimConfig::for_params(&params, a.dt, a.paths, a.seed);
        cfg.antithetic = !a.no_antithetic;
        if let Some(h) = a.horizon {
            cfg.horizon = h;
        }
        cfg
    };
    let estimate = simulate_strategy(&params, &spec, a.x0, &cfg)?;
    let trace = if a.trace {
        let rows = trace_path(&params, &spec, a.x0, &cfg, 0)?;
        let name = format!("trace_x{}_seed{}.csv", a.x0, a.seed);
        Some(write_file(&a.output.out_dir, &name, &trace_to_csv(&rows))?)
    } else {
        None
    };
    let report = SimulateReport {
        strategy: spec,
        closed_form,
        error: estimate.mean - closed_form,
        estimate,
        trace,
    };
    let n = Numbers::for_output(&a.output);
    let e = &report.estimate;
    let mut rows: Vec<(String, String)> = vec![
        ("strategy".into(), format!("{:?}", spec.kind)),
        ("barrier".into(), n.f(spec.upper)),
        ("x0".into(), n.f(e.x0)),
        ("dt".into(), n.f(e.dt)),
        ("paths".into(), e.n_paths.to_string()),
        ("mean".into(), n.f(e.mean)),
        ("stderr".into(), n.f(e.stderr)),
        ("closed_form".into(), n.f(report.closed_form)),
        ("error".into(), n.f(report.error)),
        ("ruin_fraction".into(), n.f(e.ruin_fraction)),
        ("disc_dividends".into(), n.f(e.mean_disc_dividends)),
        ("disc_injections".into(), n.f(e.mean_disc_injections)),
    ];
    if let Some(m) = &e.ruin_time_moments {
        for mo in &m.moments {
            rows.push((format!("E[tau^{}]", mo.order), n.f(mo.mean)));
            rows.push((format!("E[tau^{}]_stderr", mo.order), n.f(mo.stderr)));
        }
        rows.push(("censored_fraction".into(), n.f(m.censored_fraction)));
        rows.push(("moments_reliable".into(), m.reliable.to_string()));
    }
    if let Some(t) = &report.trace {
        rows.push(("trace".into(), t.display().to_string()));
    }
    Ok(match a.output.format {
        Format::Json => json(&report),
        Format::Csv => {
            let mut out = String::from("quantity,value\n");
            for (k, v) in &rows {
                let _ = writeln!(out, "{k},{v}");
            }
            out
        }
        Format::Text => rows.iter().map(|(k, v)| format!("{k:<20}{v}\n")).collect(),
    })
}

/// Summary of `verify --samples N`.
#[derive(Debug, Serialize)]
pub struct SampleSummary {
    pub seed: u64,
    pub cases: usize,
    pub failed: usize,
    pub worst_ode_residual: f64,
    pub worst_boundary_error: f64,
    /// Parameters of the first few failing cases.
    pub failures: Vec<ModelParams>,
}

/// Output of `verify --format json`.
#[derive(Debug, Serialize)]
pub struct VerifyOutput {
    pub params: ModelParams,
    pub report: VerificationReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sampled: Option<SampleSummary>,
    pub passed: bool,
}

fn verify(a: &VerifyArgs) -> Result<(String, bool), CliError> {
    let sol = Solution::new(a.params.resolve()?)?;
    let config = VerifyConfig::default();
    let report = verify_solution(&sol, &config)?;
    let sampled = if a.samples > 0 {
        let mut s = SampleSummary {
            seed: a.seed,
            cases: 0,
            failed: 0,
            worst_ode_residual: 0.0,
            worst_boundary_error: 0.0,
            failures: Vec::new(),
        };
        for case in sample_cases(a.seed, a.samples)? {
            let r = verify_solution(&case, &config)?;
            s.cases += 1;
            s.worst_ode_residual = s
                .worst_ode_residual
                .max(r.max_ode_residual)
                .max(r.max_linear_residual);
            s.worst_boundary_error = r
                .boundary_errors
                .values()
                .fold(s.worst_boundary_error, |m, &e| m.max(e));
            if !r.passed {
                s.failed += 1;
                if s.failures.len() < 5 {
                    s.failures.push(case.params);
                }
            }
        }
        Some(s)
    } else {
        None
    };
    let passed = report.passed && sampled.as_ref().is_none_or(|s| s.failed == 0);
    let output = VerifyOutput {
        params: sol.params,
        report,
        sampled,
        passed,
    };
    let text = match a.output.format {
        Format::Json => json(&output),
        Format::Csv | Format::Text => verify_table(&output, &a.output),
    };
    Ok((text, passed))
}

fn verify_table(o: &VerifyOutput, out: &OutputArgs) -> String {
    let n = Numbers::for_output(out);
    let r = &o.report;
    let t = &r.tolerances;
    let verdict = |ok: bool| if ok { "pass" } else { "FAIL" };
    let mut rows: Vec<[String; 4]> = vec![
        [
            "ODE residual".into(),
            n.f(r.max_ode_residual),
            n.f(t.ode_residual),
            verdict(r.max_ode_residual <= t.ode_residual).into(),
        ],
        [
            "linear branch residual".into(),
            n.f(r.max_linear_residual),
            n.f(t.ode_residual),
            verdict(r.max_linear_residual <= t.ode_residual).into(),
        ],
    ];
    for (name, &e) in &r.boundary_errors {
        rows.push([
            name.clone(),
            n.f(e),
            n.f(t.boundary),
            verdict(e <= t.boundary).into(),
        ]);
    }
    rows.push([
        "inequality violations".into(),
        r.inequality_violations.len().to_string(),
        n.f(t.inequality_slack),
        verdict(r.inequality_violations.is_empty()).into(),
    ]);
    for (name, changes) in &r.curvature_sign_changes {
        let at: Vec<String> = changes.iter().map(|&c| n.f(c)).collect();
        rows.push([
            format!("{name}'' sign changes"),
            format!("[{}]", at.join(" ")),
            String::new(),
            String::new(),
        ]);
    }
    if let Some(s) = &o.sampled {
        rows.push([
            format!("sampled cases (seed {})", s.seed),
            format!("{} of {} failed", s.failed, s.cases),
            String::new(),
            verdict(s.failed == 0).into(),
        ]);
    }
    rows.push([
        "overall".into(),
        String::new(),
        String::new(),
        verdict(o.passed).into(),
    ]);
    let mut text = String::new();
    if out.format == Format::Csv {
        text.push_str("check,value,limit,result\n");
        for row in &rows {
            let _ = writeln!(text, "{}", row.join(","));
        }
        return text;
    }
    for v in &r.inequality_violations {
        rows.push([
            format!("  {} at x = {}", v.condition, n.f(v.x)),
            n.f(v.magnitude),
            String::new(),
            String::new(),
        ]);
    }
    let width = rows.iter().map(|r| r[0].len()).max().unwrap_or(0);
    let _ = writeln!(
        text,
        "{:<width$}  {:>14}  {:>10}  result",
        "check", "value", "limit"
    );
    for [a, b, c, d] in &rows {
        let _ = writeln!(text, "{a:<width$}  {b:>14}  {c:>10}  {d}");
    }
    text
}
