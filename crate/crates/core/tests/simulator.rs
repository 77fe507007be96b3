use divcap_core::sim::{
    coupled_unit_payoffs, estimate_ruin_moments, simulate_levels, simulate_strategy, trace_path,
    trace_to_csv, HalvingPlan, HalvingStudy, SimConfig,
};
use divcap_core::{Error, ModelParams, Solution, StrategyKind, StrategySpec};

fn reference(b_r: f64) -> ModelParams {
    ModelParams::reference(b_r).unwrap()
}

fn quick(params: &ModelParams, paths: usize, seed: u64) -> SimConfig {
    SimConfig::for_params(params, 0.02, paths, seed)
}

#[test]
fn same_seed_same_estimate() {
    let p = reference(0.0);
    let spec = StrategySpec::double_barrier(0.17);
    let a = simulate_strategy(&p, &spec, 0.5, &quick(&p, 400, 3)).unwrap();
    let b = simulate_strategy(&p, &spec, 0.5, &quick(&p, 400, 3)).unwrap();
    let c = simulate_strategy(&p, &spec, 0.5, &quick(&p, 400, 4)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.mean, c.mean);
}

#[test]
fn thread_count_does_not_change_results() {
    let p = reference(1.4);
    let spec = StrategySpec::upper_barrier(1.4);
    let cfg = quick(&p, 600, 21);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| simulate_strategy(&p, &spec, 1.0, &cfg).unwrap())
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn surplus_above_barrier_is_paid_at_once() {
    let p = reference(0.0);
    for spec in [
        StrategySpec::double_barrier(0.6),
        StrategySpec::upper_barrier(0.6),
    ] {
        let cfg = quick(&p, 200, 8);
        let at = simulate_strategy(&p, &spec, 0.6, &cfg).unwrap();
        let above = simulate_strategy(&p, &spec, 5.6, &cfg).unwrap();
        assert!((above.mean - at.mean - 5.0).abs() < 1e-12);
        assert!((above.stderr - at.stderr).abs() < 1e-12);
    }
}

#[test]
fn upper_barrier_from_zero_is_ruined_at_once() {
    let p = reference(0.0);
    let est = simulate_strategy(
        &p,
        &StrategySpec::upper_barrier(0.75),
        0.0,
        &quick(&p, 100, 1),
    )
    .unwrap();
    assert_eq!(est.mean, 0.0);
    assert_eq!(est.ruin_fraction, 1.0);
}

#[test]
fn double_barrier_never_ruins() {
    let p = reference(0.0);
    let est = simulate_strategy(
        &p,
        &StrategySpec::double_barrier(0.17),
        0.0,
        &quick(&p, 400, 2),
    )
    .unwrap();
    assert_eq!(est.ruin_fraction, 0.0);
    assert!(est.ruin_time_moments.is_none());
    assert!(est.mean_disc_injections > 0.0);
}

#[test]
fn traces_respect_the_barriers() {
    let p = reference(0.0);
    let b = 0.4;
    let cfg = quick(&p, 2, 5);
    let rows = trace_path(&p, &StrategySpec::double_barrier(b), 0.2, &cfg, 0).unwrap();
    assert_eq!(rows.len(), cfg.steps() + 1);
    let mut paid = 0;
    let mut injected = 0;
    for r in &rows {
        assert!((0.0..=b).contains(&r.x));
        if r.dividend > 0.0 {
            assert_eq!(r.x, b);
            paid += 1;
        }
        if r.injection > 0.0 {
            assert_eq!(r.x, 0.0);
            injected += 1;
        }
        assert!(r.dividend == 0.0 || r.injection == 0.0);
    }
    assert!(paid > 0 && injected > 0);

    let rows = trace_path(&p, &StrategySpec::upper_barrier(b), 0.2, &cfg, 0).unwrap();
    let last = rows.last().unwrap();
    assert!(last.x < 0.0, "path should end at ruin");
    for r in &rows {
        assert_eq!(r.injection, 0.0);
        assert!(r.x <= b);
        if r.dividend > 0.0 {
            assert_eq!(r.x, b);
        }
    }
    let csv = trace_to_csv(&rows);
    assert!(csv.starts_with("t,x,dD,dC\n"));
    assert_eq!(csv.lines().count(), rows.len() + 1);
}

#[test]
fn small_volatility_approaches_the_deterministic_value() {
    let p = ModelParams::from_variance(0.04, 1e-4, 0.05, 1.01, 0.0).unwrap();
    let sol = Solution::new(p).unwrap();
    let spec = sol.optimal_strategy();
    let exact = sol.value(1.0).unwrap();
    // Paying the surplus at once and the drift thereafter.
    assert!((exact - (1.0 + 0.04 / 0.05)).abs() < 0.02);
    let est = simulate_strategy(&p, &spec, 1.0, &SimConfig::for_params(&p, 0.01, 200, 6)).unwrap();
    assert!(
        (est.mean - exact).abs() < 3.0 * est.stderr + 0.01,
        "{} vs {exact}",
        est.mean
    );
}

#[test]
fn ruin_moments_at_long_horizon() {
    let p = reference(2.4);
    let spec = StrategySpec::upper_barrier(2.4);
    let cfg = SimConfig::for_ruin_times(0.01, 2000.0, 1000, 12);
    let low = estimate_ruin_moments(&p, &spec, 0.5, &cfg).unwrap();
    let high = estimate_ruin_moments(&p, &spec, 1.5, &cfg).unwrap();
    for m in [&low, &high] {
        assert!(m.reliable);
        assert!(m.censored_fraction < 0.01);
        assert_eq!(m.moments.len(), 4);
        assert!(m.moments.iter().all(|e| e.mean.is_finite() && e.mean > 0.0));
    }
    // Common random numbers: a higher start survives at least as long on every path.
    assert!(high.moments[0].mean >= low.moments[0].mean);
}

#[test]
fn short_horizon_flags_censoring() {
    let p = reference(2.4);
    let cfg = SimConfig::for_ruin_times(0.01, 5.0, 400, 12);
    let m = estimate_ruin_moments(&p, &StrategySpec::upper_barrier(2.4), 1.5, &cfg).unwrap();
    assert!(!m.reliable);
    assert!(m.censored_fraction > 0.01);
}

#[test]
fn ruin_moments_need_an_upper_barrier() {
    let p = reference(0.0);
    let cfg = SimConfig::for_ruin_times(0.01, 100.0, 10, 1);
    let err = estimate_ruin_moments(&p, &StrategySpec::double_barrier(0.5), 0.5, &cfg).unwrap_err();
    assert!(matches!(err, Error::Mode { .. }));
}

#[test]
fn invalid_runs_are_rejected() {
    let p = reference(1.0);
    let cfg = quick(&p, 10, 1);
    let spec = StrategySpec::upper_barrier(1.0);
    let no_paths = SimConfig { n_paths: 0, ..cfg };
    assert!(matches!(
        simulate_strategy(&p, &spec, 0.5, &no_paths),
        Err(Error::Config(_))
    ));
    assert!(matches!(
        simulate_strategy(&p, &StrategySpec::upper_barrier(0.5), 0.5, &cfg),
        Err(Error::Config(_))
    ));
    assert!(matches!(
        simulate_strategy(&p, &spec, -0.1, &cfg),
        Err(Error::NegativeSurplus(_))
    ));
    assert!(simulate_levels(&p, &spec, 0.5, &cfg, 0).is_err());
    assert!(simulate_levels(&p, &spec, 0.5, &cfg, 5).is_err());
}

#[test]
fn finest_level_of_a_coupled_run_is_the_plain_run() {
    let p = reference(1.4);
    let spec = StrategySpec::double_barrier(1.4);
    let cfg = quick(&p, 200, 17);
    let plain = simulate_strategy(&p, &spec, 1.0, &cfg).unwrap();
    let levels = simulate_levels(&p, &spec, 1.0, &cfg, 3).unwrap();
    assert_eq!(levels.len(), 3);
    assert_eq!(levels[0], plain);
    assert_eq!(levels[1].dt, 0.04);
    assert_eq!(levels[2].dt, 0.08);
}

#[test]
fn unit_slices_concatenate() {
    let p = reference(0.0);
    let spec = StrategySpec::double_barrier(0.17);
    let cfg = quick(&p, 120, 4);
    let whole = coupled_unit_payoffs(&p, &spec, 0.5, &cfg, 2, 0..60).unwrap();
    let head = coupled_unit_payoffs(&p, &spec, 0.5, &cfg, 2, 0..25).unwrap();
    let tail = coupled_unit_payoffs(&p, &spec, 0.5, &cfg, 2, 25..60).unwrap();
    for l in 0..2 {
        let joined: Vec<f64> = head[l].iter().chain(&tail[l]).copied().collect();
        assert_eq!(joined, whole[l]);
    }
}

#[test]
fn halving_study_sees_the_reflection_bias() {
    let p = reference(0.0);
    let sol = Solution::new(p).unwrap();
    let spec = sol.optimal_strategy();
    assert_eq!(spec.kind, StrategyKind::DoubleBarrier);
    let exact = sol.value(0.5).unwrap();
    let cfg = SimConfig::for_params(&p, 0.01, 0, 3);
    let plan = HalvingPlan::fixed(1000);
    let study = HalvingStudy::run(&p, &spec, 0.5, &cfg, 3, exact, &plan).unwrap();
    assert_eq!(study.n_paths, 1000);
    assert_eq!(study.levels.len(), 3);
    assert_eq!(study.increments.len(), 2);
    // Projection onto [0, b] overpays dividends, more so on coarser grids.
    assert!(study.levels.iter().all(|l| l.error > 0.0));
    assert!(study.increments.iter().all(|i| i.mean > 0.0));
    assert!(study.fitted_c > 0.0);
    assert!(HalvingStudy::run(&p, &spec, 0.5, &cfg, 1, exact, &plan).is_err());
}

#[test]
fn halving_study_doubles_up_to_the_cap() {
    let p = reference(0.0);
    let sol = Solution::new(p).unwrap();
    let cfg = SimConfig::for_params(&p, 0.01, 0, 3);
    let exact = sol.value(0.5).unwrap();
    let run = |resolution| {
        let plan = HalvingPlan {
            initial_paths: 100,
            max_paths: 700,
            resolution,
        };
        HalvingStudy::run(&p, &sol.optimal_strategy(), 0.5, &cfg, 3, exact, &plan).unwrap()
    };
    let sharp = run(8.0);
    assert!(sharp.resolved);
    assert_eq!(sharp.n_paths, 100);
    let never = run(f64::INFINITY);
    assert!(!never.resolved);
    assert_eq!(never.n_paths, 700);
    // Growing the sample reuses the first units.
    let plan = HalvingPlan::fixed(700);
    let once = HalvingStudy::run(&p, &sol.optimal_strategy(), 0.5, &cfg, 3, exact, &plan).unwrap();
    assert_eq!(once.levels, never.levels);
    assert_eq!(once.increments, never.increments);
}

#[test]
fn payout_barrier_is_respected_and_flows_accumulate() {
    let p = reference(1.4);
    let cfg = quick(&p, 2, 31);
    for spec in [
        StrategySpec::double_barrier(1.6),
        StrategySpec::upper_barrier(1.6),
    ] {
        let rows = trace_path(&p, &spec, 1.0, &cfg, 1).unwrap();
        for r in &rows {
            assert!(r.dividend >= 0.0 && r.injection >= 0.0);
            if r.dividend > 0.0 {
                assert!(r.x >= p.b_r, "dividend paid at {}", r.x);
            }
        }
    }
}

#[test]
fn strategy_ranking_flips_at_b_hat() {
    let base = Solution::new(reference(0.0)).unwrap();
    let bh = base.barriers.b_hat.unwrap();
    for (b_r, double_wins) in [(bh - 0.2, true), (bh + 0.3, false)] {
        let p = reference(b_r);
        let cfg = SimConfig::for_params(&p, 0.01, 4000, 13);
        let double = simulate_strategy(&p, &StrategySpec::double_barrier(b_r), 0.0, &cfg).unwrap();
        let upper = simulate_strategy(&p, &StrategySpec::upper_barrier(b_r), 0.0, &cfg).unwrap();
        assert_eq!(upper.mean, 0.0);
        assert!(double.mean.abs() > 3.0 * double.stderr);
        assert_eq!(
            double.mean > upper.mean,
            double_wins,
            "b_r {b_r}: {}",
            double.mean
        );
    }
}
