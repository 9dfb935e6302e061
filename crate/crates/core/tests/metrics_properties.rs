use nashseek::metrics::{aggregate, gamma_series, intervals, rate_fit};
use nashseek::scenario::load_scenario;
use nashseek::{LawKind, RunMetrics, Scenario64, TriggerEvent};
use proptest::prelude::*;

const DT: f64 = 0.025;

/// Random event logs: at most one event per (player, step), emitted in step
/// order as the engine does.
fn event_log() -> impl Strategy<Value = (usize, usize, Vec<TriggerEvent<f64>>)> {
    (1usize..6, 1usize..60).prop_flat_map(|(n, steps)| {
        proptest::collection::vec(any::<bool>(), n * steps).prop_map(move |mask| {
            let mut events = Vec::new();
            for s in 0..steps {
                for p in 0..n {
                    if mask[s * n + p] {
                        events.push(TriggerEvent {
                            t: s as f64 * DT,
                            step: s,
                            player: p,
                            rho: 0.0,
                            xi: None,
                        });
                    }
                }
            }
            (n, steps, events)
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn gamma_matches_direct_count((n, steps, events) in event_log()) {
        let g = gamma_series(&events, n, steps);
        prop_assert_eq!(g.len(), steps + 1);
        prop_assert_eq!(g[0], 0.0);
        for k in 1..=steps {
            let fired = events.iter().filter(|e| e.step < k).count();
            let want = fired as f64 / (n * k) as f64;
            prop_assert!((g[k] - want).abs() < 1e-15);
            prop_assert!((0.0..=1.0).contains(&g[k]));
        }
    }

    #[test]
    fn counts_and_intervals_agree((n, steps, events) in event_log()) {
        let gaps = intervals(&events, n);
        let times: Vec<f64> = (0..=steps).map(|k| k as f64 * DT).collect();
        let errs = vec![1.0; steps + 1];
        let m = RunMetrics::from_run(&events, n, steps, times, errs, (0.0, 10.0));
        for p in 0..n {
            let count = m.trigger_counts[p];
            if count > 0 {
                prop_assert_eq!(count, gaps[p].len() + 1);
            }
            prop_assert!(gaps[p].iter().all(|g| *g >= DT - 1e-12));
        }
    }

    #[test]
    fn rate_fit_recovers_exponent(rate in -3.0f64..3.0, scale in 0.1f64..10.0) {
        let times: Vec<f64> = (0..=400).map(|k| k as f64 * DT).collect();
        let errs: Vec<f64> = times.iter().map(|t| scale * (rate * t).exp()).collect();
        let fit = rate_fit(&times, &errs, (0.0, 10.0)).unwrap();
        prop_assert!((fit - rate).abs() < 1e-9);
    }
}

#[test]
fn single_run_aggregate_is_identity() {
    let s: Scenario64 =
        load_scenario(concat!(env!("CARGO_MANIFEST_DIR"), "/../../scenarios/spectrum5.json")).unwrap();
    let x_star = s.solve_ne().unwrap().x_star;
    let out = s.simulate(LawKind::Stochastic, 4, &x_star).unwrap();
    let e = aggregate(std::slice::from_ref(&out.metrics)).unwrap();
    assert_eq!(e.mean_gamma_series, out.metrics.gamma_series);
    assert_eq!(e.mean_err_series, out.metrics.err_series);
    for p in 0..5 {
        assert_eq!(e.mean_counts[p], out.metrics.trigger_counts[p] as f64);
        assert_eq!(e.interval_stats[p], out.metrics.interval_stats(p));
    }
}
