//! Cross-module behavior: the dynamic timer against the closed-form
//! oracle, and the full scenario-to-trace pipeline.

use heatmon_core::design::standard_astable_period;
use heatmon_core::engine::measure_frequency;
use heatmon_core::scenario::{parse_scenario, write_trace};
use heatmon_core::timer::{simulate_timer_free_run, Timer555Config};
use heatmon_core::units::{Capacitance, Duration, Resistance};

#[test]
fn free_run_tracks_oracle_for_a_faster_network() {
    let cfg = Timer555Config {
        r1: Resistance::new(10e3),
        r2: Resistance::new(10e3),
        c: Capacitance::new(1e-6),
        ..Timer555Config::default()
    };
    let (_, _, oracle) = standard_astable_period(cfg.r1, cfg.r2, cfg.c).unwrap();
    let dt = Duration::new(cfg.r2.value() * cfg.c.value() / 100.0);
    let trace = simulate_timer_free_run(&cfg, Duration::new(0.6), dt).unwrap();
    let f = measure_frequency(&trace, "output", (Duration::new(0.1), Duration::new(0.6)))
        .unwrap();
    assert!((f.value() - 48.0898).abs() < 0.05, "measured {}", f.value());
    assert!(
        (f.value() - oracle.value()).abs() / oracle.value() < 0.01,
        "measured {} vs oracle {}",
        f.value(),
        oracle.value()
    );
}

#[test]
fn frequency_error_never_grows_as_dt_halves() {
    let cfg = Timer555Config::default();
    let (_, _, oracle) = standard_astable_period(cfg.r1, cfg.r2, cfg.c).unwrap();
    let tau_min = cfg.r2.value() * cfg.c.value();
    let mut previous = f64::INFINITY;
    for divisor in [25.0, 50.0, 100.0, 200.0] {
        let dt = Duration::new(tau_min / divisor);
        let trace = simulate_timer_free_run(&cfg, Duration::new(4.0), dt).unwrap();
        let f = measure_frequency(&trace, "output", (Duration::new(0.5), Duration::new(4.0)))
            .unwrap();
        let error = (f.value() - oracle.value()).abs();
        assert!(
            error <= previous,
            "error grew from {previous} to {error} at tau/{divisor}"
        );
        previous = error;
    }
}

#[test]
fn bundled_demo_scenario_runs_end_to_end() {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios/demo.scn");
    let text = std::fs::read_to_string(path).expect("bundled scenario readable");
    let doc = parse_scenario(&text).expect("bundled scenario parses");
    let (sys, profiles, run) = doc.to_system().unwrap();
    let trace = heatmon_core::engine::run_transient_with(&sys, &profiles, &run).unwrap();
    let report = heatmon_core::engine::alarm_intervals(&trace).unwrap();
    assert_eq!(report.intervals.len(), 1);
    assert_eq!(report.triggered, [true, false]);
    // Ramp 25 -> 38 over 4..6 s crosses the 30 degC preset at 4 + 10/13 s.
    let start = report.intervals[0].0.value();
    assert!((start - (4.0 + 10.0 / 13.0)).abs() <= run.dt.value() + 1e-12);

    let out = std::env::temp_dir().join("heatmon-core-system-demo.csv");
    write_trace(&trace, &out).unwrap();
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("time_s,rail,"));
    assert_eq!(csv.lines().count(), trace.len() + 1);
}
