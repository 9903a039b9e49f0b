//! Built-in verification suite: replays the worked sizing arithmetic and
//! the documented block behaviors, printing one pass/fail line per check.

use heatmon_core::blocks::{comparator_out, lm335_voltage, ComparatorParams, SensorParams};
use heatmon_core::design;
use heatmon_core::timer::{timer_step, Timer555Config, Timer555State, TimerInputs, TimerMode};
use heatmon_core::units::{
    Capacitance, Current, Duration, Frequency, LogicLevel, Resistance, TemperatureK, Voltage,
};
use std::io::Write;

struct Check {
    name: &'static str,
    got: f64,
    expected: f64,
    tolerance: f64,
}

impl Check {
    fn passed(&self) -> bool {
        (self.got - self.expected).abs() <= self.tolerance
    }
}

pub fn run_selftest(out: &mut dyn Write) -> i32 {
    let mut checks: Vec<Check> = Vec::new();

    let v_pk = design::peak_voltage(Voltage::new(12.0)).unwrap();
    checks.push(Check {
        name: "peak voltage of 12 V rms",
        got: v_pk.value(),
        expected: 16.97,
        tolerance: 0.01,
    });

    let v_ripple = design::ripple_voltage(v_pk, 0.07).unwrap();
    checks.push(Check {
        name: "7% ripple voltage",
        got: v_ripple.value(),
        expected: 1.1879,
        tolerance: 0.0005,
    });

    let c = design::smoothing_capacitor(Current::new(0.2), Frequency::new(50.0), v_ripple)
        .unwrap();
    checks.push(Check {
        name: "smoothing capacitor (uF)",
        got: c.value() * 1e6,
        expected: 1683.6,
        tolerance: 1.0,
    });

    let standard = design::nearest_standard_capacitor(c).unwrap();
    checks.push(Check {
        name: "standard capacitor pick (uF)",
        got: standard.value() * 1e6,
        expected: 2200.0,
        tolerance: 1e-9,
    });

    let r_led =
        design::led_series_resistor(Voltage::new(5.0), Voltage::new(2.7), Current::new(0.0032))
            .unwrap();
    checks.push(Check {
        name: "LED series resistor",
        got: r_led.value(),
        expected: 718.75,
        tolerance: 1e-9,
    });

    let t_on = design::astable_t_on(
        Resistance::new(68e3),
        Resistance::new(68e3),
        Capacitance::new(1e-6),
    )
    .unwrap();
    checks.push(Check {
        name: "astable T_ON",
        got: t_on.value(),
        expected: 0.0952,
        tolerance: 1e-4,
    });

    let t_off = design::astable_t_off(Resistance::new(8.2e3), Capacitance::new(47e-6)).unwrap();
    checks.push(Check {
        name: "astable T_OFF",
        got: t_off.value(),
        expected: 0.26978,
        tolerance: 5e-5,
    });

    let (_, f) = design::astable_period_and_frequency(t_on, t_off).unwrap();
    checks.push(Check {
        name: "astable frequency",
        got: f.value(),
        expected: 2.74,
        tolerance: 0.01,
    });

    let sensor = SensorParams::default();
    let v_sensor = lm335_voltage(TemperatureK::new(298.2), &sensor).unwrap();
    checks.push(Check {
        name: "sensor voltage at 298.2 K",
        got: v_sensor.value(),
        expected: 2.982,
        tolerance: 1e-12,
    });

    let comp = ComparatorParams::default();
    let below = comparator_out(Voltage::new(0.200), LogicLevel::Low, &comp);
    let at = comparator_out(Voltage::new(0.300), LogicLevel::Low, &comp);
    checks.push(Check {
        name: "comparator below/at threshold",
        got: below.as_sample() + 10.0 * at.as_sample(),
        expected: 10.0,
        tolerance: 0.0,
    });

    let cfg = Timer555Config::default();
    let held = Timer555State {
        v_cap: Voltage::new(2.0),
        output: LogicLevel::High,
        discharging: false,
    };
    let reset = TimerInputs {
        trigger: cfg.vs,
        reset: Voltage::new(0.0),
        enable: true,
    };
    let forced = timer_step(&held, &reset, &cfg, Duration::new(1e-3)).unwrap();
    checks.push(Check {
        name: "reset forces output low",
        got: forced.output.as_sample() + forced.v_cap.value(),
        expected: 0.0,
        tolerance: 0.0,
    });

    let bistable = Timer555Config {
        mode: TimerMode::Bistable,
        ..cfg
    };
    let fire = TimerInputs {
        trigger: Voltage::new(1.0),
        reset: bistable.vs,
        enable: true,
    };
    let set = timer_step(&Timer555State::reset(), &fire, &bistable, Duration::new(1e-3)).unwrap();
    checks.push(Check {
        name: "bistable trigger sets high",
        got: set.output.as_sample(),
        expected: 1.0,
        tolerance: 0.0,
    });

    let mut failures = 0usize;
    for check in &checks {
        let verdict = if check.passed() {
            "PASS"
        } else {
            failures += 1;
            "FAIL"
        };
        let _ = writeln!(
            out,
            "{verdict}  {:<34} got {:>13.6}  expected {:>12.6} +/- {}",
            check.name, check.got, check.expected, check.tolerance
        );
    }
    let _ = writeln!(
        out,
        "{} of {} checks passed",
        checks.len() - failures,
        checks.len()
    );
    if failures == 0 {
        0
    } else {
        1
    }
}
