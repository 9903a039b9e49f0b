#!/usr/bin/env python3
"""Smoke test for the heatmon_py extension module.

Builds nothing itself: run `cargo build -p heatmon-py` (or --release)
first. The script locates the compiled cdylib under target/, copies it
next to a temp directory under the import name, and exercises the main
surface end to end.
"""

import math
import pathlib
import shutil
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent


def import_heatmon_py():
    candidates = [
        ROOT / "target" / profile / name
        for profile in ("release", "debug")
        for name in ("libheatmon_py.so", "heatmon_py.so", "libheatmon_py.dylib")
    ]
    built = next((p for p in candidates if p.exists()), None)
    if built is None:
        sys.exit("build the extension first: cargo build -p heatmon-py")
    stage = pathlib.Path(tempfile.mkdtemp(prefix="heatmon-py-"))
    shutil.copy2(built, stage / "heatmon_py.so")
    sys.path.insert(0, str(stage))
    import heatmon_py

    return heatmon_py


def approx(a, b, tol=1e-9):
    assert abs(a - b) <= tol, f"{a} != {b} (tol {tol})"


def main():
    hm = import_heatmon_py()

    # Design equations.
    approx(hm.peak_voltage(12.0), 12.0 * math.sqrt(2.0))
    approx(hm.ripple_voltage(16.97, 0.07), 1.1879, 1e-4)
    approx(hm.smoothing_capacitor(0.2, 50.0, 1.1879) * 1e6, 1683.6, 0.1)
    approx(hm.nearest_standard_capacitor(1683.6e-6) * 1e6, 2200.0)
    approx(hm.led_series_resistor(5.0, 2.7, 0.0032), 718.75)
    approx(hm.astable_t_on(68e3, 68e3, 1e-6), 0.0952, 1e-4)
    approx(hm.astable_t_off(8.2e3, 47e-6), 0.26978, 5e-5)
    period, freq = hm.astable_period_and_frequency(0.0952, 0.26978)
    approx(period, 0.36498, 1e-6)
    approx(freq, 2.7399, 1e-3)
    t_high, t_low, f_std = hm.standard_astable_period(68e3, 68e3, 1e-6)
    approx(t_high / t_low, 2.0)
    approx(f_std, 7.07203, 1e-4)

    # Errors surface as ValueError.
    try:
        hm.smoothing_capacitor(0.2, 0.0, 1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("expected ValueError for zero frequency")

    # Scenario round trip.
    doc = hm.Scenario.defaults()
    text = doc.render()
    reparsed = hm.Scenario.parse(text)
    assert reparsed.render() == text

    try:
        hm.Scenario.parse("[run]\ndt = 1m\nt_end = 1\nbogus = 3\n")
    except ValueError as e:
        assert "line 4" in str(e), e
    else:
        raise AssertionError("expected ValueError for unknown key")

    # A ramp through the preset: alarm starts within one step of 4.769 s.
    scenario = (
        "[comparator.1]\npreset = 30\n\n"
        "[profile.1]\n0 25\n4 25\n6 38\n\n"
        "[profile.2]\n0 25\n\n"
        "[run]\nformat = 1\ndt = 1m\nt_end = 10\n"
    )
    trace = hm.Scenario.parse(scenario).simulate()
    assert len(trace) == 10001
    assert trace.channels()[0] == "rail"
    intervals = hm.alarm_intervals(trace)
    assert len(intervals) == 1, intervals
    start, end = intervals[0]
    crossing = 4.0 + 2.0 * (30.0 - 25.0) / 13.0
    assert abs(start - crossing) <= trace.dt + 1e-9, (start, crossing)
    assert end > 9.9
    assert hm.triggered(trace) == (True, False)

    # The timer beeps at the exponential-model rate while the alarm is on.
    beep = hm.measure_frequency(trace, "timer_out", 5.5, 10.0)
    assert abs(beep - f_std) / f_std < 0.01, beep

    # Sweep over presets on the same ramp.
    rows = hm.sweep_preset(hm.Scenario.parse(scenario), [26.0, 31.0, 99.0])
    assert rows[0][1] < rows[1][1]
    assert rows[2][1] is None

    print("heatmon_py smoke test: all checks passed")


if __name__ == "__main__":
    main()
