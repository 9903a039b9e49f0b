//! Python bindings exposing the design equations, scenario handling, and
//! the transient engine.
//!
//! Design functions take and return plain floats in SI units. Scenario and
//! trace handling go through the `Scenario` and `Trace` classes:
//!
//! ```text
//! import heatmon_py as hm
//! doc = hm.Scenario.parse(open("demo.scn").read())
//! trace = doc.simulate()
//! for start, end in hm.alarm_intervals(trace):
//!     print(start, end)
//! ```

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use heatmon_core::engine;
use heatmon_core::scenario;
use heatmon_core::units::{
    Capacitance, Current, Duration, Frequency, Resistance, TemperatureC, Voltage,
};
use heatmon_core::design as core_design;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Peak of a sine with the given RMS voltage.
#[pyfunction]
fn peak_voltage(vs_rms: f64) -> PyResult<f64> {
    Ok(core_design::peak_voltage(Voltage::new(vs_rms))
        .map_err(value_err)?
        .value())
}

/// Ripple amplitude as a fraction of the peak voltage.
#[pyfunction]
fn ripple_voltage(v_pk: f64, fraction: f64) -> PyResult<f64> {
    Ok(core_design::ripple_voltage(Voltage::new(v_pk), fraction)
        .map_err(value_err)?
        .value())
}

/// Reservoir capacitor in farads: I / (2 f Vr).
#[pyfunction]
fn smoothing_capacitor(i_load: f64, mains_freq: f64, v_ripple: f64) -> PyResult<f64> {
    Ok(core_design::smoothing_capacitor(
        Current::new(i_load),
        Frequency::new(mains_freq),
        Voltage::new(v_ripple),
    )
    .map_err(value_err)?
    .value())
}

/// Smallest E6 preferred capacitor at or above `c`.
#[pyfunction]
fn nearest_standard_capacitor(c: f64) -> PyResult<f64> {
    Ok(core_design::nearest_standard_capacitor(Capacitance::new(c))
        .map_err(value_err)?
        .value())
}

/// LED series resistor in ohms.
#[pyfunction]
fn led_series_resistor(v_supply: f64, v_led: f64, i_led: f64) -> PyResult<f64> {
    Ok(core_design::led_series_resistor(
        Voltage::new(v_supply),
        Voltage::new(v_led),
        Current::new(i_led),
    )
    .map_err(value_err)?
    .value())
}

/// Handbook astable high time: 0.7 (R1 + R2) C2.
#[pyfunction]
fn astable_t_on(r1: f64, r2: f64, c2: f64) -> PyResult<f64> {
    Ok(core_design::astable_t_on(
        Resistance::new(r1),
        Resistance::new(r2),
        Capacitance::new(c2),
    )
    .map_err(value_err)?
    .value())
}

/// Handbook astable low time: 0.7 R3 C3.
#[pyfunction]
fn astable_t_off(r3: f64, c3: f64) -> PyResult<f64> {
    Ok(core_design::astable_t_off(Resistance::new(r3), Capacitance::new(c3))
        .map_err(value_err)?
        .value())
}

/// Returns `(period, frequency)` from the two half-periods.
#[pyfunction]
fn astable_period_and_frequency(t_on: f64, t_off: f64) -> PyResult<(f64, f64)> {
    let (t, f) =
        core_design::astable_period_and_frequency(Duration::new(t_on), Duration::new(t_off))
            .map_err(value_err)?;
    Ok((t.value(), f.value()))
}

/// Exponential astable model: `(t_high, t_low, frequency)`.
#[pyfunction]
fn standard_astable_period(r1: f64, r2: f64, c: f64) -> PyResult<(f64, f64, f64)> {
    let (th, tl, f) = core_design::standard_astable_period(
        Resistance::new(r1),
        Resistance::new(r2),
        Capacitance::new(c),
    )
    .map_err(value_err)?;
    Ok((th.value(), tl.value(), f.value()))
}

/// A simulated multi-channel waveform record.
#[pyclass]
struct Trace {
    inner: heatmon_core::units::Trace,
}

#[pymethods]
impl Trace {
    /// Sample step in seconds.
    #[getter]
    fn dt(&self) -> f64 {
        self.inner.dt().value()
    }

    /// Number of samples per channel.
    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// Channel names in trace order.
    fn channels(&self) -> Vec<String> {
        self.inner
            .channels()
            .iter()
            .map(|c| c.name.clone())
            .collect()
    }

    /// Samples of one channel.
    fn samples(&self, name: &str) -> PyResult<Vec<f64>> {
        Ok(self.inner.channel(name).map_err(value_err)?.to_vec())
    }

    /// Sample timestamps in seconds.
    fn times(&self) -> Vec<f64> {
        (0..self.inner.len())
            .map(|k| self.inner.time_at(k).value())
            .collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Trace(channels={}, samples={}, dt={})",
            self.inner.channels().len(),
            self.inner.len(),
            self.inner.dt().value()
        )
    }
}

/// A parsed scenario: circuit parameters, stimuli, and run settings.
#[pyclass]
struct Scenario {
    doc: scenario::ScenarioDoc,
}

#[pymethods]
impl Scenario {
    /// Parse scenario text. Raises ValueError with a line number on bad input.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(Self {
            doc: scenario::parse_scenario(text).map_err(value_err)?,
        })
    }

    /// A scenario with every value at its default.
    #[staticmethod]
    fn defaults() -> Self {
        Self {
            doc: scenario::ScenarioDoc::default(),
        }
    }

    /// Canonical text form; `parse(render())` round-trips exactly.
    fn render(&self) -> String {
        scenario::render_scenario(&self.doc)
    }

    /// Run the transient described by this scenario.
    fn simulate(&self) -> PyResult<Trace> {
        let (sys, profiles, run) = self.doc.to_system().map_err(value_err)?;
        let trace =
            engine::run_transient_with(&sys, &profiles, &run).map_err(value_err)?;
        Ok(Trace { inner: trace })
    }

    fn __repr__(&self) -> String {
        format!(
            "Scenario(dt={}, t_end={}, presets=({}, {}))",
            self.doc.run.dt.value(),
            self.doc.run.t_end.value(),
            self.doc.presets[0].value(),
            self.doc.presets[1].value()
        )
    }
}

/// Maximal alarm-on intervals as `(start, end)` second pairs.
#[pyfunction]
fn alarm_intervals(trace: &Trace) -> PyResult<Vec<(f64, f64)>> {
    let report = engine::alarm_intervals(&trace.inner).map_err(value_err)?;
    Ok(report
        .intervals
        .iter()
        .map(|(a, b)| (a.value(), b.value()))
        .collect())
}

/// Per-sensor trigger flags `(sensor1, sensor2)`.
#[pyfunction]
fn triggered(trace: &Trace) -> PyResult<(bool, bool)> {
    let report = engine::alarm_intervals(&trace.inner).map_err(value_err)?;
    Ok((report.triggered[0], report.triggered[1]))
}

/// Frequency of a logic channel between `t_start` and `t_end`.
#[pyfunction]
fn measure_frequency(trace: &Trace, channel: &str, t_start: f64, t_end: f64) -> PyResult<f64> {
    Ok(engine::measure_frequency(
        &trace.inner,
        channel,
        (Duration::new(t_start), Duration::new(t_end)),
    )
    .map_err(value_err)?
    .value())
}

/// First-alarm time per preset, or None where the alarm never fires.
/// Uses the scenario's profile.1 on both channels.
#[pyfunction]
fn sweep_preset(doc: &Scenario, presets: Vec<f64>) -> PyResult<Vec<(f64, Option<f64>)>> {
    let (sys, profiles, run) = doc.doc.to_system().map_err(value_err)?;
    let presets: Vec<TemperatureC> = presets.into_iter().map(TemperatureC::new).collect();
    let rows = engine::sweep_preset(&sys, &profiles[0], &presets, run.dt, run.t_end)
        .map_err(value_err)?;
    Ok(rows
        .into_iter()
        .map(|(p, t)| (p.value(), t.map(|d| d.value())))
        .collect())
}

#[pymodule]
fn heatmon_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<Scenario>()?;
    m.add_class::<Trace>()?;
    m.add_function(wrap_pyfunction!(peak_voltage, m)?)?;
    m.add_function(wrap_pyfunction!(ripple_voltage, m)?)?;
    m.add_function(wrap_pyfunction!(smoothing_capacitor, m)?)?;
    m.add_function(wrap_pyfunction!(nearest_standard_capacitor, m)?)?;
    m.add_function(wrap_pyfunction!(led_series_resistor, m)?)?;
    m.add_function(wrap_pyfunction!(astable_t_on, m)?)?;
    m.add_function(wrap_pyfunction!(astable_t_off, m)?)?;
    m.add_function(wrap_pyfunction!(astable_period_and_frequency, m)?)?;
    m.add_function(wrap_pyfunction!(standard_astable_period, m)?)?;
    m.add_function(wrap_pyfunction!(alarm_intervals, m)?)?;
    m.add_function(wrap_pyfunction!(triggered, m)?)?;
    m.add_function(wrap_pyfunction!(measure_frequency, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_preset, m)?)?;
    Ok(())
}
