//! Behavioral simulator and design calculator for a dual-sensor heat alarm.
//!
//! The crate models the complete signal chain of a temperature-supervision
//! circuit: mains rectification and smoothing, two absolute-temperature
//! sensors, subtractor stages, threshold comparators with optional
//! hysteresis, a 555 timer gated by the alarm, and the alarm/load-enable
//! logic. A line-oriented scenario format drives fixed-step transient runs;
//! results come back as uniformly sampled multi-channel traces with
//! alarm-interval reports.
//!
//! Module map:
//! - [`units`]: quantity newtypes, temperature conversions, the trace type
//! - [`design`]: closed-form sizing equations and the astable oracle
//! - [`blocks`]: stateless transfer functions for rail, sensors, comparators
//! - [`timer`]: the stateful 555 model (astable, monostable, bistable)
//! - [`engine`]: the wired dual-sensor system and transient runner
//! - [`scenario`]: scenario parsing/rendering and trace export

pub mod blocks;
pub mod design;
pub mod engine;
pub mod scenario;
pub mod timer;
pub mod units;

pub use blocks::{ComparatorParams, RailParams, SensorParams};
pub use engine::{
    alarm_intervals, measure_frequency, run_transient, run_transient_with, sweep_preset,
    AlarmReport, CircuitSystem, RunConfig, TemperatureProfile,
};
pub use scenario::{parse_scenario, render_scenario, write_trace, ScenarioDoc};
pub use timer::{Timer555Config, Timer555State, TimerInputs, TimerMode};
pub use units::{
    Capacitance, Current, Duration, Frequency, LogicLevel, Resistance, TemperatureC, TemperatureK,
    Trace, Voltage,
};
