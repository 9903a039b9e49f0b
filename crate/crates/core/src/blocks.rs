//! Stateless behavioral models for the power rail, temperature sensors,
//! subtractor stage, preset mapping, and threshold comparators.
//!
//! All blocks are ideal piecewise models: the rectifier loses two diode
//! drops per conduction path, the filter recharges instantly and discharges
//! at constant load current, the regulator clamps between 0 and its
//! setpoint minus dropout, and the sensor is a perfect
//! voltage-proportional-to-absolute-temperature element.

use crate::units::{
    Capacitance, Current, Duration, Frequency, LogicLevel, TemperatureC, TemperatureK, Voltage,
};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum BlockError {
    #[error("kelvin temperature must not be negative, got {0} K")]
    NegativeKelvin(f64),
    #[error("preset {preset} degC maps to a negative threshold voltage {volts} V")]
    NegativeThreshold { preset: f64, volts: f64 },
}

/// Transformer, bridge rectifier, reservoir capacitor, and regulator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RailParams {
    pub vs_rms: Voltage,
    pub mains_freq: Frequency,
    /// Forward drop per conducting diode; a bridge has two in the path.
    pub diode_drop: Voltage,
    pub c_filter: Capacitance,
    pub i_load: Current,
    pub reg_setpoint: Voltage,
    pub reg_dropout: Voltage,
}

impl Default for RailParams {
    fn default() -> Self {
        Self {
            vs_rms: Voltage::new(12.0),
            mains_freq: Frequency::new(50.0),
            diode_drop: Voltage::new(0.7),
            c_filter: Capacitance::new(2200e-6),
            i_load: Current::new(0.2),
            reg_setpoint: Voltage::new(5.0),
            reg_dropout: Voltage::new(2.0),
        }
    }
}

/// Sensor gain and the reference subtracted to convert kelvin to Celsius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorParams {
    /// Volts per kelvin.
    pub gain: f64,
    /// Voltage applied at the subtractor's inverting input.
    pub v_ref_subtract: Voltage,
}

impl Default for SensorParams {
    fn default() -> Self {
        Self {
            gain: 0.010,
            v_ref_subtract: Voltage::new(2.7315),
        }
    }
}

/// Comparator reference and optional hysteresis band.
///
/// The output rises at `v_threshold` and falls at `v_threshold - hysteresis`.
/// Equality counts as High on both edges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparatorParams {
    pub v_threshold: Voltage,
    pub hysteresis: Voltage,
}

impl Default for ComparatorParams {
    fn default() -> Self {
        Self {
            v_threshold: Voltage::new(0.300),
            hysteresis: Voltage::new(0.0),
        }
    }
}

/// Full-wave bridge output: `max(0, |Vpk sin| - 2 Vdiode)`.
pub fn rectified_voltage(t: Duration, p: &RailParams) -> Voltage {
    let v_pk = p.vs_rms.value() * std::f64::consts::SQRT_2;
    let phase = 2.0 * std::f64::consts::PI * p.mains_freq.value() * t.value();
    let v = v_pk * phase.sin().abs() - 2.0 * p.diode_drop.value();
    Voltage::new(v.max(0.0))
}

/// Reservoir-filtered rail.
///
/// The capacitor tracks the rectified wave whenever that wave is above it
/// (instant recharge) and otherwise discharges linearly at `i_load/c_filter`
/// from the last peak until the next half-cycle recaptures it. Peak-to-peak
/// ripple therefore comes out near `i_load / (2 f c_filter)`.
pub fn filtered_rail(t: Duration, p: &RailParams) -> Voltage {
    let rect = rectified_voltage(t, p).value();
    let half_period = 1.0 / (2.0 * p.mains_freq.value());
    let first_peak = 0.5 * half_period;
    if t.value() < first_peak {
        return Voltage::new(rect);
    }
    let v_pk = (p.vs_rms.value() * std::f64::consts::SQRT_2 - 2.0 * p.diode_drop.value()).max(0.0);
    let peaks_done = ((t.value() - first_peak) / half_period).floor();
    let t_last_peak = first_peak + peaks_done * half_period;
    let slope = p.i_load.value() / p.c_filter.value();
    let held = v_pk - slope * (t.value() - t_last_peak);
    Voltage::new(rect.max(held))
}

/// Ideal linear regulator with dropout: `min(setpoint, max(0, vin - dropout))`.
pub fn regulator_out(v_in: Voltage, p: &RailParams) -> Voltage {
    Voltage::new(
        (v_in.value() - p.reg_dropout.value())
            .max(0.0)
            .min(p.reg_setpoint.value()),
    )
}

/// Absolute-temperature sensor output: `gain * T_kelvin`.
pub fn lm335_voltage(t: TemperatureK, p: &SensorParams) -> Result<Voltage, BlockError> {
    if t.value() < 0.0 {
        return Err(BlockError::NegativeKelvin(t.value()));
    }
    Ok(Voltage::new(p.gain * t.value()))
}

/// Single-supply subtractor: `clamp(v_sensor - v_ref, 0, v_rail)`.
pub fn subtractor_out(v_sensor: Voltage, p: &SensorParams, v_rail: Voltage) -> Voltage {
    Voltage::new(
        (v_sensor.value() - p.v_ref_subtract.value())
            .max(0.0)
            .min(v_rail.value()),
    )
}

/// Maps a preset temperature to the comparator reference voltage.
///
/// The Celsius-scale gain equals the kelvin gain, since a temperature
/// difference is the same size on both scales.
pub fn temp_to_threshold(preset: TemperatureC, p: &SensorParams) -> Result<Voltage, BlockError> {
    let volts = preset.value() * p.gain;
    if volts < 0.0 {
        return Err(BlockError::NegativeThreshold {
            preset: preset.value(),
            volts,
        });
    }
    Ok(Voltage::new(volts))
}

/// Threshold comparator with optional hysteresis.
///
/// With zero hysteresis the previous state is irrelevant and the rule
/// degenerates to `High <=> v_plus >= v_threshold`.
pub fn comparator_out(
    v_plus: Voltage,
    state_prev: LogicLevel,
    p: &ComparatorParams,
) -> LogicLevel {
    let effective = match state_prev {
        LogicLevel::Low => p.v_threshold.value(),
        LogicLevel::High => p.v_threshold.value() - p.hysteresis.value(),
    };
    LogicLevel::from_bool(v_plus.value() >= effective)
}
