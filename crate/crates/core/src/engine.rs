//! Fixed-step transient engine for the full dual-sensor chain.
//!
//! Each sample records the signal state at `t = k * dt`; the timer is then
//! advanced over the following interval with the alarm gating its enable,
//! so the beep waveform lags the gate by at most one sample. The signal
//! chain treats the regulated rail as ideal (the subtractors clamp against
//! the regulator setpoint, not the instantaneous startup ramp), which keeps
//! the alarm decision a pure function of temperature versus preset; the
//! dynamic rail model is still computed and reported on the `rail` channel
//! for inspection.
//!
//! Trace channels, in order: `rail`, `sensor1_v`, `sensor2_v`, `sub1_v`,
//! `sub2_v`, `comp1`, `comp2`, `timer_vcap`, `timer_out`, `alarm`,
//! `load_enable`. Logic channels are rendered as 0/1 samples.

use crate::blocks::{
    comparator_out, filtered_rail, lm335_voltage, regulator_out, subtractor_out,
    temp_to_threshold, ComparatorParams, RailParams, SensorParams,
};
use crate::timer::{timer_step, Timer555Config, Timer555State, TimerError, TimerInputs};
use crate::units::{
    kelvin_from_celsius, Duration, Frequency, LogicLevel, TemperatureC, Trace, TraceError, Voltage,
};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Channel names produced by [`run_transient`], in order.
pub const TRACE_CHANNELS: [&str; 11] = [
    "rail",
    "sensor1_v",
    "sensor2_v",
    "sub1_v",
    "sub2_v",
    "comp1",
    "comp2",
    "timer_vcap",
    "timer_out",
    "alarm",
    "load_enable",
];

#[derive(Debug, Error, PartialEq)]
pub enum EngineError {
    #[error("step size must be positive, got {0} s")]
    NonPositiveDt(f64),
    #[error("end time {t_end} s must exceed the step size {dt} s")]
    EndBeforeFirstStep { dt: f64, t_end: f64 },
    #[error("profile needs at least one breakpoint")]
    EmptyProfile,
    #[error("profile times must be strictly increasing: {prev} s then {next} s")]
    NonMonotoneProfile { prev: f64, next: f64 },
    #[error("profile value out of range: {0}")]
    BadProfileValue(String),
    #[error("comparator threshold {threshold} V outside [0, {rail} V]")]
    ThresholdOutsideRail { threshold: f64, rail: f64 },
    #[error("noise amplitude must not be negative, got {0} V")]
    NegativeNoise(f64),
    #[error(transparent)]
    Timer(#[from] TimerError),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error("channel {channel:?} has {edges} rising edge(s) in the window; need at least 2")]
    Unmeasurable { channel: String, edges: usize },
    #[error("invalid preset: {0}")]
    BadPreset(String),
}

/// How the alarm line follows the comparators. The alarm is non-latching;
/// it tracks the comparators sample by sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AlarmPolicy {
    #[default]
    FollowEither,
}

/// The wired block graph: rail, two sensor channels, comparators, timer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircuitSystem {
    pub rail: RailParams,
    pub sensors: [SensorParams; 2],
    pub comparators: [ComparatorParams; 2],
    pub timer: Timer555Config,
    pub alarm_policy: AlarmPolicy,
}

impl Default for CircuitSystem {
    fn default() -> Self {
        Self {
            rail: RailParams::default(),
            sensors: [SensorParams::default(); 2],
            comparators: [ComparatorParams::default(); 2],
            timer: Timer555Config::default(),
            alarm_policy: AlarmPolicy::FollowEither,
        }
    }
}

impl CircuitSystem {
    pub fn validate(&self) -> Result<(), EngineError> {
        self.timer.validate()?;
        for c in &self.comparators {
            let thr = c.v_threshold.value();
            if !(0.0..=self.rail.reg_setpoint.value()).contains(&thr) {
                return Err(EngineError::ThresholdOutsideRail {
                    threshold: thr,
                    rail: self.rail.reg_setpoint.value(),
                });
            }
        }
        Ok(())
    }
}

/// Piecewise-linear temperature stimulus with constant extrapolation
/// beyond the first and last breakpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct TemperatureProfile {
    breakpoints: Vec<(Duration, TemperatureC)>,
}

impl TemperatureProfile {
    pub fn new(breakpoints: Vec<(Duration, TemperatureC)>) -> Result<Self, EngineError> {
        if breakpoints.is_empty() {
            return Err(EngineError::EmptyProfile);
        }
        for (t, temp) in &breakpoints {
            if !t.value().is_finite() || !temp.value().is_finite() {
                return Err(EngineError::BadProfileValue(format!(
                    "({} s, {} degC)",
                    t.value(),
                    temp.value()
                )));
            }
            if temp.value() < -crate::units::KELVIN_OFFSET {
                return Err(EngineError::BadProfileValue(format!(
                    "{} degC is below absolute zero",
                    temp.value()
                )));
            }
        }
        for pair in breakpoints.windows(2) {
            if pair[1].0.value() <= pair[0].0.value() {
                return Err(EngineError::NonMonotoneProfile {
                    prev: pair[0].0.value(),
                    next: pair[1].0.value(),
                });
            }
        }
        Ok(Self { breakpoints })
    }

    pub fn constant(temp: TemperatureC) -> Self {
        Self {
            breakpoints: vec![(Duration::new(0.0), temp)],
        }
    }

    pub fn breakpoints(&self) -> &[(Duration, TemperatureC)] {
        &self.breakpoints
    }

    /// Temperature at time `t`, linearly interpolated between breakpoints.
    pub fn at(&self, t: Duration) -> TemperatureC {
        let pts = &self.breakpoints;
        let x = t.value();
        if x <= pts[0].0.value() {
            return pts[0].1;
        }
        if x >= pts[pts.len() - 1].0.value() {
            return pts[pts.len() - 1].1;
        }
        for pair in pts.windows(2) {
            let (t0, y0) = (pair[0].0.value(), pair[0].1.value());
            let (t1, y1) = (pair[1].0.value(), pair[1].1.value());
            if x <= t1 {
                let frac = (x - t0) / (t1 - t0);
                return TemperatureC::new(y0 + frac * (y1 - y0));
            }
        }
        pts[pts.len() - 1].1
    }
}

/// Run parameters shared by the engine and the scenario format.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub dt: Duration,
    pub t_end: Duration,
    pub seed: u64,
    /// Zero-mean uniform noise amplitude injected on each sensor voltage;
    /// zero disables the noise source entirely.
    pub noise_amplitude: Voltage,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dt: Duration::new(1e-3),
            t_end: Duration::new(10.0),
            seed: 0,
            noise_amplitude: Voltage::new(0.0),
        }
    }
}

/// Maximal alarm-on intervals plus per-sensor trigger flags.
#[derive(Debug, Clone, PartialEq)]
pub struct AlarmReport {
    /// Half-open `[start, end)` intervals at sample resolution. When the
    /// alarm is still on at the final sample, the interval ends one step
    /// past it.
    pub intervals: Vec<(Duration, Duration)>,
    pub triggered: [bool; 2],
}

/// Deterministic uniform noise in [-amplitude, amplitude).
///
/// The mapping from raw RNG output to floats is done by hand so the stream
/// depends only on ChaCha8 and the seed, not on any sampling library.
struct NoiseSource {
    rng: ChaCha8Rng,
    amplitude: f64,
}

impl NoiseSource {
    fn new(seed: u64, amplitude: f64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            amplitude,
        }
    }

    fn next(&mut self) -> f64 {
        let unit = (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        (2.0 * unit - 1.0) * self.amplitude
    }
}

/// Runs the transient with noise off. See [`run_transient_with`].
pub fn run_transient(
    sys: &CircuitSystem,
    profiles: &[TemperatureProfile; 2],
    dt: Duration,
    t_end: Duration,
) -> Result<Trace, EngineError> {
    let run = RunConfig {
        dt,
        t_end,
        ..RunConfig::default()
    };
    run_transient_with(sys, profiles, &run)
}

/// Runs the full signal chain over `[0, t_end]` at fixed step `dt`.
///
/// The alarm is the OR of the comparator outputs; it gates the timer's
/// enable, and `load_enable` is its complement (the supervised load is cut
/// off while the alarm is on).
pub fn run_transient_with(
    sys: &CircuitSystem,
    profiles: &[TemperatureProfile; 2],
    run: &RunConfig,
) -> Result<Trace, EngineError> {
    if !run.dt.value().is_finite() || run.dt.value() <= 0.0 {
        return Err(EngineError::NonPositiveDt(run.dt.value()));
    }
    if run.t_end.value() <= run.dt.value() {
        return Err(EngineError::EndBeforeFirstStep {
            dt: run.dt.value(),
            t_end: run.t_end.value(),
        });
    }
    if run.noise_amplitude.value() < 0.0 {
        return Err(EngineError::NegativeNoise(run.noise_amplitude.value()));
    }
    sys.validate()?;

    let mut noise = (run.noise_amplitude.value() > 0.0)
        .then(|| NoiseSource::new(run.seed, run.noise_amplitude.value()));
    let dt = run.dt;
    // Epsilon so a t_end that is an exact multiple of dt up to float
    // rounding still lands its final sample.
    let steps = (run.t_end.value() / dt.value() + 1e-9).floor() as usize;
    let mut trace = Trace::new(dt, Duration::new(0.0), &TRACE_CHANNELS)?;

    let clamp_rail = sys.rail.reg_setpoint;
    let mut comp_state = [LogicLevel::Low; 2];
    // The timer sits in reset until the alarm releases it.
    let mut timer_state = Timer555State::reset();

    for k in 0..=steps {
        let t = Duration::new(k as f64 * dt.value());
        let rail_raw = filtered_rail(t, &sys.rail);
        let rail_reg = regulator_out(rail_raw, &sys.rail);

        let mut sensor_v = [0.0f64; 2];
        let mut sub_v = [0.0f64; 2];
        for i in 0..2 {
            let temp = profiles[i].at(t);
            let kelvin = kelvin_from_celsius(temp)
                .map_err(|e| EngineError::BadProfileValue(e.to_string()))?;
            let mut v = lm335_voltage(kelvin, &sys.sensors[i])
                .map_err(|e| EngineError::BadProfileValue(e.to_string()))?
                .value();
            if let Some(src) = noise.as_mut() {
                v += src.next();
            }
            sensor_v[i] = v;
            let sub = subtractor_out(Voltage::new(v), &sys.sensors[i], clamp_rail);
            sub_v[i] = sub.value();
            comp_state[i] = comparator_out(sub, comp_state[i], &sys.comparators[i]);
        }

        let alarm = LogicLevel::from_bool(comp_state[0].is_high() || comp_state[1].is_high());
        let load_enable = LogicLevel::from_bool(!alarm.is_high());

        trace.push_row(&[
            rail_reg.value(),
            sensor_v[0],
            sensor_v[1],
            sub_v[0],
            sub_v[1],
            comp_state[0].as_sample(),
            comp_state[1].as_sample(),
            timer_state.v_cap.value(),
            timer_state.output.as_sample(),
            alarm.as_sample(),
            load_enable.as_sample(),
        ])?;

        if k < steps {
            // Alarm gates the timer supply; the trigger pin is pulled low
            // while the alarm is active so a monostable fires on onset.
            let inputs = TimerInputs {
                trigger: if alarm.is_high() {
                    Voltage::new(0.0)
                } else {
                    sys.timer.vs
                },
                reset: sys.timer.vs,
                enable: alarm.is_high(),
            };
            timer_state = timer_step(&timer_state, &inputs, &sys.timer, dt)?;
        }
    }
    Ok(trace)
}

/// Extracts maximal alarm-on runs from a trace.
///
/// Requires an `alarm` channel; `comp1`/`comp2` feed the per-sensor flags
/// when present.
pub fn alarm_intervals(trace: &Trace) -> Result<AlarmReport, EngineError> {
    let alarm = trace.channel("alarm")?;
    let dt = trace.dt().value();
    let t0 = trace.t0().value();
    let mut intervals = Vec::new();
    let mut run_start: Option<usize> = None;
    for (k, &v) in alarm.iter().enumerate() {
        let high = v >= 0.5;
        match (high, run_start) {
            (true, None) => run_start = Some(k),
            (false, Some(start)) => {
                intervals.push((
                    Duration::new(t0 + start as f64 * dt),
                    Duration::new(t0 + k as f64 * dt),
                ));
                run_start = None;
            }
            _ => {}
        }
    }
    if let Some(start) = run_start {
        intervals.push((
            Duration::new(t0 + start as f64 * dt),
            Duration::new(t0 + alarm.len() as f64 * dt),
        ));
    }
    let flag = |name: &str| -> bool {
        trace
            .channel(name)
            .map(|ch| ch.iter().any(|&v| v >= 0.5))
            .unwrap_or(false)
    };
    Ok(AlarmReport {
        intervals,
        triggered: [flag("comp1"), flag("comp2")],
    })
}

/// Frequency of a logic channel from its rising edges inside `window`.
///
/// Uses `(edge count - 1) / (time from first to last edge)` and fails when
/// fewer than two edges fall inside the window.
pub fn measure_frequency(
    trace: &Trace,
    channel: &str,
    window: (Duration, Duration),
) -> Result<Frequency, EngineError> {
    let ch = trace.channel(channel)?;
    let (w0, w1) = (window.0.value(), window.1.value());
    let mut edges: Vec<f64> = Vec::new();
    for k in 1..ch.len() {
        let t = trace.time_at(k).value();
        if t < w0 || t > w1 {
            continue;
        }
        if ch[k - 1] < 0.5 && ch[k] >= 0.5 {
            edges.push(t);
        }
    }
    if edges.len() < 2 {
        return Err(EngineError::Unmeasurable {
            channel: channel.to_string(),
            edges: edges.len(),
        });
    }
    let span = edges[edges.len() - 1] - edges[0];
    Ok(Frequency::new((edges.len() - 1) as f64 / span))
}

/// Runs the same profile on both channels for each preset and tabulates
/// the first alarm time, if any.
pub fn sweep_preset(
    sys: &CircuitSystem,
    profile: &TemperatureProfile,
    presets: &[TemperatureC],
    dt: Duration,
    t_end: Duration,
) -> Result<Vec<(TemperatureC, Option<Duration>)>, EngineError> {
    let mut rows = Vec::with_capacity(presets.len());
    for &preset in presets {
        let mut swept = *sys;
        for i in 0..2 {
            let thr = temp_to_threshold(preset, &sys.sensors[i])
                .map_err(|e| EngineError::BadPreset(e.to_string()))?;
            swept.comparators[i].v_threshold = thr;
        }
        let profiles = [profile.clone(), profile.clone()];
        let trace = run_transient(&swept, &profiles, dt, t_end)?;
        let report = alarm_intervals(&trace)?;
        rows.push((preset, report.intervals.first().map(|iv| iv.0)));
    }
    Ok(rows)
}
