//! Stateful 555 timer model: astable, monostable, and bistable modes with
//! explicit capacitor dynamics and reset override.
//!
//! Threshold crossings inside a step are located by solving the RC
//! exponential for the crossing time, so the capacitor never overshoots
//! the Vs/3 and 2Vs/3 trip points no matter how coarse the step is. A
//! single step may contain several crossings; each is resolved in turn
//! until the step's time budget is spent.

use crate::units::{Capacitance, Duration, LogicLevel, Resistance, Trace, Voltage};
use thiserror::Error;

/// Reset pin is active when pulled below this level.
pub const RESET_ACTIVE_BELOW: f64 = 0.4;
/// The bistable wiring resets at a slightly higher level.
pub const BISTABLE_RESET_BELOW: f64 = 0.7;

#[derive(Debug, Error, PartialEq)]
pub enum TimerError {
    #[error("supply voltage must be positive, got {0} V")]
    NonPositiveSupply(f64),
    #[error("{param} must be positive in {mode:?} mode, got {value}")]
    NonPositiveComponent {
        param: &'static str,
        mode: TimerMode,
        value: f64,
    },
    #[error("step size must be positive, got {0} s")]
    NonPositiveDt(f64),
    #[error("free-run simulation requires Astable mode, got {0:?}")]
    NotAstable(TimerMode),
    #[error("end time must exceed the step size")]
    EndBeforeFirstStep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimerMode {
    Astable,
    Monostable,
    Bistable,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Timer555Config {
    pub mode: TimerMode,
    pub vs: Voltage,
    pub r1: Resistance,
    pub r2: Resistance,
    pub c: Capacitance,
    /// Timing resistor for the monostable pulse.
    pub r_mono: Resistance,
}

impl Default for Timer555Config {
    fn default() -> Self {
        Self {
            mode: TimerMode::Astable,
            vs: Voltage::new(5.0),
            r1: Resistance::new(68e3),
            r2: Resistance::new(68e3),
            c: Capacitance::new(1e-6),
            r_mono: Resistance::new(100e3),
        }
    }
}

impl Timer555Config {
    pub fn validate(&self) -> Result<(), TimerError> {
        if !self.vs.value().is_finite() || self.vs.value() <= 0.0 {
            return Err(TimerError::NonPositiveSupply(self.vs.value()));
        }
        let need = |param: &'static str, value: f64| {
            if value > 0.0 && value.is_finite() {
                Ok(())
            } else {
                Err(TimerError::NonPositiveComponent {
                    param,
                    mode: self.mode,
                    value,
                })
            }
        };
        match self.mode {
            TimerMode::Astable => {
                need("r1", self.r1.value())?;
                need("r2", self.r2.value())?;
                need("c", self.c.value())?;
            }
            TimerMode::Monostable => {
                need("r_mono", self.r_mono.value())?;
                need("c", self.c.value())?;
            }
            TimerMode::Bistable => {}
        }
        Ok(())
    }

    fn v_trigger(&self) -> f64 {
        self.vs.value() / 3.0
    }

    fn v_threshold(&self) -> f64 {
        2.0 * self.vs.value() / 3.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Timer555State {
    pub v_cap: Voltage,
    pub output: LogicLevel,
    pub discharging: bool,
}

impl Timer555State {
    /// The state the reset override forces: capacitor dumped, output low.
    pub fn reset() -> Self {
        Self {
            v_cap: Voltage::new(0.0),
            output: LogicLevel::Low,
            discharging: false,
        }
    }
}

/// External pins driven by the surrounding circuit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimerInputs {
    /// Trigger pin, active below Vs/3.
    pub trigger: Voltage,
    /// Reset pin, active below 0.4 V.
    pub reset: Voltage,
    /// Supply-path switch; false holds the timer in reset.
    pub enable: bool,
}

impl TimerInputs {
    /// All pins parked inactive (pulled to the supply).
    pub fn inactive(vs: Voltage) -> Self {
        Self {
            trigger: vs,
            reset: vs,
            enable: true,
        }
    }
}

pub fn timer_init(cfg: &Timer555Config) -> Result<Timer555State, TimerError> {
    cfg.validate()?;
    Ok(match cfg.mode {
        // The astable starts charging toward 2/3 Vs with the output high.
        TimerMode::Astable => Timer555State {
            v_cap: Voltage::new(0.0),
            output: LogicLevel::High,
            discharging: false,
        },
        TimerMode::Monostable | TimerMode::Bistable => Timer555State::reset(),
    })
}

/// Advances the timer by `dt`, resolving RC threshold crossings analytically.
pub fn timer_step(
    state: &Timer555State,
    inputs: &TimerInputs,
    cfg: &Timer555Config,
    dt: Duration,
) -> Result<Timer555State, TimerError> {
    cfg.validate()?;
    if !dt.value().is_finite() || dt.value() <= 0.0 {
        return Err(TimerError::NonPositiveDt(dt.value()));
    }
    // Reset overrides everything: output low, capacitor discharged.
    if !inputs.enable || inputs.reset.value() < RESET_ACTIVE_BELOW {
        return Ok(Timer555State::reset());
    }
    match cfg.mode {
        TimerMode::Astable => Ok(step_astable(state, cfg, dt.value())),
        TimerMode::Monostable => Ok(step_monostable(state, inputs, cfg, dt.value())),
        TimerMode::Bistable => Ok(step_bistable(state, inputs, cfg)),
    }
}

fn step_astable(state: &Timer555State, cfg: &Timer555Config, dt: f64) -> Timer555State {
    let vs = cfg.vs.value();
    let v_hi = cfg.v_threshold();
    let v_lo = cfg.v_trigger();
    let tau_charge = (cfg.r1.value() + cfg.r2.value()) * cfg.c.value();
    let tau_discharge = cfg.r2.value() * cfg.c.value();

    let mut v = state.v_cap.value();
    let mut high = state.output.is_high();
    let mut remaining = dt;
    while remaining > 0.0 {
        if high {
            if v >= v_hi {
                high = false;
                continue;
            }
            // v(t) = vs + (v - vs) e^(-t/tau); solve for v(t*) = v_hi.
            let t_cross = tau_charge * ((vs - v) / (vs - v_hi)).ln();
            if t_cross > remaining {
                v = vs + (v - vs) * (-remaining / tau_charge).exp();
                break;
            }
            v = v_hi;
            high = false;
            remaining -= t_cross;
        } else {
            if v <= v_lo {
                high = true;
                continue;
            }
            // v(t) = v e^(-t/tau); solve for v(t*) = v_lo.
            let t_cross = tau_discharge * (v / v_lo).ln();
            if t_cross > remaining {
                v *= (-remaining / tau_discharge).exp();
                break;
            }
            v = v_lo;
            high = true;
            remaining -= t_cross;
        }
    }
    Timer555State {
        v_cap: Voltage::new(v),
        output: LogicLevel::from_bool(high),
        discharging: !high,
    }
}

fn step_monostable(
    state: &Timer555State,
    inputs: &TimerInputs,
    cfg: &Timer555Config,
    dt: f64,
) -> Timer555State {
    let vs = cfg.vs.value();
    let v_hi = cfg.v_threshold();
    let tau = cfg.r_mono.value() * cfg.c.value();

    let mut v = state.v_cap.value();
    let pulsing = state.output.is_high() || inputs.trigger.value() < cfg.v_trigger();
    if !pulsing {
        return Timer555State {
            v_cap: Voltage::new(v),
            output: LogicLevel::Low,
            discharging: false,
        };
    }
    // Pulse in progress: charge toward vs, end the pulse at 2/3 Vs.
    let t_cross = if v >= v_hi {
        0.0
    } else {
        tau * ((vs - v) / (vs - v_hi)).ln()
    };
    if t_cross > dt {
        v = vs + (v - vs) * (-dt / tau).exp();
        Timer555State {
            v_cap: Voltage::new(v),
            output: LogicLevel::High,
            discharging: false,
        }
    } else {
        // Pulse elapsed within this step; the cap is dumped.
        Timer555State::reset()
    }
}

fn step_bistable(
    state: &Timer555State,
    inputs: &TimerInputs,
    cfg: &Timer555Config,
) -> Timer555State {
    let output = if inputs.reset.value() < BISTABLE_RESET_BELOW {
        LogicLevel::Low
    } else if inputs.trigger.value() < cfg.v_trigger() {
        LogicLevel::High
    } else {
        state.output
    };
    Timer555State {
        v_cap: state.v_cap,
        output,
        discharging: false,
    }
}

/// Free-running astable simulation with all pins inactive.
pub fn simulate_timer_free_run(
    cfg: &Timer555Config,
    t_end: Duration,
    dt: Duration,
) -> Result<Trace, TimerError> {
    simulate_timer_free_run_with(cfg, &TimerInputs::inactive(cfg.vs), t_end, dt)
}

/// Free-running astable simulation with caller-supplied pin levels.
pub fn simulate_timer_free_run_with(
    cfg: &Timer555Config,
    inputs: &TimerInputs,
    t_end: Duration,
    dt: Duration,
) -> Result<Trace, TimerError> {
    if cfg.mode != TimerMode::Astable {
        return Err(TimerError::NotAstable(cfg.mode));
    }
    cfg.validate()?;
    if !dt.value().is_finite() || dt.value() <= 0.0 {
        return Err(TimerError::NonPositiveDt(dt.value()));
    }
    if t_end.value() <= dt.value() {
        return Err(TimerError::EndBeforeFirstStep);
    }
    let mut state = if inputs.enable && inputs.reset.value() >= RESET_ACTIVE_BELOW {
        timer_init(cfg)?
    } else {
        Timer555State::reset()
    };
    let steps = (t_end.value() / dt.value() + 1e-9).floor() as usize;
    let mut trace =
        Trace::new(dt, Duration::new(0.0), &["v_cap", "output"]).expect("dt validated above");
    for k in 0..=steps {
        trace
            .push_row(&[state.v_cap.value(), state.output.as_sample()])
            .expect("fixed row width");
        if k < steps {
            state = timer_step(&state, inputs, cfg, dt)?;
        }
    }
    Ok(trace)
}
