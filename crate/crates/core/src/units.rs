//! Physical quantity newtypes, temperature conversions, logic levels, and
//! the multi-channel waveform trace shared by every other module.
//!
//! Quantities are plain `f64` values in SI base units with semantic typing
//! at API boundaries; there is no unit-algebra layer. Range checks happen
//! in the operations that consume a value, because the same type can be a
//! component value in one place (must be positive) and a computed result
//! in another (may legitimately be zero).

use thiserror::Error;

/// Exact Celsius-to-Kelvin offset used throughout the crate.
pub const KELVIN_OFFSET: f64 = 273.15;

#[derive(Debug, Error, PartialEq)]
pub enum UnitError {
    #[error("{quantity} must be finite, got {value}")]
    NonFinite { quantity: &'static str, value: f64 },
    #[error("temperature {celsius} degC is below absolute zero")]
    BelowAbsoluteZero { celsius: f64 },
}

macro_rules! quantity {
    ($(#[$meta:meta])* $name:ident, $unit:literal) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
        pub struct $name(f64);

        impl $name {
            pub const fn new(value: f64) -> Self {
                Self(value)
            }

            pub const fn value(self) -> f64 {
                self.0
            }
        }

        impl std::fmt::Display for $name {
            fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                write!(f, "{} {}", self.0, $unit)
            }
        }
    };
}

quantity!(Voltage, "V");
quantity!(Resistance, "ohm");
quantity!(Capacitance, "F");
quantity!(Current, "A");
quantity!(
    /// A span of time in seconds (sample step, switching period, run length).
    Duration,
    "s"
);
quantity!(Frequency, "Hz");
quantity!(
    /// Absolute temperature in kelvin.
    TemperatureK,
    "K"
);
quantity!(
    /// Temperature in degrees Celsius.
    TemperatureC,
    "degC"
);

/// Converts Celsius to kelvin, rejecting temperatures below absolute zero.
pub fn kelvin_from_celsius(t: TemperatureC) -> Result<TemperatureK, UnitError> {
    let c = t.value();
    if !c.is_finite() {
        return Err(UnitError::NonFinite {
            quantity: "temperature",
            value: c,
        });
    }
    if c < -KELVIN_OFFSET {
        return Err(UnitError::BelowAbsoluteZero { celsius: c });
    }
    Ok(TemperatureK::new(c + KELVIN_OFFSET))
}

/// Inverse of [`kelvin_from_celsius`]; total on the kelvin domain.
pub fn celsius_from_kelvin(t: TemperatureK) -> TemperatureC {
    TemperatureC::new(t.value() - KELVIN_OFFSET)
}

/// Two-state logic level produced by comparators and the timer output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogicLevel {
    Low,
    High,
}

impl LogicLevel {
    pub fn from_bool(high: bool) -> Self {
        if high {
            LogicLevel::High
        } else {
            LogicLevel::Low
        }
    }

    pub fn is_high(self) -> bool {
        matches!(self, LogicLevel::High)
    }

    /// Rendered as a signal voltage: High is the positive rail, Low is 0 V.
    pub fn as_signal(self, rail: Voltage) -> Voltage {
        match self {
            LogicLevel::High => rail,
            LogicLevel::Low => Voltage::new(0.0),
        }
    }

    /// Rendered as a trace sample: 1.0 for High, 0.0 for Low.
    pub fn as_sample(self) -> f64 {
        match self {
            LogicLevel::High => 1.0,
            LogicLevel::Low => 0.0,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum TraceError {
    #[error("trace dt must be positive, got {0} s")]
    NonPositiveDt(f64),
    #[error("row has {got} values but the trace has {expected} channels")]
    RowWidthMismatch { expected: usize, got: usize },
    #[error("trace has no channel named {0:?}")]
    UnknownChannel(String),
}

/// One named sample sequence inside a [`Trace`].
#[derive(Debug, Clone, PartialEq)]
pub struct TraceChannel {
    pub name: String,
    pub samples: Vec<f64>,
}

/// Uniformly sampled multi-channel waveform record.
///
/// Timestamps are implied: sample `k` of every channel was taken at
/// `t0 + k * dt`. All channels always hold the same number of samples;
/// rows can only be appended across every channel at once.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    dt: Duration,
    t0: Duration,
    channels: Vec<TraceChannel>,
}

impl Trace {
    pub fn new(dt: Duration, t0: Duration, names: &[&str]) -> Result<Self, TraceError> {
        if !dt.value().is_finite() || dt.value() <= 0.0 {
            return Err(TraceError::NonPositiveDt(dt.value()));
        }
        Ok(Self {
            dt,
            t0,
            channels: names
                .iter()
                .map(|n| TraceChannel {
                    name: (*n).to_string(),
                    samples: Vec::new(),
                })
                .collect(),
        })
    }

    /// Appends one sample to every channel.
    pub fn push_row(&mut self, row: &[f64]) -> Result<(), TraceError> {
        if row.len() != self.channels.len() {
            return Err(TraceError::RowWidthMismatch {
                expected: self.channels.len(),
                got: row.len(),
            });
        }
        for (ch, v) in self.channels.iter_mut().zip(row) {
            ch.samples.push(*v);
        }
        Ok(())
    }

    pub fn dt(&self) -> Duration {
        self.dt
    }

    pub fn t0(&self) -> Duration {
        self.t0
    }

    /// Number of samples per channel.
    pub fn len(&self) -> usize {
        self.channels.first().map_or(0, |c| c.samples.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn channels(&self) -> &[TraceChannel] {
        &self.channels
    }

    pub fn channel(&self, name: &str) -> Result<&[f64], TraceError> {
        self.channels
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.samples.as_slice())
            .ok_or_else(|| TraceError::UnknownChannel(name.to_string()))
    }

    /// Time of sample `k`, computed as `t0 + k * dt` (never accumulated).
    pub fn time_at(&self, k: usize) -> Duration {
        Duration::new(self.t0.value() + k as f64 * self.dt.value())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn kelvin_from_celsius_matches_offset() {
        let k = kelvin_from_celsius(TemperatureC::new(25.0)).unwrap();
        assert!((k.value() - 298.15).abs() < 1e-12);

        let zero = kelvin_from_celsius(TemperatureC::new(-273.15)).unwrap();
        assert_eq!(zero.value(), 0.0);

        let boil = kelvin_from_celsius(TemperatureC::new(100.0)).unwrap();
        assert!((boil.value() - 373.15).abs() < 1e-12);
    }

    #[test]
    fn kelvin_from_celsius_rejects_below_absolute_zero() {
        let err = kelvin_from_celsius(TemperatureC::new(-273.16)).unwrap_err();
        assert_eq!(err, UnitError::BelowAbsoluteZero { celsius: -273.16 });
        assert!(kelvin_from_celsius(TemperatureC::new(f64::NAN)).is_err());
    }

    #[test]
    fn logic_level_rendering() {
        let rail = Voltage::new(5.0);
        assert_eq!(LogicLevel::High.as_signal(rail), rail);
        assert_eq!(LogicLevel::Low.as_signal(rail), Voltage::new(0.0));
        assert_eq!(LogicLevel::High.as_sample(), 1.0);
        assert_eq!(LogicLevel::Low.as_sample(), 0.0);
    }

    #[test]
    fn trace_rejects_bad_rows_and_bad_dt() {
        assert_eq!(
            Trace::new(Duration::new(0.0), Duration::new(0.0), &["a"]).unwrap_err(),
            TraceError::NonPositiveDt(0.0)
        );
        let mut tr = Trace::new(Duration::new(0.5), Duration::new(0.0), &["a", "b"]).unwrap();
        assert_eq!(
            tr.push_row(&[1.0]).unwrap_err(),
            TraceError::RowWidthMismatch {
                expected: 2,
                got: 1
            }
        );
        tr.push_row(&[1.0, 2.0]).unwrap();
        assert_eq!(tr.len(), 1);
        assert_eq!(tr.channel("b").unwrap(), &[2.0]);
        assert!(tr.channel("zz").is_err());
        assert_eq!(tr.time_at(4).value(), 2.0);
    }

    proptest! {
        #[test]
        fn celsius_kelvin_round_trip(c in -273.15f64..2000.0) {
            let k = kelvin_from_celsius(TemperatureC::new(c)).unwrap();
            let back = celsius_from_kelvin(k);
            prop_assert!((back.value() - c).abs() <= 1e-10 * c.abs().max(1.0));
        }

        #[test]
        fn trace_channels_stay_equal_length(rows in proptest::collection::vec(
            proptest::collection::vec(-1e6f64..1e6, 3), 0..40)
        ) {
            let mut tr = Trace::new(Duration::new(1e-3), Duration::new(0.0), &["x", "y", "z"]).unwrap();
            for row in &rows {
                tr.push_row(row).unwrap();
            }
            let lens: Vec<usize> = tr.channels().iter().map(|c| c.samples.len()).collect();
            prop_assert!(lens.iter().all(|&l| l == rows.len()));
        }
    }
}
