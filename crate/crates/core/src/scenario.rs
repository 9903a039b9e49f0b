//! Scenario file parsing, canonical rendering, and trace export.
//!
//! The scenario grammar is line-oriented. `#` starts a comment anywhere on
//! a line; blank lines are ignored. Section headers sit in square brackets
//! and may appear in any order, each at most once:
//!
//! ```text
//! [supply]       vs_rms, mains_freq, diode_drop, c_filter, i_load,
//!                reg_setpoint, reg_dropout
//! [sensor.1]     gain, v_ref            (volts per kelvin, volts)
//! [sensor.2]
//! [comparator.1] preset, hysteresis     (degC, volts)
//! [comparator.2]
//! [timer]        mode, vs, r1, r2, c, r_mono
//! [profile.1]    one `t temp` pair per line (seconds, degC)
//! [profile.2]
//! [run]          format, dt, t_end, seed, noise
//! ```
//!
//! Values are `key = value` with decimal SI suffixes `k`, `M`, `m`, `u`,
//! `n` (case-sensitive) or plain numbers. Unknown sections and keys are
//! errors; nothing falls back silently. Only `[run]` with `dt` and `t_end`
//! is required — every other value has a default. The format is versioned
//! with `format = 1` under `[run]`.
//!
//! Every error carries the 1-based line number it was detected on;
//! document-level errors (a missing section) report line 0.

use crate::blocks::{temp_to_threshold, ComparatorParams, RailParams, SensorParams};
use crate::engine::{
    AlarmPolicy, CircuitSystem, EngineError, RunConfig, TemperatureProfile,
};
use crate::timer::{Timer555Config, TimerMode};
use crate::units::{
    Capacitance, Current, Duration, Frequency, Resistance, TemperatureC, Trace, Voltage,
};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use thiserror::Error;

pub const FORMAT_VERSION: i64 = 1;

#[derive(Debug, Error, PartialEq)]
#[error("line {line}: {kind}")]
pub struct ScenarioError {
    pub line: usize,
    pub kind: ScenarioErrorKind,
}

#[derive(Debug, Error, PartialEq)]
pub enum ScenarioErrorKind {
    #[error("unknown section [{0}]")]
    UnknownSection(String),
    #[error("duplicate section [{0}]")]
    DuplicateSection(String),
    #[error("malformed section header {0:?}")]
    MalformedHeader(String),
    #[error("unknown key {key:?} in section [{section}]")]
    UnknownKey { section: String, key: String },
    #[error("duplicate key {key:?} in section [{section}]")]
    DuplicateKey { section: String, key: String },
    #[error("entry before any section header")]
    EntryOutsideSection,
    #[error("expected `key = value`, got {0:?}")]
    MalformedEntry(String),
    #[error("invalid number {0:?} (SI suffixes: k M m u n)")]
    BadNumber(String),
    #[error("invalid integer {0:?}")]
    BadInteger(String),
    #[error("invalid timer mode {0:?} (astable, monostable, bistable)")]
    BadMode(String),
    #[error("missing required section [{0}]")]
    MissingSection(&'static str),
    #[error("section [{section}] is missing required key {key:?}")]
    MissingKey {
        section: &'static str,
        key: &'static str,
    },
    #[error("unsupported format version {0} (this parser reads format 1)")]
    UnsupportedFormat(i64),
    #[error("expected `time temperature` pair, got {0:?}")]
    ProfileLine(String),
    #[error("profile times must be strictly increasing: {prev} then {next}")]
    NonMonotoneProfile { prev: f64, next: f64 },
    #[error("{0}")]
    InvalidValue(String),
}

fn err(line: usize, kind: ScenarioErrorKind) -> ScenarioError {
    ScenarioError { line, kind }
}

/// Parses a number with an optional decimal SI suffix.
///
/// Returns `None` for anything that is not a finite number followed by at
/// most one of `k`, `M`, `m`, `u`, `n`.
pub fn parse_si_number(text: &str) -> Option<f64> {
    let t = text.trim();
    let (mantissa, multiplier) = match t.char_indices().last() {
        Some((i, ch)) if ch.is_alphabetic() => {
            let multiplier = match ch {
                'k' => 1e3,
                'M' => 1e6,
                'm' => 1e-3,
                'u' => 1e-6,
                'n' => 1e-9,
                _ => return None,
            };
            (t[..i].trim_end(), multiplier)
        }
        _ => (t, 1.0),
    };
    if mantissa.is_empty() {
        return None;
    }
    let value: f64 = mantissa.parse().ok()?;
    if !value.is_finite() {
        return None;
    }
    Some(value * multiplier)
}

const SUPPLY_KEYS: &[&str] = &[
    "vs_rms",
    "mains_freq",
    "diode_drop",
    "c_filter",
    "i_load",
    "reg_setpoint",
    "reg_dropout",
];
const SENSOR_KEYS: &[&str] = &["gain", "v_ref"];
const COMPARATOR_KEYS: &[&str] = &["preset", "hysteresis"];
const TIMER_KEYS: &[&str] = &["mode", "vs", "r1", "r2", "c", "r_mono"];
const RUN_KEYS: &[&str] = &["format", "dt", "t_end", "seed", "noise"];

const SECTION_ORDER: &[&str] = &[
    "supply",
    "sensor.1",
    "sensor.2",
    "comparator.1",
    "comparator.2",
    "timer",
    "profile.1",
    "profile.2",
    "run",
];

fn keys_for(section: &str) -> Option<&'static [&'static str]> {
    match section {
        "supply" => Some(SUPPLY_KEYS),
        "sensor.1" | "sensor.2" => Some(SENSOR_KEYS),
        "comparator.1" | "comparator.2" => Some(COMPARATOR_KEYS),
        "timer" => Some(TIMER_KEYS),
        "run" => Some(RUN_KEYS),
        "profile.1" | "profile.2" => None,
        _ => None,
    }
}

fn is_profile(section: &str) -> bool {
    matches!(section, "profile.1" | "profile.2")
}

#[derive(Default)]
struct RawSection {
    header_line: usize,
    kv: BTreeMap<String, (usize, String)>,
    profile_rows: Vec<(usize, f64, f64)>,
}

/// Everything a scenario file describes: the circuit, the two temperature
/// stimuli, and the run parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioDoc {
    pub supply: RailParams,
    pub sensors: [SensorParams; 2],
    /// Comparator presets in degrees Celsius; the electrical threshold is
    /// derived through the matching sensor's gain.
    pub presets: [TemperatureC; 2],
    pub hysteresis: [Voltage; 2],
    pub timer: Timer555Config,
    pub profiles: [TemperatureProfile; 2],
    pub run: RunConfig,
}

impl Default for ScenarioDoc {
    fn default() -> Self {
        Self {
            supply: RailParams::default(),
            sensors: [SensorParams::default(); 2],
            presets: [TemperatureC::new(30.0); 2],
            hysteresis: [Voltage::new(0.0); 2],
            timer: Timer555Config::default(),
            profiles: [
                TemperatureProfile::constant(TemperatureC::new(25.0)),
                TemperatureProfile::constant(TemperatureC::new(25.0)),
            ],
            run: RunConfig::default(),
        }
    }
}

impl ScenarioDoc {
    /// Builds the wired system, stimuli, and run parameters.
    pub fn to_system(
        &self,
    ) -> Result<(CircuitSystem, [TemperatureProfile; 2], RunConfig), EngineError> {
        let mut comparators = [ComparatorParams::default(); 2];
        for (i, comp) in comparators.iter_mut().enumerate() {
            *comp = ComparatorParams {
                v_threshold: temp_to_threshold(self.presets[i], &self.sensors[i])
                    .map_err(|e| EngineError::BadPreset(e.to_string()))?,
                hysteresis: self.hysteresis[i],
            };
        }
        let sys = CircuitSystem {
            rail: self.supply,
            sensors: self.sensors,
            comparators,
            timer: self.timer,
            alarm_policy: AlarmPolicy::FollowEither,
        };
        sys.validate()?;
        Ok((sys, self.profiles.clone(), self.run))
    }
}

struct Applier<'a> {
    sections: &'a BTreeMap<String, RawSection>,
}

impl<'a> Applier<'a> {
    fn raw(&self, section: &str, key: &str) -> Option<&(usize, String)> {
        self.sections.get(section).and_then(|s| s.kv.get(key))
    }

    fn line_of(&self, section: &str, key: &str) -> Option<usize> {
        self.raw(section, key).map(|(line, _)| *line)
    }

    /// Applies a numeric key if present, running `check` against the value.
    fn number(
        &self,
        section: &str,
        key: &str,
        target: &mut f64,
        check: impl Fn(f64) -> Result<(), String>,
    ) -> Result<(), ScenarioError> {
        if let Some((line, raw)) = self.raw(section, key) {
            let value = parse_si_number(raw)
                .ok_or_else(|| err(*line, ScenarioErrorKind::BadNumber(raw.clone())))?;
            check(value).map_err(|msg| {
                err(
                    *line,
                    ScenarioErrorKind::InvalidValue(format!("{key} = {value}: {msg}")),
                )
            })?;
            *target = value;
        }
        Ok(())
    }

    fn integer(&self, section: &str, key: &str) -> Result<Option<(usize, i64)>, ScenarioError> {
        match self.raw(section, key) {
            None => Ok(None),
            Some((line, raw)) => {
                let v: i64 = raw
                    .trim()
                    .parse()
                    .map_err(|_| err(*line, ScenarioErrorKind::BadInteger(raw.clone())))?;
                Ok(Some((*line, v)))
            }
        }
    }

    fn unsigned(&self, section: &str, key: &str) -> Result<Option<(usize, u64)>, ScenarioError> {
        match self.raw(section, key) {
            None => Ok(None),
            Some((line, raw)) => {
                let v: u64 = raw
                    .trim()
                    .parse()
                    .map_err(|_| err(*line, ScenarioErrorKind::BadInteger(raw.clone())))?;
                Ok(Some((*line, v)))
            }
        }
    }
}

fn positive(v: f64) -> Result<(), String> {
    if v > 0.0 {
        Ok(())
    } else {
        Err("must be positive".into())
    }
}

fn non_negative(v: f64) -> Result<(), String> {
    if v >= 0.0 {
        Ok(())
    } else {
        Err("must not be negative".into())
    }
}

/// Parses scenario text into a [`ScenarioDoc`], strictly.
pub fn parse_scenario(text: &str) -> Result<ScenarioDoc, ScenarioError> {
    let mut sections: BTreeMap<String, RawSection> = BTreeMap::new();
    let mut current: Option<String> = None;

    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }

        if line.starts_with('[') {
            if !line.ends_with(']') {
                return Err(err(
                    line_no,
                    ScenarioErrorKind::MalformedHeader(line.to_string()),
                ));
            }
            let name = line[1..line.len() - 1].trim().to_string();
            if !SECTION_ORDER.contains(&name.as_str()) {
                return Err(err(line_no, ScenarioErrorKind::UnknownSection(name)));
            }
            if sections.contains_key(&name) {
                return Err(err(line_no, ScenarioErrorKind::DuplicateSection(name)));
            }
            sections.insert(
                name.clone(),
                RawSection {
                    header_line: line_no,
                    ..RawSection::default()
                },
            );
            current = Some(name);
            continue;
        }

        let section_name = current
            .clone()
            .ok_or_else(|| err(line_no, ScenarioErrorKind::EntryOutsideSection))?;
        let section = sections.get_mut(&section_name).expect("section exists");

        if is_profile(&section_name) {
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.len() != 2 {
                return Err(err(
                    line_no,
                    ScenarioErrorKind::ProfileLine(line.to_string()),
                ));
            }
            let t = parse_si_number(tokens[0]).ok_or_else(|| {
                err(line_no, ScenarioErrorKind::BadNumber(tokens[0].to_string()))
            })?;
            let temp = parse_si_number(tokens[1]).ok_or_else(|| {
                err(line_no, ScenarioErrorKind::BadNumber(tokens[1].to_string()))
            })?;
            if let Some(&(_, prev, _)) = section.profile_rows.last() {
                if t <= prev {
                    return Err(err(
                        line_no,
                        ScenarioErrorKind::NonMonotoneProfile { prev, next: t },
                    ));
                }
            }
            if temp < -crate::units::KELVIN_OFFSET {
                return Err(err(
                    line_no,
                    ScenarioErrorKind::InvalidValue(format!(
                        "{temp} degC is below absolute zero"
                    )),
                ));
            }
            section.profile_rows.push((line_no, t, temp));
            continue;
        }

        let (key, value) = match line.split_once('=') {
            Some((k, v)) => (k.trim().to_string(), v.trim().to_string()),
            None => {
                return Err(err(
                    line_no,
                    ScenarioErrorKind::MalformedEntry(line.to_string()),
                ))
            }
        };
        let allowed = keys_for(&section_name).expect("non-profile section has a key set");
        if !allowed.contains(&key.as_str()) {
            return Err(err(
                line_no,
                ScenarioErrorKind::UnknownKey {
                    section: section_name.clone(),
                    key,
                },
            ));
        }
        if section.kv.contains_key(&key) {
            return Err(err(
                line_no,
                ScenarioErrorKind::DuplicateKey {
                    section: section_name.clone(),
                    key,
                },
            ));
        }
        section.kv.insert(key, (line_no, value));
    }

    build_doc(&sections)
}

fn build_doc(sections: &BTreeMap<String, RawSection>) -> Result<ScenarioDoc, ScenarioError> {
    let a = Applier { sections };
    let mut doc = ScenarioDoc::default();

    // [supply]
    {
        let s = &mut doc.supply;
        let mut vs_rms = s.vs_rms.value();
        let mut mains = s.mains_freq.value();
        let mut diode = s.diode_drop.value();
        let mut c_filter = s.c_filter.value();
        let mut i_load = s.i_load.value();
        let mut setpoint = s.reg_setpoint.value();
        let mut dropout = s.reg_dropout.value();
        a.number("supply", "vs_rms", &mut vs_rms, positive)?;
        a.number("supply", "mains_freq", &mut mains, positive)?;
        a.number("supply", "diode_drop", &mut diode, non_negative)?;
        a.number("supply", "c_filter", &mut c_filter, positive)?;
        a.number("supply", "i_load", &mut i_load, non_negative)?;
        a.number("supply", "reg_setpoint", &mut setpoint, positive)?;
        a.number("supply", "reg_dropout", &mut dropout, non_negative)?;
        *s = RailParams {
            vs_rms: Voltage::new(vs_rms),
            mains_freq: Frequency::new(mains),
            diode_drop: Voltage::new(diode),
            c_filter: Capacitance::new(c_filter),
            i_load: Current::new(i_load),
            reg_setpoint: Voltage::new(setpoint),
            reg_dropout: Voltage::new(dropout),
        };
    }

    // [sensor.N] and [comparator.N]
    for i in 0..2 {
        let sensor_section = if i == 0 { "sensor.1" } else { "sensor.2" };
        let comp_section = if i == 0 { "comparator.1" } else { "comparator.2" };
        let mut gain = doc.sensors[i].gain;
        let mut v_ref = doc.sensors[i].v_ref_subtract.value();
        a.number(sensor_section, "gain", &mut gain, positive)?;
        a.number(sensor_section, "v_ref", &mut v_ref, non_negative)?;
        doc.sensors[i] = SensorParams {
            gain,
            v_ref_subtract: Voltage::new(v_ref),
        };

        let mut preset = doc.presets[i].value();
        let mut hyst = doc.hysteresis[i].value();
        a.number(comp_section, "preset", &mut preset, non_negative)?;
        a.number(comp_section, "hysteresis", &mut hyst, non_negative)?;
        doc.presets[i] = TemperatureC::new(preset);
        doc.hysteresis[i] = Voltage::new(hyst);

        // The derived threshold must sit inside the regulated rail.
        let threshold = preset * gain;
        let rail = doc.supply.reg_setpoint.value();
        if threshold > rail {
            let line = a
                .line_of(comp_section, "preset")
                .or_else(|| a.line_of(sensor_section, "gain"))
                .or_else(|| a.line_of("supply", "reg_setpoint"))
                .unwrap_or(0);
            return Err(err(
                line,
                ScenarioErrorKind::InvalidValue(format!(
                    "preset {preset} degC maps to {threshold} V, outside the {rail} V rail"
                )),
            ));
        }
    }

    // [timer]
    {
        let t = &mut doc.timer;
        if let Some((line, raw)) = a.raw("timer", "mode") {
            t.mode = match raw.as_str() {
                "astable" => TimerMode::Astable,
                "monostable" => TimerMode::Monostable,
                "bistable" => TimerMode::Bistable,
                other => {
                    return Err(err(*line, ScenarioErrorKind::BadMode(other.to_string())))
                }
            };
        }
        let mut vs = t.vs.value();
        let mut r1 = t.r1.value();
        let mut r2 = t.r2.value();
        let mut c = t.c.value();
        let mut r_mono = t.r_mono.value();
        a.number("timer", "vs", &mut vs, positive)?;
        a.number("timer", "r1", &mut r1, positive)?;
        a.number("timer", "r2", &mut r2, positive)?;
        a.number("timer", "c", &mut c, positive)?;
        a.number("timer", "r_mono", &mut r_mono, positive)?;
        t.vs = Voltage::new(vs);
        t.r1 = Resistance::new(r1);
        t.r2 = Resistance::new(r2);
        t.c = Capacitance::new(c);
        t.r_mono = Resistance::new(r_mono);
    }

    // [profile.N]
    for i in 0..2 {
        let name = if i == 0 { "profile.1" } else { "profile.2" };
        if let Some(section) = sections.get(name) {
            if section.profile_rows.is_empty() {
                return Err(err(
                    section.header_line,
                    ScenarioErrorKind::InvalidValue(
                        "profile section needs at least one breakpoint".into(),
                    ),
                ));
            }
            let points = section
                .profile_rows
                .iter()
                .map(|&(_, t, temp)| (Duration::new(t), TemperatureC::new(temp)))
                .collect();
            doc.profiles[i] = TemperatureProfile::new(points).map_err(|e| {
                err(
                    section.header_line,
                    ScenarioErrorKind::InvalidValue(e.to_string()),
                )
            })?;
        }
    }

    // [run] last: content errors in other sections win over completeness.
    let run_section = sections
        .get("run")
        .ok_or_else(|| err(0, ScenarioErrorKind::MissingSection("run")))?;
    let run_header = run_section.header_line;
    if let Some((line, format)) = a.integer("run", "format")? {
        if format != FORMAT_VERSION {
            return Err(err(line, ScenarioErrorKind::UnsupportedFormat(format)));
        }
    }
    for key in ["dt", "t_end"] {
        if a.raw("run", key).is_none() {
            return Err(err(
                run_header,
                ScenarioErrorKind::MissingKey {
                    section: "run",
                    key: if key == "dt" { "dt" } else { "t_end" },
                },
            ));
        }
    }
    let mut dt = doc.run.dt.value();
    let mut t_end = doc.run.t_end.value();
    let mut noise = doc.run.noise_amplitude.value();
    a.number("run", "dt", &mut dt, positive)?;
    a.number("run", "t_end", &mut t_end, positive)?;
    a.number("run", "noise", &mut noise, non_negative)?;
    if t_end <= dt {
        let line = a.line_of("run", "t_end").unwrap_or(run_header);
        return Err(err(
            line,
            ScenarioErrorKind::InvalidValue(format!("t_end = {t_end}: must exceed dt = {dt}")),
        ));
    }
    let mut seed = doc.run.seed;
    if let Some((_, s)) = a.unsigned("run", "seed")? {
        seed = s;
    }
    doc.run = RunConfig {
        dt: Duration::new(dt),
        t_end: Duration::new(t_end),
        seed,
        noise_amplitude: Voltage::new(noise),
    };

    Ok(doc)
}

fn fmt_num(v: f64) -> String {
    format!("{v}")
}

/// Canonical text form: fixed section and key order, suffix-free numbers.
/// `parse_scenario(render_scenario(doc))` reproduces `doc` exactly.
pub fn render_scenario(doc: &ScenarioDoc) -> String {
    let mut out = String::new();
    let s = &doc.supply;
    out.push_str("[supply]\n");
    out.push_str(&format!("vs_rms = {}\n", fmt_num(s.vs_rms.value())));
    out.push_str(&format!("mains_freq = {}\n", fmt_num(s.mains_freq.value())));
    out.push_str(&format!("diode_drop = {}\n", fmt_num(s.diode_drop.value())));
    out.push_str(&format!("c_filter = {}\n", fmt_num(s.c_filter.value())));
    out.push_str(&format!("i_load = {}\n", fmt_num(s.i_load.value())));
    out.push_str(&format!(
        "reg_setpoint = {}\n",
        fmt_num(s.reg_setpoint.value())
    ));
    out.push_str(&format!(
        "reg_dropout = {}\n",
        fmt_num(s.reg_dropout.value())
    ));

    for i in 0..2 {
        out.push_str(&format!("\n[sensor.{}]\n", i + 1));
        out.push_str(&format!("gain = {}\n", fmt_num(doc.sensors[i].gain)));
        out.push_str(&format!(
            "v_ref = {}\n",
            fmt_num(doc.sensors[i].v_ref_subtract.value())
        ));
    }

    for i in 0..2 {
        out.push_str(&format!("\n[comparator.{}]\n", i + 1));
        out.push_str(&format!("preset = {}\n", fmt_num(doc.presets[i].value())));
        out.push_str(&format!(
            "hysteresis = {}\n",
            fmt_num(doc.hysteresis[i].value())
        ));
    }

    let t = &doc.timer;
    out.push_str("\n[timer]\n");
    let mode = match t.mode {
        TimerMode::Astable => "astable",
        TimerMode::Monostable => "monostable",
        TimerMode::Bistable => "bistable",
    };
    out.push_str(&format!("mode = {mode}\n"));
    out.push_str(&format!("vs = {}\n", fmt_num(t.vs.value())));
    out.push_str(&format!("r1 = {}\n", fmt_num(t.r1.value())));
    out.push_str(&format!("r2 = {}\n", fmt_num(t.r2.value())));
    out.push_str(&format!("c = {}\n", fmt_num(t.c.value())));
    out.push_str(&format!("r_mono = {}\n", fmt_num(t.r_mono.value())));

    for i in 0..2 {
        out.push_str(&format!("\n[profile.{}]\n", i + 1));
        for (time, temp) in doc.profiles[i].breakpoints() {
            out.push_str(&format!(
                "{} {}\n",
                fmt_num(time.value()),
                fmt_num(temp.value())
            ));
        }
    }

    let r = &doc.run;
    out.push_str("\n[run]\n");
    out.push_str(&format!("format = {FORMAT_VERSION}\n"));
    out.push_str(&format!("dt = {}\n", fmt_num(r.dt.value())));
    out.push_str(&format!("t_end = {}\n", fmt_num(r.t_end.value())));
    out.push_str(&format!("seed = {}\n", r.seed));
    out.push_str(&format!("noise = {}\n", fmt_num(r.noise_amplitude.value())));
    out
}

#[derive(Debug, Error)]
pub enum TraceIoError {
    #[error("failed to write trace to {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// Writes a trace as a comma-separated table.
///
/// The first column is `time_s`; the header names channels exactly as the
/// engine produced them. Numbers use Rust's shortest round-trip decimal
/// rendering, so reading the file back recovers bit-identical values.
pub fn write_trace(trace: &Trace, path: &Path) -> Result<(), TraceIoError> {
    let wrap = |source: std::io::Error| TraceIoError::Io {
        path: path.display().to_string(),
        source,
    };
    let file = std::fs::File::create(path).map_err(wrap)?;
    let mut w = std::io::BufWriter::new(file);
    let mut render = || -> std::io::Result<()> {
        write!(w, "time_s")?;
        for ch in trace.channels() {
            write!(w, ",{}", ch.name)?;
        }
        writeln!(w)?;
        for k in 0..trace.len() {
            write!(w, "{}", trace.time_at(k).value())?;
            for ch in trace.channels() {
                write!(w, ",{}", ch.samples[k])?;
            }
            writeln!(w)?;
        }
        w.flush()
    };
    render().map_err(wrap)
}
