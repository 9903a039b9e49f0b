//! CLI for the heat-alarm toolbox: `design`, `simulate`, `sweep`,
//! `selftest`.
//!
//! `run_cli` takes argv plus output writers and returns the process exit
//! code, so the whole surface is testable without spawning a process.
//! Numeric flags accept the same decimal SI suffixes as scenario files
//! (`68k`, `3.2m`, `1u`).

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use heatmon_core::design;
use heatmon_core::engine::{alarm_intervals, run_transient_with, sweep_preset};
use heatmon_core::scenario::{parse_scenario, parse_si_number, write_trace};
use heatmon_core::units::{
    Capacitance, Current, Frequency, Resistance, TemperatureC, Voltage,
};
use std::io::Write;
use std::path::{Path, PathBuf};

mod selftest;

pub use selftest::run_selftest;

#[derive(Parser, Debug)]
#[command(
    name = "heatmon",
    about = "Design calculator and transient simulator for a dual-sensor heat alarm circuit",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate the supply and astable sizing equations.
    Design(DesignArgs),
    /// Run a transient simulation from a scenario file and write the trace.
    Simulate {
        /// Scenario file path.
        scenario: PathBuf,
        /// Output trace path (comma-separated table).
        #[arg(long)]
        out: PathBuf,
    },
    /// Tabulate first-alarm times over a list of presets.
    Sweep {
        /// Scenario file path; its profile.1 drives both channels.
        scenario: PathBuf,
        /// Comma-separated presets in degrees Celsius.
        #[arg(long, value_delimiter = ',', required = true)]
        presets: Vec<f64>,
    },
    /// Run the built-in verification suite of worked examples.
    Selftest,
}

fn si_value(text: &str) -> Result<f64, String> {
    parse_si_number(text).ok_or_else(|| format!("invalid number {text:?} (SI suffixes: k M m u n)"))
}

#[derive(Args, Debug)]
struct DesignArgs {
    /// Transformer secondary voltage, RMS.
    #[arg(long, value_parser = si_value, default_value = "12")]
    vs: f64,
    /// Ripple fraction of the peak voltage.
    #[arg(long, value_parser = si_value, default_value = "0.07")]
    ripple: f64,
    /// Load current in amperes.
    #[arg(long, value_parser = si_value, default_value = "0.2")]
    iload: f64,
    /// Mains frequency in hertz.
    #[arg(long = "f", value_parser = si_value, default_value = "50")]
    mains_freq: f64,
    /// LED forward voltage.
    #[arg(long, value_parser = si_value, default_value = "2.7")]
    vled: f64,
    /// LED current in amperes.
    #[arg(long, value_parser = si_value, default_value = "3.2m")]
    iled: f64,
    /// Astable charge resistor R1.
    #[arg(long, value_parser = si_value, default_value = "68k")]
    r1: f64,
    /// Astable charge/discharge resistor R2.
    #[arg(long, value_parser = si_value, default_value = "68k")]
    r2: f64,
    /// Astable timing capacitor C2.
    #[arg(long, value_parser = si_value, default_value = "1u")]
    c2: f64,
    /// Low-time resistor R3.
    #[arg(long, value_parser = si_value, default_value = "8.2k")]
    r3: f64,
    /// Low-time capacitor C3.
    #[arg(long, value_parser = si_value, default_value = "47u")]
    c3: f64,
}

/// Entry point shared by `main` and the tests.
pub fn run_cli<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{rendered}");
                    0
                }
                _ => {
                    let _ = write!(err, "{rendered}");
                    2
                }
            };
        }
    };
    match cli.command {
        Command::Design(args) => cmd_design(&args, out, err),
        Command::Simulate { scenario, out: path } => cmd_simulate(&scenario, &path, out, err),
        Command::Sweep { scenario, presets } => cmd_sweep(&scenario, &presets, out, err),
        Command::Selftest => run_selftest(out),
    }
}

fn fail(err: &mut dyn Write, message: impl std::fmt::Display) -> i32 {
    let _ = writeln!(err, "error: {message}");
    1
}

fn cmd_design(args: &DesignArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let chain = || -> Result<String, design::DesignError> {
        let v_pk = design::peak_voltage(Voltage::new(args.vs))?;
        let v_ripple = design::ripple_voltage(v_pk, args.ripple)?;
        let c_exact = design::smoothing_capacitor(
            Current::new(args.iload),
            Frequency::new(args.mains_freq),
            v_ripple,
        )?;
        let c_standard = design::nearest_standard_capacitor(c_exact)?;
        let r_led = design::led_series_resistor(
            Voltage::new(5.0),
            Voltage::new(args.vled),
            Current::new(args.iled),
        )?;
        let t_on = design::astable_t_on(
            Resistance::new(args.r1),
            Resistance::new(args.r2),
            Capacitance::new(args.c2),
        )?;
        let t_off = design::astable_t_off(Resistance::new(args.r3), Capacitance::new(args.c3))?;
        let (t_exact, f_exact) = design::astable_period_and_frequency(t_on, t_off)?;
        // The worked sizing rounds T_OFF to 0.27 s before summing; report
        // that chain next to the exact one.
        let t_off_rounded = (t_off.value() * 100.0).round() / 100.0;
        let (t_rounded, f_rounded) = design::astable_period_and_frequency(
            t_on,
            heatmon_core::units::Duration::new(t_off_rounded),
        )?;
        let (t_high, t_low, f_std) = design::standard_astable_period(
            Resistance::new(args.r1),
            Resistance::new(args.r2),
            Capacitance::new(args.c2),
        )?;

        let mut s = String::new();
        s.push_str("Power supply\n");
        s.push_str(&format!("  Vpk            {:>12.6} V\n", v_pk.value()));
        s.push_str(&format!("  Vripple        {:>12.6} V\n", v_ripple.value()));
        s.push_str(&format!(
            "  C exact        {:>12.6} uF\n",
            c_exact.value() * 1e6
        ));
        s.push_str(&format!(
            "  C standard     {:>12.6} uF  (E6 pick at or above exact)\n",
            c_standard.value() * 1e6
        ));
        s.push_str(&format!("  R_led          {:>12.6} ohm\n", r_led.value()));
        s.push_str("Astable timing, 0.7-coefficient formula\n");
        s.push_str(&format!("  T_ON           {:>12.6} s\n", t_on.value()));
        s.push_str(&format!("  T_OFF          {:>12.6} s\n", t_off.value()));
        s.push_str(&format!("  T exact        {:>12.6} s\n", t_exact.value()));
        s.push_str(&format!(
            "  T rounded      {:>12.6} s  (T_OFF rounded to {t_off_rounded} s)\n",
            t_rounded.value()
        ));
        s.push_str(&format!("  F exact        {:>12.6} Hz\n", f_exact.value()));
        s.push_str(&format!(
            "  F rounded      {:>12.6} Hz\n",
            f_rounded.value()
        ));
        s.push_str("Astable timing, exponential model (ln 2, discharge through R2)\n");
        s.push_str(&format!("  T_high         {:>12.6} s\n", t_high.value()));
        s.push_str(&format!("  T_low          {:>12.6} s\n", t_low.value()));
        s.push_str(&format!("  F              {:>12.6} Hz\n", f_std.value()));
        Ok(s)
    };
    match chain() {
        Ok(table) => {
            let _ = write!(out, "{table}");
            0
        }
        Err(e) => fail(err, e),
    }
}

fn load_scenario(
    path: &Path,
    err: &mut dyn Write,
) -> Option<heatmon_core::scenario::ScenarioDoc> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(err, "error: cannot read {}: {e}", path.display());
            return None;
        }
    };
    match parse_scenario(&text) {
        Ok(doc) => Some(doc),
        Err(e) => {
            let _ = writeln!(err, "error: {}: {e}", path.display());
            None
        }
    }
}

fn cmd_simulate(
    scenario_path: &Path,
    trace_path: &Path,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    let Some(doc) = load_scenario(scenario_path, err) else {
        return 1;
    };
    let (sys, profiles, run) = match doc.to_system() {
        Ok(v) => v,
        Err(e) => return fail(err, e),
    };
    let trace = match run_transient_with(&sys, &profiles, &run) {
        Ok(t) => t,
        Err(e) => return fail(err, e),
    };
    if let Err(e) = write_trace(&trace, trace_path) {
        return fail(err, e);
    }
    let report = match alarm_intervals(&trace) {
        Ok(r) => r,
        Err(e) => return fail(err, e),
    };
    let _ = writeln!(
        out,
        "trace written to {} ({} samples, dt = {} s)",
        trace_path.display(),
        trace.len(),
        trace.dt().value()
    );
    if report.intervals.is_empty() {
        let _ = writeln!(out, "alarm intervals: none");
    } else {
        let _ = writeln!(out, "alarm intervals: {}", report.intervals.len());
        const LISTED: usize = 20;
        for (start, end) in report.intervals.iter().take(LISTED) {
            let _ = writeln!(out, "  [{:.6}, {:.6}) s", start.value(), end.value());
        }
        if report.intervals.len() > LISTED {
            let _ = writeln!(out, "  ... {} more", report.intervals.len() - LISTED);
        }
    }
    for (i, fired) in report.triggered.iter().enumerate() {
        let _ = writeln!(
            out,
            "sensor {} triggered: {}",
            i + 1,
            if *fired { "yes" } else { "no" }
        );
    }
    0
}

fn cmd_sweep(
    scenario_path: &Path,
    presets: &[f64],
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    let Some(doc) = load_scenario(scenario_path, err) else {
        return 1;
    };
    let (sys, profiles, run) = match doc.to_system() {
        Ok(v) => v,
        Err(e) => return fail(err, e),
    };
    let presets: Vec<TemperatureC> = presets.iter().map(|&p| TemperatureC::new(p)).collect();
    let rows = match sweep_preset(&sys, &profiles[0], &presets, run.dt, run.t_end) {
        Ok(r) => r,
        Err(e) => return fail(err, e),
    };
    let _ = writeln!(out, "{:>12}  {:>16}", "preset_degC", "first_alarm_s");
    for (preset, first) in rows {
        match first {
            Some(t) => {
                let _ = writeln!(out, "{:>12.3}  {:>16.6}", preset.value(), t.value());
            }
            None => {
                let _ = writeln!(out, "{:>12.3}  {:>16}", preset.value(), "-");
            }
        }
    }
    0
}
