//! End-to-end checks of the CLI surface through `run_cli`.

use heatmon_cli::run_cli;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("heatmon").chain(args.iter().copied());
    let code = run_cli(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn temp_file(name: &str, contents: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("heatmon-cli-tests-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn design_defaults_reproduce_the_worked_sizing() {
    let (code, out, err) = run(&["design"]);
    assert_eq!(code, 0, "stderr: {err}");
    for expected in [
        "16.970563",
        "1.187939",
        "1683.58",
        "2200.000000",
        "718.750000",
        "0.095200",
        "0.269780",
        "0.364980",
        "0.365200",
        "2.739876",
        "7.072035",
    ] {
        assert!(out.contains(expected), "missing {expected} in:\n{out}");
    }
}

#[test]
fn design_flags_accept_si_suffixes() {
    let (code, out, _) = run(&[
        "design", "--vs", "24", "--iled", "10m", "--r1", "10k", "--r2", "10k", "--c2", "1u",
    ]);
    assert_eq!(code, 0);
    // Vpk = 24 * sqrt(2); exponential-model frequency for 10k/10k/1u.
    assert!(out.contains("33.941125"), "out:\n{out}");
    assert!(out.contains("48.089835"), "out:\n{out}");
}

#[test]
fn design_rejects_bad_number() {
    let (code, _, err) = run(&["design", "--vs", "12x"]);
    assert_eq!(code, 2);
    assert!(err.contains("invalid number"), "stderr: {err}");
}

#[test]
fn unknown_subcommand_fails_with_usage() {
    let (code, _, err) = run(&["frobnicate"]);
    assert_eq!(code, 2);
    assert!(err.contains("Usage"), "stderr: {err}");
}

#[test]
fn help_exits_zero() {
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("design"));
    assert!(out.contains("simulate"));
    assert!(out.contains("sweep"));
    assert!(out.contains("selftest"));
}

#[test]
fn simulate_writes_trace_and_summary() {
    let scenario = temp_file(
        "ok.scn",
        "[comparator.1]\npreset = 30\n\n[profile.1]\n0 25\n1 25\n2 35\n\n[run]\ndt = 10m\nt_end = 4\n",
    );
    let out_path = temp_file("ok.csv", "");
    let (code, out, err) = run(&[
        "simulate",
        scenario.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "stderr: {err}");
    assert!(out.contains("trace written"), "out: {out}");
    assert!(out.contains("sensor 1 triggered: yes"), "out: {out}");
    assert!(out.contains("sensor 2 triggered: no"), "out: {out}");
    let csv = std::fs::read_to_string(&out_path).unwrap();
    let header = csv.lines().next().unwrap();
    assert_eq!(
        header,
        "time_s,rail,sensor1_v,sensor2_v,sub1_v,sub2_v,comp1,comp2,timer_vcap,timer_out,alarm,load_enable"
    );
}

#[test]
fn simulate_rejects_bad_scenario_with_line_number() {
    let scenario = temp_file("bad.scn", "[profile.1]\n0 25\n5 30\n5 31\n\n[run]\ndt = 1m\nt_end = 1\n");
    let out_path = temp_file("bad.csv", "");
    let (code, _, err) = run(&[
        "simulate",
        scenario.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code, 1);
    assert!(err.contains("line 4"), "stderr: {err}");
}

#[test]
fn simulate_missing_file_fails() {
    let (code, _, err) = run(&["simulate", "/no/such/file.scn", "--out", "/tmp/x.csv"]);
    assert_eq!(code, 1);
    assert!(err.contains("cannot read"), "stderr: {err}");
}

#[test]
fn sweep_prints_table_with_missing_crossings() {
    let scenario = temp_file(
        "sweep.scn",
        "[profile.1]\n0 20\n10 40\n\n[run]\ndt = 10m\nt_end = 10\n",
    );
    let (code, out, err) = run(&[
        "sweep",
        scenario.to_str().unwrap(),
        "--presets",
        "25,35,60",
    ]);
    assert_eq!(code, 0, "stderr: {err}");
    let lines: Vec<&str> = out.lines().collect();
    assert!(lines[0].contains("preset_degC"));
    assert!(lines[1].contains("25.000"));
    assert!(lines[1].contains("2.5"), "row: {}", lines[1]);
    assert!(lines[2].contains("7.5"), "row: {}", lines[2]);
    assert!(lines[3].trim_end().ends_with('-'), "row: {}", lines[3]);
}

#[test]
fn simulate_bundled_demo_scenario() {
    let scenario = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios/demo.scn");
    let out_path = std::env::temp_dir().join(format!(
        "heatmon-cli-demo-{}.csv",
        std::process::id()
    ));
    let (code, out, err) = run(&[
        "simulate",
        scenario.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "stderr: {err}");
    assert!(out.contains("alarm intervals: 1"), "out: {out}");
    let csv = std::fs::read_to_string(&out_path).unwrap();
    assert!(csv.starts_with("time_s,rail,sensor1_v"), "header missing");
}

#[test]
fn selftest_passes_and_reports() {
    let (code, out, _) = run(&["selftest"]);
    assert_eq!(code, 0, "out:\n{out}");
    assert!(out.contains("12 of 12 checks passed"), "out:\n{out}");
    assert!(!out.contains("FAIL"), "out:\n{out}");
}
