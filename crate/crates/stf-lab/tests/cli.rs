//! End-to-end tests that drive the compiled binary exactly as a shell user
//! would: spawn it, feed it JSON configs, and inspect exit codes, stderr
//! lines, stdout summaries, and written artifacts.

use std::path::Path;
use std::process::Command;

use serde_json::{json, Value};

// ==================== Harness ====================

fn run(args: &[&str]) -> (i32, String, String) {
    let output = Command::new(env!("CARGO_BIN_EXE_stf-lab"))
        .args(args)
        .output()
        .expect("the binary should spawn");
    let code = output.status.code().expect("the binary should exit, not die on a signal");
    (
        code,
        String::from_utf8(output.stdout).expect("stdout should be UTF-8"),
        String::from_utf8(output.stderr).expect("stderr should be UTF-8"),
    )
}

/// Parse the single machine-readable summary line a command prints.
fn summary(stdout: &str) -> Value {
    let line = stdout.lines().next().expect("stdout should carry a summary line");
    serde_json::from_str(line).expect("the summary line should be valid JSON")
}

fn write_file(path: &Path, text: &str) {
    std::fs::write(path, text).expect("test fixture should be writable");
}

fn read_json_file(path: &Path) -> Value {
    let bytes = std::fs::read(path).expect("artifact should exist");
    serde_json::from_slice(&bytes).expect("artifact should be valid JSON")
}

fn num(v: &Value, key: &str) -> f64 {
    v[key].as_f64().unwrap_or_else(|| panic!("summary field {key} should be a number: {v}"))
}

const STEP5_SCENARIO: &str = r#"{
  "name": "gentle push",
  "input": { "kind": "step", "force_n": 5.0 },
  "duration_s": 2.0,
  "analyses": ["step_metrics", "energy"]
}"#;

// ==================== simulate ====================

#[test]
fn simulate_writes_trace_and_reports_converged_step() {
    let dir = tempfile::tempdir().expect("tempdir");
    let config = dir.path().join("step5.json");
    let out = dir.path().join("trace.csv");
    write_file(&config, STEP5_SCENARIO);

    let (code, stdout, stderr) = run(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--preset",
        "fixed_sfc",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "simulate should succeed, stderr: {stderr}");

    let csv = std::fs::read_to_string(&out).expect("trace should be written");
    assert_eq!(
        csv.lines().next().unwrap(),
        "time,f_ext,f_human,accel,v_internal,v_output,position,work_in,dissipated,storage",
        "trace header is a published interface and must not drift"
    );
    assert_eq!(csv.lines().count(), 1002, "1001 samples plus the header");

    let s = summary(&stdout);
    assert_eq!(s["step_verdict"], "converged");
    let final_v = num(&s, "final_v_output_mps");
    assert!(
        (final_v - 0.049_024).abs() < 5e-4,
        "5 N step should settle near 49 mm/s, got {final_v}"
    );
    let residual = num(&s["energy"], "balance_residual_j").abs();
    assert!(residual < 1e-2, "energy books should nearly balance, residual {residual} J");
    let tau = num(&s["step_metrics"], "time_constant_numeric_s");
    assert!((0.02..0.05).contains(&tau), "rise time should be a few tens of ms, got {tau}");
}

#[test]
fn malformed_scenario_is_rejected_without_artifacts() {
    let dir = tempfile::tempdir().expect("tempdir");
    let config = dir.path().join("broken.json");
    let out = dir.path().join("trace.csv");
    write_file(&config, "{ this is not json");

    let (code, _, stderr) = run(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--preset",
        "fixed_sfc",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 3);
    assert!(
        stderr.starts_with("error: invalid-input:"),
        "stderr should carry a one-line class-prefixed reason, got: {stderr}"
    );
    assert_eq!(stderr.lines().count(), 1, "exactly one stderr line");
    assert!(!out.exists(), "a failed run must not leave an output file behind");
}

#[test]
fn oversized_sample_time_is_flagged_oscillatory() {
    let dir = tempfile::tempdir().expect("tempdir");
    let config = dir.path().join("coarse.json");
    let out = dir.path().join("trace.csv");
    write_file(
        &config,
        r#"{"name":"coarse","input":{"kind":"step","force_n":50.0},"duration_s":3.0,"dt_s":0.008}"#,
    );

    let (code, stdout, stderr) = run(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--preset",
        "fixed_sfc",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "a bounded limit cycle still completes, stderr: {stderr}");
    assert_eq!(summary(&stdout)["step_verdict"], "oscillatory");
}

#[test]
fn divergent_run_exits_with_its_own_code_and_no_file() {
    let dir = tempfile::tempdir().expect("tempdir");
    let config = dir.path().join("divergent.json");
    let out = dir.path().join("trace.csv");
    write_file(
        &config,
        r#"{"name":"blowup","input":{"kind":"step","force_n":50.0},"duration_s":3.0,"dt_s":0.05}"#,
    );

    let (code, _, stderr) = run(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--preset",
        "fixed_sfc",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 4, "divergence has a dedicated exit code");
    assert!(stderr.starts_with("error: divergence:"), "got: {stderr}");
    assert!(!out.exists(), "a diverged run must not leave a partial trace");
}

// ==================== check ====================

#[test]
fn sample_time_check_reports_bound_and_gates_exit_code() {
    let (code, stdout, _) = run(&["check", "--preset", "fixed_sfc", "--f-max-n", "50"]);
    assert_eq!(code, 0);
    let s = summary(&stdout);
    assert_eq!(s["satisfied"], true);
    assert_eq!(s["class"], "safe");
    let bound = num(&s, "dt_bound_s");
    assert!(
        (bound - 0.006_706_0).abs() < 5e-5,
        "50 N bound for the fixed-base set should be 6.706 ms, got {bound}"
    );

    let (code, stdout, stderr) =
        run(&["check", "--preset", "fixed_sfc", "--f-max-n", "50", "--dt-s", "0.008"]);
    assert_eq!(code, 2, "a violated check is a constraint failure, not an input error");
    assert!(stderr.starts_with("error: constraint-violated:"), "got: {stderr}");
    let s = summary(&stdout);
    assert_eq!(s["satisfied"], false, "the summary still prints so scripts can read the margin");
    assert_eq!(s["class"], "violated");
}

// ==================== tune ====================

#[test]
fn tuned_set_round_trips_through_check_and_simulate() {
    let dir = tempfile::tempdir().expect("tempdir");
    let req_path = dir.path().join("requirements.json");
    let tuned_path = dir.path().join("tuned.json");
    let requirements = json!({
        "f_ease_n": 5.0,
        "f_interf_n": 60.0,
        "v_d_mps": 0.05,
        "v_c_mps": 0.05 * 12f64.cbrt(),
        "w_c_ease_rad_s": 17.0,
        "dt_s": 0.002,
        "m_kg": 1.0
    });
    write_file(&req_path, &requirements.to_string());

    let (code, stdout, stderr) = run(&[
        "tune",
        "--config",
        req_path.to_str().unwrap(),
        "--out",
        tuned_path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "tuning should succeed, stderr: {stderr}");
    let s = summary(&stdout);
    assert!((num(&s, "n") - 3.0).abs() < 1e-3, "exponent should be 3.000");
    assert!((num(&s, "mu") - 166.81).abs() < 0.1, "damping coefficient should be 166.81");
    assert!((num(&s, "g") - 0.160_96).abs() < 1e-4, "output gain should be 0.16096");
    assert_eq!(s["satisfied"], true, "the tuned set should verify against its own requirements");

    let artifact = read_json_file(&tuned_path);
    assert_eq!(artifact["params"]["type"], "sfc");
    assert_eq!(artifact["tuning"]["verification"]["satisfied"], true);

    // The artifact feeds straight back into `check` unchanged.
    let (code, stdout, _) =
        run(&["check", "--params", tuned_path.to_str().unwrap(), "--f-max-n", "60"]);
    assert_eq!(code, 0, "the tuned set must satisfy its own sample-time bound");
    assert_eq!(summary(&stdout)["satisfied"], true);

    // And into `simulate`, via a relative file reference.
    let scenario_path = dir.path().join("scenario.json");
    write_file(
        &scenario_path,
        r#"{
          "name": "tuned ease point",
          "controller": { "file": "tuned.json" },
          "input": { "kind": "step", "force_n": 5.0 },
          "duration_s": 2.0
        }"#,
    );
    let out = dir.path().join("trace.csv");
    let (code, stdout, _) = run(&[
        "simulate",
        "--config",
        scenario_path.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let final_v = num(&summary(&stdout), "final_v_output_mps");
    assert!(
        (final_v - 0.05).abs() < 1e-3,
        "the tuned set must hit the commanded ease velocity exactly, got {final_v}"
    );
}

// ==================== bode ====================

#[test]
fn linear_controller_bode_is_amplitude_independent() {
    let dir = tempfile::tempdir().expect("tempdir");
    let out = dir.path().join("bode.csv");
    let (code, stdout, stderr) = run(&[
        "bode",
        "--preset",
        "fixed_lac",
        "--amplitude-n",
        "1",
        "--amplitude-n",
        "10",
        "--amplitude-n",
        "100",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "stderr: {stderr}");

    let csv = std::fs::read_to_string(&out).expect("sweep should be written");
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "amplitude,omega,gain_db,phase_deg",
        "sweep header is a published interface and must not drift"
    );
    // Group gains by frequency; a linear law must not care about amplitude.
    let mut by_omega: std::collections::BTreeMap<String, Vec<f64>> = Default::default();
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells.len(), 4, "row should have 4 cells: {line}");
        by_omega
            .entry(cells[1].to_string())
            .or_default()
            .push(cells[2].parse().expect("gain cell should parse"));
    }
    assert_eq!(by_omega.len(), 60, "one row per grid frequency per amplitude");
    for (omega, gains) in &by_omega {
        assert_eq!(gains.len(), 3, "three amplitudes at omega {omega}");
        let spread =
            gains.iter().cloned().fold(f64::MIN, f64::max) - gains.iter().cloned().fold(f64::MAX, f64::min);
        assert!(
            spread < 1e-6,
            "linear gain must be amplitude-independent at omega {omega}, spread {spread} dB"
        );
    }

    for curve in summary(&stdout)["curves"].as_array().expect("curves array") {
        let wc = num(curve, "bandwidth_rad_s");
        assert!(
            (wc - 17.0).abs() / 17.0 < 0.05,
            "first-order crossover should sit at mu/m = 17 rad/s, got {wc}"
        );
    }
}

// ==================== flags & invalid input ====================

#[test]
fn seedless_flag_is_a_bare_switch() {
    let (code, _, stderr) =
        run(&["check", "--preset", "fixed_sfc", "--f-max-n", "50", "--seedless"]);
    assert_eq!(code, 0, "bare --seedless is accepted, stderr: {stderr}");

    let (code, _, stderr) =
        run(&["check", "--preset", "fixed_sfc", "--f-max-n", "50", "--seedless=yes"]);
    assert_eq!(code, 3, "--seedless takes no value");
    assert!(stderr.starts_with("error: invalid-args:"), "got: {stderr}");
}

#[test]
fn unknown_preset_and_bad_amplitude_are_invalid_input() {
    let (code, _, stderr) = run(&["check", "--preset", "no_such", "--f-max-n", "5"]);
    assert_eq!(code, 3);
    assert!(
        stderr.contains("available:") && stderr.contains("fixed_sfc"),
        "the error should list the known presets, got: {stderr}"
    );

    let dir = tempfile::tempdir().expect("tempdir");
    let out = dir.path().join("bode.csv");
    let (code, _, stderr) = run(&[
        "bode",
        "--preset",
        "fixed_sfc",
        "--amplitude-n",
        "0",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 3, "zero drive amplitude is out of domain");
    assert!(stderr.starts_with("error: invalid-input:"), "got: {stderr}");
    assert!(!out.exists());
}

// ==================== tables ====================

#[test]
fn tables_regenerate_reference_values() {
    let dir = tempfile::tempdir().expect("tempdir");
    let out_dir = dir.path().join("tables");
    let (code, stdout, stderr) = run(&[
        "tables",
        "--which",
        "4",
        "--which",
        "5",
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "stderr: {stderr}");
    assert_eq!(stdout.lines().count(), 2, "one summary line per table");

    let t4 = read_json_file(&out_dir.join("table_4.json"));
    let rows = t4["rows"].as_array().expect("rows");
    let expected_tau = [0.1629, 0.0351, 0.00756];
    for (row, expect) in rows.iter().zip(expected_tau) {
        let analytic = num(row, "analytic");
        assert!(
            (analytic - expect).abs() / expect < 2e-3,
            "closed-form time constant should be {expect} s, got {analytic}"
        );
        let rel = num(row, "relative_error");
        assert!(rel < 0.15, "measured run should land within 15% of the closed form, got {rel}");
    }

    let t5 = read_json_file(&out_dir.join("table_5.json"));
    for row in t5["rows"].as_array().expect("rows") {
        let gap = (num(row, "analytic") - num(row, "reproduced_numeric")).abs();
        assert!(
            gap <= 0.01,
            "steady-state gain variation is exact in both routes, gap {gap} dB"
        );
    }
}

// ==================== classify ====================

#[test]
fn collision_profile_is_labelled_impact() {
    let dir = tempfile::tempdir().expect("tempdir");
    let config = dir.path().join("impulse.json");
    write_file(
        &config,
        r#"{
          "name": "collision on a quiet hold",
          "input": { "kind": "impulse_profile", "f_low_n": 5.0, "f_high_n": 50.0, "t_on_s": 1.0, "t_off_s": 1.4 },
          "dt_s": 0.002,
          "duration_s": 3.0
        }"#,
    );
    let (code, stdout, stderr) = run(&[
        "classify",
        "--config",
        config.to_str().unwrap(),
        "--f-th-n",
        "10",
        "--eps-plus-hz",
        "2.0",
        "--eps-minus-hz",
        "0.3",
    ]);
    assert_eq!(code, 0, "stderr: {stderr}");
    let s = summary(&stdout);
    assert_eq!(s["label"], "impact");
    assert!(num(&s, "f_max_n") >= 10.0, "peak force should clear the threshold");
    assert!(
        num(&s, "w_max_hz") > 2.0,
        "a sharp onset should push spectral content above the band edge"
    );
}

// ==================== ik ====================

#[test]
fn two_link_pose_maps_task_velocity_to_joint_rates() {
    let dir = tempfile::tempdir().expect("tempdir");
    let config = dir.path().join("ik.json");
    // Elbow at a right angle: the Jacobian is exactly invertible by hand,
    //   J = [[-0.5, -0.5], [0.5, 0.0]],  v = (0.1, 0)  =>  rates (0, -0.2).
    write_file(
        &config,
        r#"{
          "link1_m": 0.5,
          "link2_m": 0.5,
          "q1_rad": 0.0,
          "q2_rad": 1.5707963267948966,
          "task_velocity_mps": [0.1, 0.0]
        }"#,
    );
    let (code, stdout, stderr) = run(&["ik", "--config", config.to_str().unwrap()]);
    assert_eq!(code, 0, "stderr: {stderr}");
    let s = summary(&stdout);
    assert_eq!(s["mode"], "two_link");
    assert_eq!(s["damped"], false, "this pose is far from singular");
    let rates = s["joint_rates_rad_s"].as_array().expect("rates");
    let q1 = rates[0].as_f64().unwrap();
    let q2 = rates[1].as_f64().unwrap();
    assert!(q1.abs() < 1e-9, "shoulder rate should vanish, got {q1}");
    assert!((q2 + 0.2).abs() < 1e-9, "elbow rate should be -0.2 rad/s, got {q2}");
}

// ==================== determinism ====================

#[test]
fn identical_invocations_are_byte_identical() {
    let dir = tempfile::tempdir().expect("tempdir");
    let config = dir.path().join("step5.json");
    write_file(&config, STEP5_SCENARIO);

    let mut artifacts = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let out = dir.path().join(name);
        let (code, stdout, _) = run(&[
            "simulate",
            "--config",
            config.to_str().unwrap(),
            "--preset",
            "fixed_sfc",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        artifacts.push((std::fs::read(&out).expect("trace should exist"), stdout));
    }
    assert_eq!(artifacts[0].0, artifacts[1].0, "traces must be byte-identical");
    assert_eq!(artifacts[0].1, artifacts[1].1, "summaries must be byte-identical");
}
