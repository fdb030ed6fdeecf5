//! Command-line acceptance: the end-to-end simulator criteria, exit codes,
//! envelope schema, and byte-for-byte determinism.

use std::process::{Command, Output};
use std::time::Instant;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qkdsec"))
        .args(args)
        .env_remove("QKDSEC_SEED")
        .output()
        .expect("binary runs")
}

fn stdout_json(output: &Output) -> serde_json::Value {
    assert!(
        output.status.success(),
        "command failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    serde_json::from_slice(&output.stdout).expect("stdout is valid JSON")
}

fn report(criterion: &str, pass: bool, detail: &str) {
    println!(
        "criterion {criterion}: {} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {criterion} failed: {detail}");
}

#[test]
fn criterion_11_end_to_end_simulator() {
    // Full interception, exact mode, fixed seed: every row check passes.
    let start = Instant::now();
    let full = stdout_json(&run(&[
        "simulate", "--m", "16", "--q", "1.0", "--l", "4", "--exact", "--seed", "1",
    ]));
    let elapsed = start.elapsed();
    let checks = full["checks"].as_array().expect("checks present");
    let all_pass = !checks.is_empty() && checks.iter().all(|c| c["pass"] == true);

    // No interception: the exact joint is ideal. Seed 2 realizes a
    // full-rank hash, so the final key is exactly uniform.
    let idle = stdout_json(&run(&[
        "simulate", "--m", "16", "--q", "0", "--l", "4", "--exact", "--seed", "2",
    ]));
    let d = idle["results"]["exact"]["d"].as_f64().unwrap();
    let guess = idle["results"]["exact"]["guess_whole"].as_f64().unwrap();

    // Monte-Carlo QBER under full interception across ~1e4 sacrificed
    // positions sits within 3 sigma of 1/4.
    let mc = stdout_json(&run(&[
        "simulate",
        "--m",
        "40000",
        "--q",
        "1.0",
        "--l",
        "8",
        "--sample-fraction",
        "0.5",
        "--seed",
        "3",
    ]));
    let sampled = mc["results"]["sampled"].as_u64().unwrap() as f64;
    let qber = mc["results"]["qber_estimate"].as_f64().unwrap();
    let sigma = (0.25 * 0.75 / sampled).sqrt();
    let qber_ok = sampled >= 1e4 && (qber - 0.25).abs() <= 3.0 * sigma;

    report(
        "11 (end-to-end simulator)",
        all_pass && elapsed.as_secs() < 120 && d == 0.0 && guess == 0.0625 && qber_ok,
        &format!(
            "exact run {} checks in {:?}; idle d = {d}, guess = {guess}; \
             QBER {qber:.4} over {sampled} positions",
            checks.len(),
            elapsed
        ),
    );
}

#[test]
fn criterion_12_byte_identical_determinism() {
    let mut all_identical = true;
    for args in [
        vec!["report", "--preset", "nec-decoy"],
        vec!["verify", "--suite", "all", "--trials", "60", "--seed", "11"],
        vec![
            "counterexample", "--kind", "kpa-spike", "--bits", "4", "--known", "2", "--eps",
            "0.01", "--spike", "0.99",
        ],
        vec!["simulate", "--m", "14", "--q", "0.5", "--l", "3", "--exact", "--seed", "5"],
        vec![
            "simulate", "--m", "12", "--sweep", "q=0:0.5:1,l=2:1:3", "--exact", "--seed", "2",
            "--format", "csv",
        ],
    ] {
        let a = run(&args);
        let b = run(&args);
        if a.stdout != b.stdout || a.status != b.status {
            all_identical = false;
            eprintln!("divergent output for {args:?}");
        }
    }
    report(
        "12 (repeated runs byte-identical)",
        all_identical,
        "five command shapes, two runs each",
    );
}

#[test]
fn exit_codes_match_the_contract() {
    assert_eq!(run(&["report", "--preset", "finite-key-bb84"]).status.code(), Some(0));
    assert_eq!(
        run(&["verify", "--suite", "eq6", "--trials", "5", "--seed", "1", "--inject-failure"])
            .status
            .code(),
        Some(1),
        "injected failure must exit 1"
    );
    assert_eq!(run(&["report", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(run(&["report"]).status.code(), Some(2), "missing params is usage");
    let capacity = run(&["simulate", "--m", "30", "--exact", "--seed", "1"]);
    assert_eq!(capacity.status.code(), Some(3));
    assert!(
        String::from_utf8_lossy(&capacity.stderr).contains("24"),
        "capacity message states the cap"
    );
}

#[test]
fn injected_failure_is_named_in_the_envelope() {
    let out = run(&[
        "verify", "--suite", "eq6", "--trials", "5", "--seed", "1", "--inject-failure",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let named = value["checks"]
        .as_array()
        .unwrap()
        .iter()
        .any(|c| c["name"] == "injected-failure" && c["pass"] == false);
    assert!(named);
}

#[test]
fn envelope_schema_carries_reverifiable_checks() {
    let value = stdout_json(&run(&[
        "verify", "--suite", "eq7", "--trials", "40", "--seed", "13",
    ]));
    for field in ["command", "version", "seed", "params", "results", "checks"] {
        assert!(value.get(field).is_some(), "missing field {field}");
    }
    assert_eq!(value["command"], "verify");
    assert_eq!(value["seed"], 13);
    for check in value["checks"].as_array().unwrap() {
        assert!(check["lhs"].is_f64());
        assert!(check["rhs"].is_f64());
        assert!(check["tolerance"].is_f64());
        // The recorded numbers re-verify the claimed direction.
        let (lhs, rhs) = (check["lhs"].as_f64().unwrap(), check["rhs"].as_f64().unwrap());
        let tol = check["tolerance"].as_f64().unwrap();
        if check["name"].as_str().unwrap().contains("bound") {
            assert_eq!(check["pass"] == true, lhs <= rhs + tol);
        }
    }
}

#[test]
fn seed_env_var_is_honored_and_echoed() {
    let out = Command::new(env!("CARGO_BIN_EXE_qkdsec"))
        .args(["verify", "--suite", "markov", "--trials", "10"])
        .env("QKDSEC_SEED", "77")
        .output()
        .unwrap();
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(value["seed"], 77);
    // An explicit flag wins over the environment.
    let out = Command::new(env!("CARGO_BIN_EXE_qkdsec"))
        .args(["verify", "--suite", "markov", "--trials", "10", "--seed", "5"])
        .env("QKDSEC_SEED", "77")
        .output()
        .unwrap();
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(value["seed"], 5);
}

#[test]
fn out_flag_writes_the_file_instead_of_stdout() {
    let dir = std::env::temp_dir().join("qkdsec-out-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.json");
    let out = run(&[
        "report", "--preset", "nec-decoy", "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let written: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(written["command"], "report");
}

#[test]
fn csv_output_is_rfc4180_style() {
    let out = run(&["report", "--preset", "finite-key-bb84", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.split("\r\n");
    let header = lines.next().unwrap();
    assert!(header.starts_with("n,d,avg_whole_key_bound"));
    let row = lines.next().unwrap();
    assert_eq!(row.split(',').count(), header.split(',').count());
}

#[test]
fn config_file_flags_override() {
    let dir = std::env::temp_dir().join("qkdsec-config-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("sim.conf");
    std::fs::write(&path, "m = 12\nq = 1.0\nl = 3\nseed = 4\n").unwrap();
    let base = stdout_json(&run(&[
        "simulate", "--config", path.to_str().unwrap(),
    ]));
    assert_eq!(base["params"]["m_qubits"], 12);
    assert_eq!(base["seed"], 4);
    // Flag overrides the file.
    let over = stdout_json(&run(&[
        "simulate", "--config", path.to_str().unwrap(), "--m", "10", "--seed", "9",
    ]));
    assert_eq!(over["params"]["m_qubits"], 10);
    assert_eq!(over["seed"], 9);
}

#[test]
fn sweep_grid_has_expected_shape_and_rows_pass() {
    let value = stdout_json(&run(&[
        "simulate", "--m", "14", "--sweep", "q=0:0.25:1,l=2:2:4", "--exact", "--seed", "6",
    ]));
    let rows = value["results"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 10, "5 interception points x 2 key lengths");
    for row in rows {
        assert_eq!(row["checks_pass"], true);
    }
    // The q = 0 rows sit at criterion level zero whenever the kept length
    // covers the output length (rank permitting); at least verify they
    // never violate a bound and the first row is exactly zero here.
    assert_eq!(rows[0]["d"].as_f64().unwrap(), 0.0);
}
