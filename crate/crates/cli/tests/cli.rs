use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

const TWO_SNAPSHOTS: &str = "time_s,n,species,f1,f2,f3,f4\n\
                             43205,63600000,4944,447,70,0,0\n\
                             86405,124800000,5127,95,42,0,0\n";

fn fuzzstat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fuzzstat")).args(args).output().unwrap()
}

fn with_stdin(args: &[&str], stdin: &[u8]) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_fuzzstat"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin).unwrap();
    child.wait_with_output().unwrap()
}

fn json_lines(out: &Output) -> Vec<Value> {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    ((a - b) / b).abs() <= tol
}

#[test]
fn estimate_reports_coverage_and_time_to_next_discovery() {
    let dir = tempfile::tempdir().unwrap();
    let log = write(dir.path(), "log.csv", TWO_SNAPSHOTS);
    let rows = json_lines(&fuzzstat(&["estimate", "--all-rows", "--format", "json-lines", &log]));
    assert_eq!(rows.len(), 2);

    let half = &rows[0];
    assert_eq!(half["species"], 4944);
    assert!((half["coverage"].as_f64().unwrap() - 0.776).abs() < 5e-4);
    assert!((half["seconds_to_next"].as_f64().unwrap() - 96.6).abs() < 0.1);
    assert!(close(half["inputs_to_next"].as_f64().unwrap(), 142_282.0, 1e-5));

    let day = &rows[1];
    assert!((day["coverage"].as_f64().unwrap() - 0.979).abs() < 5e-4);
    // 15 min 9 s
    assert!((day["seconds_to_next"].as_f64().unwrap() - 909.0).abs() < 1.0);

    // default shows the latest row only
    let last = json_lines(&fuzzstat(&["estimate", "--format", "json-lines", &log]));
    assert_eq!(last, rows[1..]);
}

#[test]
fn effort_inverts_the_extrapolator() {
    let dir = tempfile::tempdir().unwrap();
    let abundance = write(
        dir.path(),
        "a.csv",
        "time_s,n,species,f1,f2,f3,f4\n60,10000,100,10,5,0,0\n",
    );
    let rows = json_lines(&fuzzstat(&["effort", "--target", "0.95", "--format", "json-lines", &abundance]));
    assert_eq!(rows[0]["required_inputs"], 5978);
    assert_eq!(rows[0]["required_inputs_exact"], 5978);
    assert!(close(rows[0]["richness"].as_f64().unwrap(), 109.999, 1e-12));

    let incidence = write(
        dir.path(),
        "i.csv",
        "time_s,n,species,q1,q2,q3,q4,v\n60,10000,100,10,5,0,0,500000\n",
    );
    let rows = json_lines(&fuzzstat(&["effort", "--target", "0.95", "--format", "json-lines", &incidence]));
    assert_eq!(rows[0]["required_inputs"], 5979);
    assert!(close(rows[0]["formula"].as_f64().unwrap(), 5978.889_340_282_207, 1e-9));
}

#[test]
fn extrapolate_accepts_inputs_and_durations() {
    let dir = tempfile::tempdir().unwrap();
    let log = write(dir.path(), "log.csv", TWO_SNAPSHOTS);
    let rows = json_lines(&fuzzstat(&[
        "extrapolate", "--horizon", "0,1h", "--horizon", "1000000", "--format", "json-lines", &log,
    ]));
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0]["predicted_species"].as_f64().unwrap(), 5127.0);
    assert!(close(rows[0]["predicted_risk"].as_f64().unwrap(), 95.0 / 124_800_000.0, 1e-8));
    // 124.8M inputs over 86405 s, 3600 s ahead
    assert_eq!(rows[1]["horizon"], "1h");
    assert_eq!(rows[1]["m_star"], 5_199_699);
    assert_eq!(rows[2]["m_star"], 1_000_000);
    let s = |r: &Value| r["predicted_species"].as_f64().unwrap();
    assert!(s(&rows[0]) < s(&rows[2]) && s(&rows[2]) < s(&rows[1]));

    // durations need timestamps
    let out = with_stdin(&["extrapolate", "--horizon", "1h"], b"a\nb\nb\n");
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn simulated_campaign_pipes_into_estimate() {
    let sim = fuzzstat(&["simulate", "--species", "300", "--inputs", "30000", "--seed", "5"]);
    assert!(sim.status.success());
    let text = String::from_utf8(sim.stdout).unwrap();
    assert!(text.starts_with("time_s,n,species,f1,f2,f3,f4\n"));
    assert!(text.trim_end().ends_with(|c: char| c.is_ascii_digit()));

    let rows = json_lines(&with_stdin(&["estimate", "--format", "json-lines"], text.as_bytes()));
    assert_eq!(rows[0]["inputs"], 30000);
    assert!(rows[0]["coverage"].as_f64().unwrap() >= 0.98);

    // same seed, same bytes
    let again = fuzzstat(&["simulate", "--species", "300", "--inputs", "30000", "--seed", "5"]);
    assert_eq!(again.stdout, text.as_bytes());
    let other = fuzzstat(&["simulate", "--species", "300", "--inputs", "30000", "--seed", "6"]);
    assert_ne!(other.stdout, text.as_bytes());
}

#[test]
fn event_files_and_truth() {
    let dir = tempfile::tempdir().unwrap();
    let events = dir.path().join("e.txt");
    let truth = dir.path().join("t.csv");
    let sim = Command::new(env!("CARGO_BIN_EXE_fuzzstat"))
        .args(["simulate", "--model", "incidence", "--species", "100", "--max-rate", "0.3", "--inputs", "2000"])
        .arg("--events")
        .arg(&events)
        .arg("--truth")
        .arg(&truth)
        .output()
        .unwrap();
    assert!(sim.status.success());
    let text = String::from_utf8(sim.stdout).unwrap();
    let last_row = text.lines().last().unwrap().to_string();
    let species: u64 = last_row.split(',').nth(2).unwrap().parse().unwrap();

    let rows = json_lines(&fuzzstat(&[
        "estimate", "--model", "incidence", "--format", "json-lines", events.to_str().unwrap(),
    ]));
    assert_eq!(rows[0]["inputs"], 2000);
    assert_eq!(rows[0]["species"], species);
    assert!(rows[0]["residual_risk_approx"].is_number());
    assert!(std::fs::read_to_string(&truth).unwrap().lines().count() > 1);
}

#[test]
fn output_formats() {
    let dir = tempfile::tempdir().unwrap();
    let log = write(dir.path(), "log.csv", TWO_SNAPSHOTS);
    let table = String::from_utf8(fuzzstat(&["estimate", &log]).stdout).unwrap();
    assert!(table.lines().any(|l| l.starts_with("coverage") && l.ends_with(": 0.979474")));

    let csv = String::from_utf8(fuzzstat(&["estimate", "--all-rows", "--format", "csv", &log]).stdout).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("time_s,inputs,species,singletons,doubletons,method,richness"));

    let first = fuzzstat(&["estimate", "--bootstrap", "50", "--seed", "3", "--format", "json-lines", &log]);
    let second = fuzzstat(&["estimate", "--bootstrap", "50", "--seed", "3", "--format", "json-lines", &log]);
    assert_eq!(first.stdout, second.stdout);
    let row = &json_lines(&first)[0];
    assert!(row["ci_lower"].as_f64().unwrap() <= row["richness"].as_f64().unwrap());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let log = write(dir.path(), "log.csv", TWO_SNAPSHOTS);

    assert_eq!(fuzzstat(&["--help"]).status.code(), Some(0));
    assert_eq!(fuzzstat(&["--version"]).status.code(), Some(0));
    assert_eq!(fuzzstat(&["estimate", "--bogus"]).status.code(), Some(1));
    assert_eq!(fuzzstat(&["effort", "--target", "1.5", &log]).status.code(), Some(1));
    assert_eq!(fuzzstat(&["estimate", "--method", "known:10", &log]).status.code(), Some(1));

    let backwards = write(
        dir.path(),
        "back.csv",
        "time_s,n,species,f1,f2,f3,f4\n5,100,4,0,0,0,0\n3,200,4,0,0,0,0\n",
    );
    assert_eq!(fuzzstat(&["estimate", &backwards]).status.code(), Some(2));
    assert_eq!(with_stdin(&["estimate"], b"bad token!\n").status.code(), Some(2));

    let reached = fuzzstat(&["effort", "--target", "0.5", "--format", "json-lines", &log]);
    assert_eq!(reached.status.code(), Some(3));
    let err: Value = serde_json::from_slice(&reached.stderr).unwrap();
    assert_eq!(err["exit_code"], 3);
    assert_eq!(err["error"], "already_achieved");

    let empty = with_stdin(&["estimate", "--format", "json-lines"], b"");
    assert_eq!(empty.status.code(), Some(3));
    assert!(empty.stdout.is_empty());
}

#[test]
fn undefined_rows_do_not_abort_all_rows() {
    let dir = tempfile::tempdir().unwrap();
    let log = write(
        dir.path(),
        "log.csv",
        "time_s,n,species,f1,f2,f3,f4\n1,1,1,1,0,0,0\n10,10000,100,10,5,0,0\n",
    );
    let out = fuzzstat(&["effort", "--all-rows", "--target", "0.95", "--format", "json-lines", &log]);
    let rows = json_lines(&out);
    assert!(rows[0]["error"].is_string());
    assert_eq!(rows[1]["required_inputs"], 5978);
}

#[test]
fn evaluate_simulated_and_replayed() {
    let out = fuzzstat(&[
        "evaluate", "--species", "200", "--inputs", "20000", "--runs", "4", "--checkpoints", "3", "--format", "csv",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("checkpoint,mean_bias,imprecision,n_runs"));
    assert_eq!(lines.last(), Some("20000,0,0,4"));

    let dir = tempfile::tempdir().unwrap();
    let logs: Vec<String> = (0..3)
        .map(|seed| {
            let sim = fuzzstat(&["simulate", "--species", "300", "--inputs", "20000", "--seed", &seed.to_string()]);
            write(dir.path(), &format!("run{seed}.csv"), &String::from_utf8(sim.stdout).unwrap())
        })
        .collect();
    let mut args = vec!["evaluate", "--format", "json-lines"];
    args.extend(logs.iter().map(String::as_str));
    let rows = json_lines(&fuzzstat(&args));
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r["n_runs"] == 3));

    assert_eq!(fuzzstat(&["evaluate", "--runs", "1"]).status.code(), Some(3));
}

#[test]
fn watch_matches_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let log = write(dir.path(), "log.csv", TWO_SNAPSHOTS);
    let watched = fuzzstat(&["watch", "--iterations", "1", "--interval", "10ms", "--format", "json-lines", &log]);
    let direct = fuzzstat(&["estimate", "--format", "json-lines", &log]);
    assert!(watched.status.success());
    assert_eq!(watched.stdout, direct.stdout);
}
