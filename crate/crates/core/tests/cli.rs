use serde_json::Value;
use sigmoment::cli::run;
use sigmoment::Rat;

fn call(args: &[&str], input: &str) -> (i32, String, String) {
    let mut argv = vec!["sigmoment"];
    argv.extend_from_slice(args);
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(argv, &mut input.as_bytes(), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(args: &[&str], input: &str) -> (i32, Value) {
    let (code, out, err) = call(args, input);
    let v = serde_json::from_str(&out).unwrap_or_else(|e| panic!("{e}: {out} {err}"));
    (code, v)
}

fn rat(v: &Value) -> Rat {
    match v {
        Value::Number(n) => Rat::int(n.as_i64().unwrap() as i128),
        Value::String(s) => s.parse().unwrap(),
        other => panic!("not a rational: {other}"),
    }
}

const LIGHT: &str = r#"{"tasks": [
  {"name": "fast", "offset": 0, "period": 2, "exec": 1},
  {"name": "slow", "offset": 0, "period": 5, "exec": 1}
]}"#;

const OVER: &str = r#"{"tasks": [
  {"name": "a", "period": 2, "exec": 1},
  {"name": "b", "period": 3, "exec": 1},
  {"name": "c", "period": 6, "exec": 2}
]}"#;

const FRACTIONAL: &str = r#"{"tasks": [
  {"name": "x", "offset": "1/3", "period": "7/2", "exec": "5/4"},
  {"name": "y", "period": 5, "exec": "3/2"}
]}"#;

#[test]
fn check_schedulable_window() {
    let (code, v) = json(&["check", "-", "--window", "0", "10"], LIGHT);
    assert_eq!(code, 0);
    assert_eq!(v["all_schedulable"], Value::Bool(true));
    assert!(v["tasks"].as_array().unwrap().iter().all(|t| t["schedulable"] == Value::Bool(true)));
}

#[test]
fn worst_case_overload() {
    let (code, v) = json(&["worst-case", "-"], OVER);
    assert_eq!(code, 1);
    let c = v["tasks"].as_array().unwrap().iter().find(|t| t["task"] == "c").unwrap();
    assert_eq!(rat(&c["margin"]), Rat::int(-1));
    assert_eq!(c["schedulable"], Value::Bool(false));
}

#[test]
fn worst_case_two_tasks_reports_both_orders() {
    let (code, v) = json(&["worst-case", "-"], LIGHT);
    assert_eq!(code, 0);
    assert_eq!(v["two_task"]["rms_ok"], Value::Bool(true));
    assert!(v["two_task"].get("reversed_ok").is_some());
}

#[test]
fn bounds_fields() {
    let (code, v) = json(&["bounds", "-", "--derive-bound"], OVER);
    assert_eq!(code, 0);
    assert_eq!(rat(&v["total"]), Rat::frac(7, 6));
    assert!(v["ll_bound"].as_f64().unwrap() > 0.77);
    assert_eq!(v["passes_exact"], Value::Bool(false));
    assert!((v["derived"]["u_star"].as_f64().unwrap() - 0.8284271247).abs() < 1e-9);
}

#[test]
fn rationals_round_trip() {
    let (code, v) = json(&["validate", "-"], FRACTIONAL);
    assert_eq!(code, 0);
    let x = &v["tasks"][0];
    assert_eq!(x["offset"], Value::String("1/3".into()));
    assert_eq!(rat(&x["period"]), Rat::frac(7, 2));
    // the echoed file validates to the same set
    let (_, again) = json(&["validate", "-"], &v.to_string());
    assert_eq!(again, v);
}

#[test]
fn approx_siblings() {
    let (_, v) = json(&["bounds", "-", "--approx"], FRACTIONAL);
    let exact = rat(&v["total"]);
    assert!((v["total_approx"].as_f64().unwrap() - exact.to_f64()).abs() < 1e-12);
}

#[test]
fn simulate_formats() {
    let (code, out, _) = call(&["simulate", "-", "--window", "0", "10", "--trace-format", "csv"], LIGHT);
    assert_eq!(code, 0);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("task,start,end"));
    assert_eq!(lines.next(), Some("fast,0,1"));
    let (code, v) = json(&["simulate", "-", "--window", "0", "6"], OVER);
    assert_eq!(code, 1);
    assert!(!v["deadline_misses"].as_array().unwrap().is_empty());
}

#[test]
fn explicit_priority_changes_the_schedule() {
    let input = r#"{"tasks": [{"name": "a", "period": 2, "exec": 1}, {"name": "b", "period": 5, "exec": 2}]}"#;
    let (code, _) = json(&["check", "-", "--window", "0", "10"], input);
    assert_eq!(code, 0);
    let (code, v) = json(&["check", "-", "--window", "0", "10", "--priority", "explicit:2,1"], input);
    assert_eq!(code, 1);
    assert_eq!(v["all_schedulable"], Value::Bool(false));
}

#[test]
fn compare_agrees() {
    for input in [LIGHT, OVER, FRACTIONAL] {
        let (code, v) = json(&["compare", "-"], input);
        assert_eq!(code, 0, "{v}");
        assert_eq!(v["agree"], Value::Bool(true));
    }
}

#[test]
fn sweeps() {
    let (code, v) = json(&["sweep", "-", "--grid-step", "1/4"], LIGHT);
    assert_eq!(code, 0);
    assert_eq!(rat(&v["max"]), Rat::int(3));
    let input = r#"{"tasks": [{"name": "a", "period": 2, "exec": 1}, {"name": "b", "period": 5, "exec": 1}]}"#;
    let (_, v) = json(&["sweep", "-", "--objective", "op-highest", "--grid-step", "1/8"], input);
    assert_eq!(rat(&v["max"]), Rat::int(3));
    assert_eq!(v["argmax"], serde_json::json!([[2]]));
}

#[test]
fn occupancy_report() {
    let (code, v) = json(&["occupancy", "-", "--window", "0", "5", "--task", "slow", "--d", "5", "--r", "1"], LIGHT);
    assert_eq!(code, 0);
    assert_eq!(rat(&v["occupancy"]["fast"]), Rat::int(3));
    assert_eq!(rat(&v["occupancy"]["slow"]), Rat::int(1));
    assert_eq!(rat(&v["demand"]["occupancy"]), Rat::int(1));
}

#[test]
fn input_errors_exit_two() {
    let (code, _, err) = call(&["check", "-"], "{\"tasks\": [{\"name\": \"a\", \"period\": 2}]}");
    assert_eq!(code, 2);
    assert!(err.contains("line"), "{err}");
    let (code, _, err) = call(&["check", "-"], r#"{"tasks": [{"name": "a", "period": 2, "exec": 2}]}"#);
    assert_eq!(code, 2);
    assert!(err.contains('a'), "{err}");
    let (code, _, _) = call(&["check", "/nonexistent/file.json"], "");
    assert_eq!(code, 2);
    let (code, _, _) = call(&["check", "-", "--priority", "bogus"], LIGHT);
    assert_eq!(code, 2);
    let (code, _, _) = call(&["check", "-", "--window", "3", "1"], LIGHT);
    assert_eq!(code, 2);
    let (code, _, _) = call(&["check", "-", "--grid-step", "0.5"], LIGHT);
    assert_eq!(code, 2);
}

#[test]
fn exit_status_follows_the_report() {
    for input in [LIGHT, OVER, FRACTIONAL] {
        for window in [["0", "4"], ["1", "9"], ["0", "30"]] {
            let (code, v) = json(&["check", "-", "--window", window[0], window[1]], input);
            assert_eq!(code == 0, v["all_schedulable"] == Value::Bool(true));
        }
    }
}
