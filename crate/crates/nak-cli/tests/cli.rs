use std::process::{Command, Output};

fn nak(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nak")).args(args).output().expect("run nak")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn tmp(name: &str) -> String {
    let dir = std::env::temp_dir().join(format!("nak-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name).display().to_string()
}

#[test]
fn oracle_passes_for_p3() {
    let o = nak(&["oracle", "--p", "3", "--max-lambda", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("PASS invariance/failing_maps"));
}

#[test]
fn shrinking_targets_dimension_is_one_half() {
    let o = nak(&["dim", "shrinking-targets", "--q", "5", "--z-norm", "5", "--tau", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("1/2 = 0.5"), "{}", stdout(&o));
}

#[test]
fn mahler_construction_certifies() {
    let json = tmp("mahler.json");
    let o = nak(&["construct", "mahler", "--p", "2", "--precision", "64", "--json", &json]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(v["experiment"], "construct");
    assert_eq!(v["pass"], true);
    assert_eq!(v["data"]["certificate"]["rows"].as_array().unwrap().len(), 64);
}

#[test]
fn small_norm_is_a_configuration_error() {
    let o = nak(&["ud", "--p", "5", "--x-norm", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("|x| > 1"));
    assert_eq!(nak(&["ud", "--p", "4"]).status.code(), Some(2));
    assert_eq!(nak(&["construct", "mahler", "--p", "3"]).status.code(), Some(2));
}

#[test]
fn failing_verdict_exits_one() {
    let o = nak(&["ud", "--p", "3", "--x-biased", "1,1,3", "-n", "2000", "--filter", "not-divisible:1"]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    let o = nak(&["pisot", "--p", "3", "--k", "2", "--l", "1", "--n-max", "20", "--orbit-n", "200"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("PASS limit_points/failing_rows"));
}

#[test]
fn json_is_deterministic_apart_from_timing() {
    let run = |name: &str| {
        let path = tmp(name);
        let o = nak(&["ud", "--p", "3", "--x-norm", "1", "-n", "3000", "--levels", "1,2", "--trials", "2", "--seed", "9", "--json", &path]);
        assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
        let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        v.as_object_mut().unwrap().remove("wall_time_s");
        v["config"]["output"] = serde_json::Value::Null;
        v
    };
    let a = run("a.json");
    assert_eq!(a, run("b.json"));
    assert_eq!(a["schema"], "nak-report/1");
    assert_eq!(a["seed"], 9);
}

#[test]
fn csv_has_one_row_per_cell() {
    let path = tmp("ud.csv");
    let o = nak(&["ud", "--p", "5", "--x-norm", "1", "-n", "1000", "--levels", "1,2", "--csv", &path]);
    assert_eq!(o.status.code(), Some(0));
    let mut r = csv::Reader::from_path(&path).unwrap();
    assert_eq!(r.headers().unwrap().get(0), Some("trial"));
    assert_eq!(r.records().count(), 5 + 25);
}

#[test]
fn element_round_trip() {
    let text = "Qp{p=5; v=-1; digits=1,2; prec=2}";
    let o = nak(&["element", "parse", text]);
    assert_eq!(o.status.code(), Some(0));
    let json = stdout(&o);
    let back = nak(&["element", "format", json.trim()]);
    assert_eq!(stdout(&back).trim(), text);
    let e = nak(&["element", "eval", "--p", "5", "--precision", "4", "86/5"]);
    assert_eq!(stdout(&e).trim(), "Qp{p=5; v=-1; digits=1,2,3,0; prec=4}");
}

#[test]
fn char_p_presets() {
    let o = nak(&["charp", "--p", "2", "--x-norm", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("PASS hull/exceeds_haar"));
    let o = nak(&["charp", "--p", "2", "--x-norm", "1", "-n", "2000", "--alpha", "t^1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(!stdout(&o).contains("PASS"));
}
