use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fabric-snn"))
}

struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn new() -> Self {
        let dir = TempDir::new().unwrap();
        let out = bin().arg("reference").arg("--dir").arg(dir.path()).output().unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        Self { dir }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn run(&self, args: &[&str]) -> Output {
        bin().current_dir(self.dir.path()).args(args).output().unwrap()
    }

    fn net(&self, sub: &str, extra: &[&str]) -> Output {
        let mut args = vec![sub, "--net", "ref.json", "--assignment", "ref_weights.json"];
        args.extend_from_slice(extra);
        self.run(&args)
    }

    fn json(&self, name: &str) -> Value {
        serde_json::from_str(&fs::read_to_string(self.path(name)).unwrap()).unwrap()
    }
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn voltages(report: &Value) -> Vec<f64> {
    report["report"]["solution"]["voltages"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect()
}

#[test]
fn eval_extremes() {
    let ws = Workspace::new();
    let zero = stdout_json(&ws.net("eval", &["--input", "000"]));
    assert_eq!(zero["report"]["outputs"], "00");
    assert!(voltages(&zero).iter().all(|&v| v == 0.0));
    let all = stdout_json(&ws.net("eval", &["--input", "111"]));
    assert_eq!(all["report"]["outputs"], "11");
    assert_eq!(all["manifest"]["command"], "eval");
    assert_eq!(all["manifest"]["inputs"].as_object().unwrap().len(), 2);
}

#[test]
fn malformed_input_is_an_input_error() {
    let ws = Workspace::new();
    let out = ws.net("eval", &["--input", "10"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    let out = ws.run(&["eval", "--net", "missing.json", "--input", "101"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn failure_leaves_no_output_file() {
    let ws = Workspace::new();
    fs::write(ws.path("bad_weights.json"), r#"{"selected":{"A->N1":7}}"#).unwrap();
    let out = ws.run(&[
        "eval", "--net", "ref.json", "--assignment", "bad_weights.json", "--input", "101", "--out", "eval.json",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!ws.path("eval.json").exists());
    let leftovers: Vec<_> = fs::read_dir(ws.dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(leftovers.len(), 9, "{leftovers:?}");
}

#[test]
fn table_matches_reference() {
    let ws = Workspace::new();
    let out = stdout_json(&ws.net("table", &["--target", "target_table.json"]));
    assert_eq!(out["report"]["table"], ws.json("target_table.json"));
}

#[test]
fn learn_writes_exact_assignment() {
    let ws = Workspace::new();
    let out = ws.run(&[
        "learn", "--net", "ref.json", "--target", "target_table.json", "--seed", "7", "--require-exact",
        "--out", "learned.json", "--report", "learn.json",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = ws.json("learn.json");
    assert_eq!(report["report"]["error"], 0);
    assert_eq!(report["manifest"]["seeds"], serde_json::json!([7]));
    let table = stdout_json(&ws.run(&["table", "--net", "ref.json", "--assignment", "learned.json"]));
    assert_eq!(table["report"]["table"], ws.json("target_table.json"));
}

#[test]
fn learn_objective_failure_exits_one() {
    let ws = Workspace::new();
    fs::write(
        ws.path("bad_table.json"),
        r#"{"rows":{"000":"11","001":"00","010":"00","011":"00","100":"00","101":"00","110":"00","111":"00"}}"#,
    )
    .unwrap();
    let out = ws.run(&[
        "learn", "--net", "ref.json", "--target", "bad_table.json", "--seed", "1", "--restarts", "2",
        "--iterations", "50", "--require-exact", "--out", "learned.json",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verify_agrees() {
    let ws = Workspace::new();
    let out = ws.net("verify", &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

fn last_row(csv: &str) -> (Vec<String>, Vec<f64>) {
    let mut lines = csv.lines();
    let header: Vec<String> = lines.next().unwrap().split(',').map(String::from).collect();
    let last: Vec<f64> = lines.last().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    (header, last)
}

#[test]
fn transient_settles_to_eval() {
    let ws = Workspace::new();
    let out = ws.net("transient", &["--input", "101", "--t-end", "400ms", "--dt", "100us", "--out", "trace.csv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, last) = last_row(&fs::read_to_string(ws.path("trace.csv")).unwrap());
    assert!((last[0] - 0.4).abs() < 1e-12);
    let eval = stdout_json(&ws.net("eval", &["--input", "101"]));
    let ids = eval["report"]["solution"]["node_ids"].as_array().unwrap();
    let dc = voltages(&eval);
    for (col, name) in header.iter().enumerate().skip(1) {
        let k = ids.iter().position(|i| i == name.as_str()).unwrap();
        assert!((last[col] - dc[k]).abs() < 1e-4, "{name}");
    }
}

#[test]
fn mc_and_fault_outputs() {
    let ws = Workspace::new();
    let out = ws.net("mc", &["--spec", "mc.json", "--seed", "3", "--samples", "200", "--out", "mc_out.json", "--csv", "mc.csv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = ws.json("mc_out.json");
    assert_eq!(report["report"]["cells"].as_array().unwrap().len(), 16);
    assert_eq!(fs::read_to_string(ws.path("mc.csv")).unwrap().lines().count(), 17);

    let out = ws.net("mc", &["--spec", "wearability.json", "--seed", "3", "--samples", "100", "--out", "sweep.json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(ws.json("sweep.json")["report"]["scenarios"].as_array().unwrap().len(), 3);

    let out = ws.net("fault", &["--campaign", "campaign.json", "--out", "fault.json", "--csv", "fault.csv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(ws.json("fault.json")["report"]["summary"].as_array().unwrap().len(), 8);
    let csv = fs::read_to_string(ws.path("fault.csv")).unwrap();
    assert!(csv.starts_with("zone,fault,pattern,node,baseline,faulted,delta,delta_kind\n"));
}

#[test]
fn scenario_logs_one_event() {
    let ws = Workspace::new();
    let out = ws.net("scenario", &["--scenarios", "scenarios.json", "--model", "sensor_model.json", "--events", "events.jsonl"]);
    let report = stdout_json(&out);
    let outputs: Vec<&str> =
        report["report"]["scenarios"].as_array().unwrap().iter().map(|s| s["outputs"].as_str().unwrap()).collect();
    assert_eq!(outputs, ["00", "00", "10", "11", "00", "10", "11", "11"]);
    let log = fs::read_to_string(ws.path("events.jsonl")).unwrap();
    assert_eq!(log.lines().count(), 1);
    let event: Value = serde_json::from_str(log.lines().next().unwrap()).unwrap();
    assert_eq!(event["pattern"], "111");
    assert!(event["output_voltage"].as_f64().unwrap() >= 2.3);
}

fn body(path: &Path) -> Value {
    let mut v: Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    v["manifest"]["timestamp"] = Value::Null;
    v
}

#[test]
fn reports_are_deterministic() {
    let ws = Workspace::new();
    for name in ["a.json", "b.json"] {
        let out = ws.net("mc", &["--spec", "mc.json", "--seed", "9", "--samples", "300", "--out", name]);
        assert!(out.status.success());
    }
    assert_eq!(body(&ws.path("a.json")), body(&ws.path("b.json")));
    let out = ws.net("mc", &["--spec", "mc.json", "--seed", "9", "--samples", "300", "--serial", "--out", "c.json"]);
    assert!(out.status.success());
    assert_eq!(body(&ws.path("a.json")), body(&ws.path("c.json")));
    for name in ["l1.json", "l2.json"] {
        let out = ws.run(&[
            "learn", "--net", "ref.json", "--target", "target_table.json", "--seed", "4", "--restarts", "3",
            "--out", "w.json", "--report", name,
        ]);
        assert!(out.status.success());
    }
    assert_eq!(body(&ws.path("l1.json")), body(&ws.path("l2.json")));
}
