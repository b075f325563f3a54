use std::path::Path;
use std::process::{Command, Output};

use telekinesis::analysis::ObservationTable;
use telekinesis::biosignal::Calibration;
use telekinesis::model::{load_trace, FactorCondition};

fn tk(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_telekinesis"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn usage_errors_exit_2() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(code(&tk(&["frobnicate"], d.path())), 2);
    assert_eq!(code(&tk(&["run", "--out", "x"], d.path())), 2);
    assert_eq!(
        code(&tk(&["run", "--seed", "1", "--condition", "c=maybe", "--out", "x"], d.path())),
        2
    );
}

#[test]
fn calibrate_then_run_a_seeded_operator() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    let o = tk(&["calibrate", "--seed", "4", "--out", "calib.json"], p);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let calib = Calibration::load(&p.join("calib.json")).unwrap();
    assert!(calib.c_th > calib.mean_interval);

    let o = tk(
        &["run", "--seed", "8", "--condition", "c=yes,s=yes,e=yes", "--calibration", "calib.json", "--out", "run"],
        p,
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(p.join("run/report.json")).unwrap()).unwrap();
    assert_eq!(report["complete"], true);
    let frames = load_trace(&p.join("run/trace.jsonl")).unwrap();
    let lines = std::fs::read_to_string(p.join("run/snapshots.jsonl")).unwrap();
    assert_eq!(lines.lines().count(), frames.len());

    // Replaying the written trace gives the same bytes.
    let o = tk(
        &["run", "--trace", "run/trace.jsonl", "--condition", "c=yes,s=yes,e=yes", "--calibration", "calib.json", "--out", "again"],
        p,
    );
    assert_eq!(code(&o), 0);
    assert_eq!(
        std::fs::read(p.join("run/snapshots.jsonl")).unwrap(),
        std::fs::read(p.join("again/snapshots.jsonl")).unwrap()
    );
}

#[test]
fn missing_calibration_is_a_validation_error() {
    let d = tempfile::tempdir().unwrap();
    let o = tk(&["run", "--seed", "1", "--condition", "c=no,s=yes,e=no", "--out", "r"], d.path());
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("calibration"));
}

#[test]
fn short_baseline_is_rejected() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    assert_eq!(code(&tk(&["synth", "--kind", "task", "--seed", "2", "--out", "t.jsonl"], p)), 0);
    let o = tk(&["calibrate", "--trace", "t.jsonl", "--out", "c.json"], p);
    assert_eq!(code(&o), 3);
}

#[test]
fn malformed_trace_reports_the_line() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    assert_eq!(code(&tk(&["synth", "--seed", "2", "--out", "t.jsonl"], p)), 0);
    let text = std::fs::read_to_string(p.join("t.jsonl")).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    lines[2] = "{\"t\": oops}";
    std::fs::write(p.join("bad.jsonl"), lines.join("\n")).unwrap();
    let o = tk(&["run", "--trace", "bad.jsonl", "--out", "r"], p);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn bad_config_is_rejected() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    std::fs::write(p.join("cfg.json"), r#"{"F_th": 1.5}"#).unwrap();
    let o = tk(&["synth", "--config", "cfg.json", "--out", "t.jsonl"], p);
    assert_eq!(code(&o), 3);
    std::fs::write(p.join("cfg.json"), r#"{"bogus": 1}"#).unwrap();
    assert_eq!(code(&tk(&["synth", "--config", "cfg.json", "--out", "t.jsonl"], p)), 3);
}

#[test]
fn batch_writes_all_conditions_in_seeded_order() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    let o = tk(&["batch", "--seed", "21", "--out", "b"], p);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let order: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(p.join("b/order.json")).unwrap()).unwrap();
    let names: Vec<String> = order["order"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().to_string())
        .collect();
    assert_eq!(names.len(), 8);
    for c in FactorCondition::all() {
        assert!(names.contains(&c.to_string()));
        let r: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(p.join(format!("b/report_{}.json", c.slug()))).unwrap(),
        )
        .unwrap();
        assert_eq!(r["complete"], true, "{c}");
    }
    // Same seed, same files.
    assert_eq!(code(&tk(&["batch", "--seed", "21", "--out", "b2"], p)), 0);
    for entry in std::fs::read_dir(p.join("b")).unwrap() {
        let name = entry.unwrap().file_name();
        assert_eq!(
            std::fs::read(p.join("b").join(&name)).unwrap(),
            std::fs::read(p.join("b2").join(&name)).unwrap(),
            "{name:?}"
        );
    }
}

fn write_csv(path: &Path, n: usize, unbalanced: bool) {
    let mut s = String::from("participant,concentration,strain,energy,response\n");
    for p in 0..n {
        for c in FactorCondition::all() {
            if unbalanced && p == 0 && c.energy {
                continue;
            }
            let b = |x: bool| if x { "yes" } else { "no" };
            let y = (p * 7 + c.enabled_count() * 3) % 11;
            s += &format!("P{p},{},{},{},{y}\n", b(c.concentration), b(c.strain), b(c.energy));
        }
    }
    std::fs::write(path, s).unwrap();
}

#[test]
fn analyze_emits_seven_effects() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    write_csv(&p.join("q.csv"), 10, false);
    ObservationTable::load_csv(&p.join("q.csv")).unwrap();
    let o = tk(&["analyze", "q.csv", "--out", "a.json"], p);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(p.join("a.json")).unwrap()).unwrap();
    let effects = v["effects"].as_array().unwrap();
    assert_eq!(effects.len(), 7);
    for e in effects {
        assert_eq!(e["df1"], 1);
        assert_eq!(e["df2"], 72);
        let pv = e["p"].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&pv));
    }
}

#[test]
fn analyze_rejects_unbalanced_and_constant_tables() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    write_csv(&p.join("u.csv"), 4, true);
    assert_eq!(code(&tk(&["analyze", "u.csv"], p)), 3);

    let mut s = String::from("participant,concentration,strain,energy,response\n");
    for c in FactorCondition::all() {
        let b = |x: bool| if x { "yes" } else { "no" };
        for r in 0..2 {
            s += &format!("P{r},{},{},{},5\n", b(c.concentration), b(c.strain), b(c.energy));
        }
    }
    std::fs::write(p.join("flat.csv"), s).unwrap();
    assert_eq!(code(&tk(&["analyze", "flat.csv"], p)), 4);

    assert_eq!(code(&tk(&["analyze", "missing.csv"], p)), 4);
}
