use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn shmod(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shmod")).args(args).arg("--out").arg(dir).output().expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn ok(out: &Output) {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn townes_writes_profile_and_metadata() {
    let dir = tempfile::tempdir().unwrap();
    ok(&shmod(dir.path(), &["townes"]));
    let meta = json(&dir.path().join("townes_meta.json"));
    let r0 = meta["R0"].as_f64().unwrap();
    assert!((2.205..=2.208).contains(&r0));
    for key in ["r_max", "grid_step", "tail_coeff", "residual_max"] {
        assert!(meta.get(key).is_some(), "{key}");
    }
    let csv = fs::read_to_string(dir.path().join("townes_profile.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("r,R,dR"));
    assert_eq!(csv.lines().count(), 25_002);

    let wide = tempfile::tempdir().unwrap();
    ok(&shmod(wide.path(), &["townes", "--r-max", "50"]));
    let r0_wide = json(&wide.path().join("townes_meta.json"))["R0"].as_f64().unwrap();
    assert!((r0_wide - r0).abs() < 1e-9);
}

#[test]
fn usage_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["townes", "--grid-step", "0"],
        vec!["simulate", "--order", "o7"],
        vec!["simulate", "--figure", "fig9"],
        vec!["simulate", "--figure", "fig1a", "--alpha", "0.02"],
        vec!["simulate", "--no-such-flag"],
        vec!["threshold", "--L0", "1", "--eps0", "0.1"],
        vec!["frobnicate"],
    ] {
        let out = shmod(dir.path(), &args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
    }
}

#[test]
fn constants_report() {
    let dir = tempfile::tempdir().unwrap();
    ok(&shmod(dir.path(), &["constants"]));
    let c = json(&dir.path().join("constants.json"));
    let m = c["M"].as_f64().unwrap();
    assert!((0.54..=0.56).contains(&m));
    for key in ["p4", "grad"] {
        assert!(c["pohozaev_residuals"][key].as_f64().unwrap() < 1e-6);
    }
    for (key, bound) in [("C1", 1e-6), ("C2", 1e-5), ("C3", 1e-4)] {
        assert!(c[key]["disc"].as_f64().unwrap() < bound, "{key}");
        assert!(c[key]["direct"].as_f64().unwrap() > 0.0);
    }
}

#[test]
fn figure_outcomes() {
    let dir = tempfile::tempdir().unwrap();
    for (fig, event) in [("fig1c", "oscillation"), ("fig2", "collapse"), ("fig4a", "defocus")] {
        ok(&shmod(dir.path(), &["simulate", "--figure", fig]));
        let outcome = json(&dir.path().join(format!("{fig}_outcome.json")));
        assert_eq!(outcome["event"], event, "{fig}");
        for key in ["t_event", "L_min", "L_max", "period", "drift"] {
            assert!(outcome.get(key).is_some(), "{fig}: {key}");
        }
        let csv = fs::read_to_string(dir.path().join(format!("{fig}_trajectory.csv"))).unwrap();
        assert_eq!(csv.lines().next(), Some("t,L,dL,beta,tau,first_integral_residual"));
        assert!(csv.lines().count() > 10);
    }
    let fig2 = json(&dir.path().join("fig2_outcome.json"));
    assert!(fig2["t_event"].as_f64().unwrap().is_finite());
}

#[test]
fn classify_figure_parameters() {
    let dir = tempfile::tempdir().unwrap();
    ok(&shmod(dir.path(), &["classify", "--figure", "fig1a"]));
    assert_eq!(json(&dir.path().join("classify.json"))["predicted"], "MonotoneDefocus");
    ok(&shmod(dir.path(), &["classify", "--order", "o1", "--L0", "0.8", "--dLt0", "0"]));
    let report = json(&dir.path().join("classify.json"));
    assert_eq!(report["predicted"], "Oscillation");
    assert!(report["y_m"].as_f64().unwrap() < report["y_M"].as_f64().unwrap());
}

#[test]
fn threshold_report() {
    let dir = tempfile::tempdir().unwrap();
    ok(&shmod(dir.path(), &["threshold", "--at", "mid-band"]));
    let t = json(&dir.path().join("threshold.json"));
    for key in ["L_t_c", "bracket", "iterations", "t_max_used"] {
        assert!(t.get(key).is_some(), "{key}");
    }
    assert!((t["L_t_c"].as_f64().unwrap() - -15.20743).abs() < 1e-3);
    let out = shmod(dir.path(), &["threshold", "--dLt0-lo", "-1", "--dLt0-hi", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn f1_table_columns() {
    let dir = tempfile::tempdir().unwrap();
    ok(&shmod(dir.path(), &["f1-table", "--eps", "0.001,0.01,0.05"]));
    let csv = fs::read_to_string(dir.path().join("f1_table.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("eps,f1_exact,f1_o1,f1_o2,f1_o3,rel_err_o1,rel_err_o2,rel_err_o3"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 3);
    for row in rows {
        assert!(row[7] < row[6] && row[6] < row[5], "{row:?}");
    }
}

#[test]
fn sweep_lines_follow_grid_order() {
    let dir = tempfile::tempdir().unwrap();
    ok(&shmod(dir.path(), &["sweep", "--beta0", "0.001,0.01", "--dLt0", "-1,1"]));
    let text = fs::read_to_string(dir.path().join("sweep.jsonl")).unwrap();
    let lines: Vec<Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 4);
    let keys: Vec<(f64, f64)> = lines
        .iter()
        .map(|l| (l["parameters"]["beta0"].as_f64().unwrap(), l["parameters"]["dLt0"].as_f64().unwrap()))
        .collect();
    assert_eq!(keys, vec![(0.001, -1.0), (0.001, 1.0), (0.01, -1.0), (0.01, 1.0)]);
    for (i, l) in lines.iter().enumerate() {
        assert_eq!(l["index"], i);
    }
}

#[test]
fn sweep_records_failures_inline() {
    let dir = tempfile::tempdir().unwrap();
    // h_min = 1e-3 is above the first step the small-L run needs
    let args = [
        "sweep",
        "--order",
        "o2",
        "--beta0",
        "0.5",
        "--L0",
        "0.1,30",
        "--dLt0",
        "-2",
        "--t-max",
        "10",
        "--h-min-factor",
        "1e-4",
    ];
    ok(&shmod(dir.path(), &args));
    let text = fs::read_to_string(dir.path().join("sweep.jsonl")).unwrap();
    let lines: Vec<Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0]["error"].as_str().unwrap().contains("underflow"));
    assert!(lines[0].get("outcome").is_none());
    assert_eq!(lines[1]["outcome"]["event"], "horizon_reached");
    assert!(lines[1].get("error").is_none());
}

#[test]
fn underflow_keeps_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "simulate",
        "--order",
        "unperturbed",
        "--beta-init",
        "0.5",
        "--L0",
        "1",
        "--dLt0",
        "0",
        "--t-max",
        "2",
        "--h-min-factor",
        "1e-6",
    ];
    let out = shmod(dir.path(), &args);
    assert_eq!(out.status.code(), Some(2));
    let outcome = json(&dir.path().join("simulate_outcome.json"));
    assert!(outcome["error"].as_str().unwrap().contains("underflow"));
    let csv = fs::read_to_string(dir.path().join("simulate_trajectory.csv")).unwrap();
    assert!(csv.lines().count() > 100);
}

#[test]
fn config_file_and_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"order": "o3", "alpha": 0.01, "beta0": 0.005, "L0": 0.5, "dLt0": -0.5}"#).unwrap();
    let a = dir.path().join("a");
    ok(&shmod(&a, &["simulate", "--config", cfg.to_str().unwrap(), "--dLt0", "-0.25"]));
    let eff = json(&a.join("effective_config.json"));
    assert_eq!(eff["order"], "o3");
    assert_eq!(eff["beta0"], 0.005);
    assert_eq!(eff["dLt0"], -0.25);

    let b = dir.path().join("b");
    let snapshot = a.join("constants.json");
    let eff_path = a.join("effective_config.json");
    let out = Command::new(env!("CARGO_BIN_EXE_shmod"))
        .args(["simulate", "--config", eff_path.to_str().unwrap(), "--constants", snapshot.to_str().unwrap(), "--out"])
        .arg(&b)
        .output()
        .unwrap();
    ok(&out);
    for name in ["simulate_trajectory.csv", "simulate_outcome.json", "effective_config.json"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }

    fs::write(&cfg, r#"{"alpah": 0.01}"#).unwrap();
    let out = shmod(dir.path(), &["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn snapshot_is_reused_until_recompute() {
    let dir = tempfile::tempdir().unwrap();
    ok(&shmod(dir.path(), &["classify", "--figure", "fig1c"]));
    let path = dir.path().join("constants.json");
    let mut snap = json(&path);
    let h0 = json(&dir.path().join("classify.json"))["H0"].as_f64().unwrap();

    // a doctored M must flow into H0 = M D0 when the snapshot is reused
    let m = snap["M"].as_f64().unwrap();
    snap["M"] = Value::from(2.0 * m);
    fs::write(&path, serde_json::to_string(&snap).unwrap()).unwrap();
    ok(&shmod(dir.path(), &["classify", "--figure", "fig1c"]));
    let doctored = json(&dir.path().join("classify.json"))["H0"].as_f64().unwrap();
    assert_ne!(doctored, h0);

    ok(&shmod(dir.path(), &["classify", "--figure", "fig1c", "--recompute-constants"]));
    assert_eq!(json(&path)["M"].as_f64().unwrap(), m);
    assert_eq!(json(&dir.path().join("classify.json"))["H0"].as_f64().unwrap(), h0);
}
