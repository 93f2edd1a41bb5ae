use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn fedsched(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fedsched")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// One satellite (node 0), a server and `clients` client sites.
fn star_scenario(clients: usize, size_mb: f64, tau: f64) -> Value {
    let mut sites = vec![json!({"name": "S", "lat": 0.0, "lon": 0.0, "role": "server"})];
    let names: Vec<String> = (1..=clients).map(|i| format!("C{i}")).collect();
    for (i, n) in names.iter().enumerate() {
        sites.push(json!({"name": n, "lat": 1.0 + i as f64, "lon": 0.0, "role": "client"}));
    }
    json!({
        "format_version": 1,
        "constellation": {
            "num_satellites": 1, "num_planes": 1, "altitude_km": 550.0, "inclination_deg": 53.0,
            "isl_pattern": "grid_plus", "elevation_mask_deg": 25.0,
            "bandwidth_dist": {"min_mbps": 10.0, "max_mbps": 30.0}, "rng_seed": 1
        },
        "sites": sites,
        "task": {"model": {"size_mb": size_mb, "training_time_s": tau}, "server_site": "S", "client_sites": names},
        "scheduling": {"window_length_s": 1000.0, "horizon_windows": 1}
    })
}

/// Graph for `star_scenario`: server access link to the satellite plus one spoke per client.
fn star_graph(clients: usize, access_mbps: f64, spoke_mbps: f64, window_length_s: f64) -> Value {
    let mut nodes = vec![json!({"id": 0, "kind": "satellite", "name": "sat-0-0"}), json!({"id": 1, "kind": "server", "name": "S"})];
    let mut edges = vec![json!({"u": 0, "v": 1, "mbps": access_mbps, "delay_ms": 2.0})];
    for i in 0..clients {
        let id = 2 + i;
        nodes.push(json!({"id": id, "kind": "client", "name": format!("C{}", i + 1)}));
        edges.push(json!({"u": 0, "v": id, "mbps": spoke_mbps, "delay_ms": 2.0}));
    }
    json!({
        "format_version": 1,
        "config_hash": "hand-written",
        "window_length_s": window_length_s,
        "num_windows": 1,
        "nodes": nodes,
        "windows": [{"window_index": 0, "window_start_s": 0.0, "edges": edges}]
    })
}

fn write_json(dir: &TempDir, name: &str, v: &Value) -> PathBuf {
    let p = path(dir, name);
    std::fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p
}

fn run_schedule(dir: &TempDir, scenario: &Value, graph: &Value, policy: &str, extra: &[&str]) -> (Output, PathBuf) {
    let sc = write_json(dir, "scenario.json", scenario);
    let g = write_json(dir, "graph.json", graph);
    let out = path(dir, policy);
    let mut args = vec!["schedule", "--graph", s(&g), "--scenario", s(&sc), "--policy", policy, "--out", s(&out)];
    args.extend_from_slice(extra);
    (fedsched(&args), out)
}

fn makespan(o: &Output) -> f64 {
    let line = stdout(o);
    let field = line.split_whitespace().find_map(|f| f.strip_prefix("makespan_s=")).unwrap();
    field.parse().unwrap()
}

#[test]
fn generate_toy_scenario_twice_is_byte_identical() {
    let dir = TempDir::new().unwrap();
    let mut sc = star_scenario(1, 1.0, 1.0);
    sc["constellation"]["num_satellites"] = json!(4);
    sc["scheduling"] = json!({"window_length_s": 10.0, "horizon_windows": 2});
    let sc = write_json(&dir, "toy.json", &sc);
    let (a, b) = (path(&dir, "a.json"), path(&dir, "b.json"));
    let o = fedsched(&["generate", "--scenario", s(&sc), "--out", s(&a)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 2);
    assert!(stdout(&o).contains("nodes=6"));
    assert!(fedsched(&["generate", "--scenario", s(&sc), "--out", s(&b)]).status.success());
    let text = std::fs::read(&a).unwrap();
    assert_eq!(text, std::fs::read(&b).unwrap());
    let v: Value = serde_json::from_slice(&text).unwrap();
    assert_eq!(v["windows"].as_array().unwrap().len(), 2);
    let c = path(&dir, "c.json");
    assert!(fedsched(&["generate", "--scenario", s(&sc), "--out", s(&c), "--seed", "9"]).status.success());
    let other: Value = serde_json::from_slice(&std::fs::read(&c).unwrap()).unwrap();
    assert_ne!(other["config_hash"], v["config_hash"]);
}

#[test]
fn malformed_scenario_exits_2_naming_the_field() {
    let dir = TempDir::new().unwrap();
    let mut sc = star_scenario(1, 1.0, 1.0);
    sc["scheduling"]["horizon_windows"] = json!("many");
    let sc = write_json(&dir, "bad.json", &sc);
    let o = fedsched(&["generate", "--scenario", s(&sc), "--out", s(&path(&dir, "g.json"))]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.starts_with("error[2]: "), "{err}");
    assert!(err.contains("scheduling.horizon_windows"), "{err}");
    assert_eq!(err.lines().count(), 1);
}

#[test]
fn missing_scenario_exits_3() {
    let o = fedsched(&["generate", "--scenario", "/nonexistent/scenario.json", "--out", "/tmp/x.json"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).starts_with("error[3]: "));
}

#[test]
fn single_client_makespan_is_download_train_upload() {
    let dir = TempDir::new().unwrap();
    let (o, out) = run_schedule(&dir, &star_scenario(1, 10.0, 10.0), &star_graph(1, 20.0, 100.0, 1000.0), "on_demand", &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(makespan(&o), 18.0);
    assert!(stdout(&o).contains("distribute_s=4.000 train_s=10.000 upload_s=4.000"));
    let csv = std::fs::read_to_string(out.with_extension("csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    let json: Value = serde_json::from_str(&std::fs::read_to_string(out.with_extension("json")).unwrap()).unwrap();
    assert_eq!(json["channel"], "per_direction");
    assert_eq!(json["seed"], 1);
}

#[test]
fn shared_access_toy_gives_22_and_26() {
    let dir = TempDir::new().unwrap();
    let sc = star_scenario(2, 10.0, 10.0);
    let g = star_graph(2, 20.0, 100.0, 1000.0);
    let (od, _) = run_schedule(&dir, &sc, &g, "on_demand", &[]);
    assert_eq!(makespan(&od), 22.0);
    let (joint, _) = run_schedule(&dir, &sc, &g, "on_demand", &["--channel", "joint"]);
    assert_eq!(makespan(&joint), 22.0);
    let (mux, _) = run_schedule(&dir, &sc, &g, "statistical_multiplexing", &[]);
    assert_eq!(makespan(&mux), 26.0);
}

#[test]
fn oracle_guard_exits_6() {
    let dir = TempDir::new().unwrap();
    let (o, _) = run_schedule(&dir, &star_scenario(9, 1.0, 1.0), &star_graph(9, 20.0, 20.0, 1000.0), "oracle_optimal", &[]);
    assert_eq!(o.status.code(), Some(6));
    assert!(stderr(&o).contains("at most 8 clients, got 9"), "{}", stderr(&o));
}

#[test]
fn unreachable_client_exits_4_and_short_horizon_exits_5() {
    let dir = TempDir::new().unwrap();
    let mut g = star_graph(2, 20.0, 100.0, 1000.0);
    g["windows"][0]["edges"].as_array_mut().unwrap().pop();
    let (o, _) = run_schedule(&dir, &star_scenario(2, 10.0, 10.0), &g, "on_demand", &[]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("C2"), "{}", stderr(&o));

    let (o, _) = run_schedule(&dir, &star_scenario(2, 10.0, 10.0), &star_graph(2, 20.0, 100.0, 5.0), "on_demand", &[]);
    assert_eq!(o.status.code(), Some(5));
}

#[test]
fn gantt_renders_one_lane_and_rejects_empty_schedules() {
    let dir = TempDir::new().unwrap();
    let (o, out) = run_schedule(&dir, &star_scenario(1, 10.0, 10.0), &star_graph(1, 20.0, 100.0, 1000.0), "on_demand", &[]);
    assert!(o.status.success());
    let json = out.with_extension("json");
    let svg = path(&dir, "g.svg");
    let o = fedsched(&["gantt", "--schedule", s(&json), "--out", s(&svg)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&svg).unwrap();
    assert_eq!(text.matches("<rect ").count(), 3);
    let again = path(&dir, "h.svg");
    assert!(fedsched(&["gantt", "--schedule", s(&json), "--out", s(&again)]).status.success());
    assert_eq!(text, std::fs::read_to_string(&again).unwrap());

    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    v["schedule"]["intervals"] = json!([]);
    let empty = write_json(&dir, "empty.json", &v);
    let o = fedsched(&["gantt", "--schedule", s(&empty), "--out", s(&svg)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bundled_fig6_smoke_sweep_has_twenty_rows() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "sweep");
    let o = fedsched(&["sweep", "--bundled", "fig6", "--max-seeds", "2", "--jobs", "2", "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 20);
    let table = stdout(&o);
    for model in ["LeNet-5", "MobileNetV2", "EfficientNet-B0", "ResNet-18", "ResNet-34"] {
        assert!(table.contains(model), "{table}");
    }
    let json: Value = serde_json::from_str(&std::fs::read_to_string(out.join("sweep.json")).unwrap()).unwrap();
    assert!(json["failures"].as_array().unwrap().is_empty());
    assert_eq!(json["rows"].as_array().unwrap().len(), 20);
}

#[test]
fn missing_plan_exits_3() {
    let o = fedsched(&["sweep", "--plan", "/nonexistent/plan.json", "--out", "/tmp/unused"]);
    assert_eq!(o.status.code(), Some(3));
}
