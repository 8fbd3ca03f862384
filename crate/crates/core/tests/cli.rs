use std::path::Path;
use std::process::{Command, Output};

fn thermoflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_thermoflow"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn flow_on_path_prints_visit_counts() {
    let out = thermoflow(&["flow", "--graph", "path:3", "--s", "0", "--t", "2", "--beta", "0"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    let x = |i: &str, j: &str| rows.iter().find(|r| r[0] == i && r[1] == j).unwrap()[2].parse::<f64>().unwrap();
    assert_eq!(text.lines().next(), Some("i,j,x,net"));
    assert!((x("0", "1") - 2.0).abs() < 1e-12);
    assert!((x("1", "0") - 1.0).abs() < 1e-12);
    assert!((x("1", "2") - 1.0).abs() < 1e-12);
}

#[test]
fn cold_flow_on_c_takes_the_unit_path() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("flow.csv");
    let dot = dir.path().join("flow.dot");
    let diag = dir.path().join("diag.json");
    let out = thermoflow(&[
        "flow", "--graph", "C", "--beta", "50",
        "--out", csv.to_str().unwrap(),
        "--dot", dot.to_str().unwrap(),
        "--diagnostics", diag.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = read(&csv);
    let x = |i: usize, j: usize| {
        text.lines()
            .skip(1)
            .map(|l| l.split(',').collect::<Vec<_>>())
            .find(|r| r[0] == i.to_string() && r[1] == j.to_string())
            .map(|r| r[2].parse::<f64>().unwrap())
            .unwrap()
    };
    for (i, j) in [(0, 10), (10, 11), (11, 12), (12, 13), (13, 5)] {
        assert!(x(i, j) > 0.999);
    }
    assert!(x(1, 14) < 1e-3);
    let dot_text = read(&dot);
    assert!(dot_text.starts_with("digraph flow {"));
    assert!(dot_text.contains("11 -> 12 [color=gray0"));
    let value: serde_json::Value = serde_json::from_str(&read(&diag)).unwrap();
    assert!(value["F"].as_f64().unwrap() > 7.0);
}

#[test]
fn outputs_are_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let out = thermoflow(&["centrality", "--graph", "B", "--beta", "1", "--edges", path.to_str().unwrap()]);
        assert!(out.status.success());
    }
    assert_eq!(read(&a), read(&b));
    assert!(read(&a).starts_with("i,j,mean_flow,rel_mean_flow,mean_net_flow\n"));
}

#[test]
fn centrality_node_table() {
    let dir = tempfile::tempdir().unwrap();
    let nodes = dir.path().join("nodes.csv");
    let out = thermoflow(&["centrality", "--graph", "path:3", "--beta", "0", "--nodes", nodes.to_str().unwrap()]);
    assert!(out.status.success());
    let text = read(&nodes);
    assert_eq!(text.lines().next(), Some("i,mean_flow,rel,mean_net_flow,closeness_out,closeness_in"));
    let row0: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row0[4].parse::<f64>().unwrap(), 2.5);
}

#[test]
fn abacus_is_non_increasing() {
    let out = thermoflow(&["abacus", "--graph", "A"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().next(), Some("beta,total_time"));
    let times: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(times.len(), 40);
    assert!(times.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn calibrate_from_time_and_flow() {
    let out = thermoflow(&["calibrate", "--graph", "B", "--time", "1000"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("ERROR OUTSIDE_CURVE_RANGE:"));

    let dir = tempfile::tempdir().unwrap();
    let flow = dir.path().join("observed.csv");
    let report = dir.path().join("report.json");
    assert!(thermoflow(&["flow", "--graph", "B", "--beta", "1", "--out", flow.to_str().unwrap()]).status.success());
    let out = thermoflow(&["calibrate", "--graph", "B", "--flow", flow.to_str().unwrap(), "--out", report.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let value: serde_json::Value = serde_json::from_str(&read(&report)).unwrap();
    assert!((value["T_hat"].as_f64().unwrap() - 1.0).abs() < 1e-4);
    assert_eq!(value["monotone"], true);
    assert_eq!(value["bracket"].as_array().unwrap().len(), 2);
}

#[test]
fn correlate_writes_sweep() {
    let out = thermoflow(&["correlate", "--graph", "B", "--betas", "0.01,0.1,1,10"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().next(), Some("beta,corr0,corr_inf,sum"));
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn generate_and_reload() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("c.json");
    assert!(thermoflow(&["generate", "--graph", "C", "--out", json.to_str().unwrap()]).status.success());
    let out = thermoflow(&["flow", "--graph", json.to_str().unwrap(), "--s", "2", "--t", "7", "--beta", "1"]);
    assert!(out.status.success());
    let described = stdout(&thermoflow(&["generate", "--graph", "C", "--describe"]));
    assert!(described.contains("high-resistance path"));
}

#[test]
fn edge_list_input() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("edges.csv");
    std::fs::write(&csv, "i,j,r\n0,1,1\n1,2,1\n0,2,2\n").unwrap();
    let out = thermoflow(&["flow", "--graph", csv.to_str().unwrap(), "--s", "0", "--t", "2", "--beta", "1"]);
    assert!(out.status.success());
}

#[test]
fn error_exit_codes() {
    let out = thermoflow(&["flow", "--graph", "B", "--s", "3", "--t", "3", "--beta", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("ERROR SAME_ENDPOINTS:"));

    let out = thermoflow(&["flow", "--graph", "nonsense", "--beta", "1"]);
    assert_eq!(out.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("g.json");
    std::fs::write(&json, r#"{"n": 2, "edges": [{"from": 0, "to": 1, "w": 1, "r": 1}]}"#).unwrap();
    let out = thermoflow(&["flow", "--graph", json.to_str().unwrap(), "--s", "0", "--t", "1", "--beta", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("ERROR NOT_STOCHASTIC:"));

    let valid = dir.path().join("ok.json");
    std::fs::write(&valid, r#"{"n": 2, "edges": [{"from": 0, "to": 1, "w": 1, "r": 1}, {"from": 1, "to": 0, "w": 1, "r": 1}]}"#).unwrap();
    let out = thermoflow(&["flow", "--graph", valid.to_str().unwrap(), "--beta", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("ERROR CONFIG:"));

    let out = thermoflow(&["flow", "--graph", "B"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn hidden_crosscheck_runs() {
    let out = thermoflow(&["crosscheck", "--graph", "B", "--beta", "0.5", "--walks", "20000"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("absorbing chain"));
    assert!(!stdout(&thermoflow(&["--help"])).contains("crosscheck"));
}
