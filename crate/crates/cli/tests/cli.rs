use serde_json::Value;
use std::path::PathBuf;
use std::process::{Command, Output};

fn network(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("networks").join(name)
}

fn potflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_potflow"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn path(p: &std::path::Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn chain_solves_feasibly() {
    let out = potflow(&["solve", path(&network("chain.json"))]);
    assert_eq!(out.status.code(), Some(0));
    let sol = stdout_json(&out);
    assert_eq!(sol["status"], "Converged");
    assert_eq!(sol["feasibility"], "Feasible");
    let pots: Vec<f64> = sol["nodes"].as_array().unwrap().iter().map(|n| n["potential"].as_f64().unwrap()).collect();
    assert_eq!(pots, vec![1.0, 4.0, 3.0]);
}

#[test]
fn ideal_negative_potential_exits_one() {
    let out = potflow(&["solve", path(&network("single_pipe_ideal.json"))]);
    assert_eq!(out.status.code(), Some(1));
    let sol = stdout_json(&out);
    assert_eq!(sol["status"], "Converged");
    assert_eq!(sol["feasibility"], "NoPressureSolution");
    assert_eq!(sol["nodes"][1]["potential"], -2.0);
    assert!(sol["nodes"][1]["pressure"].is_null());
    assert!(String::from_utf8_lossy(&out.stderr).contains("no real pressure"));
}

#[test]
fn cnga_negative_pressure_exits_one() {
    let out = potflow(&["solve", path(&network("single_pipe_cnga.json"))]);
    assert_eq!(out.status.code(), Some(1));
    let sol = stdout_json(&out);
    assert_eq!(sol["feasibility"], "Infeasible");
    let p = sol["nodes"][1]["pressure"].as_f64().unwrap();
    assert!((p + 50.769_131_8).abs() < 1e-6);
    assert_eq!(sol["nodes"][1]["generalized_only"], true);
}

#[test]
fn missing_slack_exits_three() {
    let out = potflow(&["validate", path(&network("no_slack.json"))]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(stdout_json(&out)["violations"][0], "NoSlackNode");
    assert!(String::from_utf8_lossy(&out.stderr).contains("no slack node"));

    let solve = potflow(&["solve", path(&network("no_slack.json"))]);
    assert_eq!(solve.status.code(), Some(3));
    assert!(solve.stdout.is_empty());
}

#[test]
fn valid_networks_validate() {
    for name in ["chain.json", "triangle.json", "random_mesh_200.json"] {
        let out = potflow(&["validate", path(&network(name))]);
        assert_eq!(out.status.code(), Some(0), "{name}");
        assert_eq!(stdout_json(&out)["valid"], true);
    }
}

#[test]
fn io_and_schema_errors_exit_four() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.json");
    assert_eq!(potflow(&["solve", path(&missing)]).status.code(), Some(4));

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"eos": "ideal", "nodes": [], "edges": [{"type": "valve"}]}"#).unwrap();
    assert_eq!(potflow(&["validate", path(&bad)]).status.code(), Some(4));

    assert_eq!(potflow(&["solve"]).status.code(), Some(4));
    assert_eq!(potflow(&["solve", path(&network("chain.json")), "--ds-min", "-1"]).status.code(), Some(4));
}

#[test]
fn crippled_solver_exits_two() {
    let out = potflow(&[
        "solve",
        path(&network("single_pipe_ideal.json")),
        "--method",
        "homotopy",
        "--max-iters",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stdout_json(&out)["status"], "HomotopyStalled");
}

#[test]
fn oracle_refuses_meshes() {
    let out = potflow(&["solve", path(&network("random_mesh_200.json")), "--method", "oracle"]);
    assert_eq!(out.status.code(), Some(3));
    let tree = potflow(&["solve", path(&network("random_tree_40.json")), "--method", "oracle"]);
    assert_eq!(tree.status.code(), Some(0));
}

#[test]
fn methods_agree_on_the_triangle() {
    let mut flows = Vec::new();
    for method in ["auto", "newton", "homotopy", "oracle"] {
        let out = potflow(&["solve", path(&network("triangle.json")), "--method", method]);
        assert_eq!(out.status.code(), Some(0), "{method}");
        let sol = stdout_json(&out);
        let f: Vec<f64> = sol["edges"].as_array().unwrap().iter().map(|e| e["flow"].as_f64().unwrap()).collect();
        flows.push(f);
    }
    for f in &flows {
        for (a, b) in f.iter().zip([1.0, 0.0, 1.0]) {
            assert!((a - b).abs() < 1e-8, "{f:?}");
        }
    }
}

#[test]
fn solution_file_feeds_feasibility() {
    let dir = tempfile::tempdir().unwrap();
    let sol = dir.path().join("sol.json");
    let trace = dir.path().join("trace.csv");
    let jac = dir.path().join("jac.csv");
    let net = network("single_pipe_cnga.json");
    let out = potflow(&[
        "solve",
        path(&net),
        "--method",
        "homotopy",
        "--output",
        path(&sol),
        "--trace",
        path(&trace),
        "--dump-jacobian",
        path(&jac),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(std::fs::read(&sol).unwrap(), out.stdout);

    let trace = std::fs::read_to_string(&trace).unwrap();
    let mut lines = trace.lines();
    assert_eq!(lines.next(), Some("s,newton_iters,residual_norm"));
    let last: Vec<&str> = lines.last().unwrap().split(',').collect();
    assert_eq!(last[0], "1.0");

    let jac = std::fs::read_to_string(&jac).unwrap();
    assert!(jac.starts_with("row,col,value\n"));
    // d/dphi of -beta phi |phi| at phi = 2, beta = 1.
    assert!(jac.lines().any(|l| l == "0,0,-4.0"), "{jac}");

    let feas = potflow(&["feasibility", path(&net), "--solution", path(&sol)]);
    assert_eq!(feas.status.code(), Some(1));
    let report = stdout_json(&feas);
    assert_eq!(report["overall"], "Infeasible");
    assert_eq!(report["reasons"][0]["kind"], "NegativePressure");

    let direct = potflow(&["feasibility", path(&net)]);
    assert_eq!(stdout_json(&direct), report);
}

#[test]
fn feasibility_of_a_good_network() {
    let out = potflow(&["feasibility", path(&network("pressure_slack.json"))]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["overall"], "Feasible");
    assert!(String::from_utf8_lossy(&out.stderr).contains("Feasible"));
}

#[test]
fn pressure_slack_is_converted_on_load() {
    let out = potflow(&["solve", path(&network("pressure_slack.json"))]);
    let sol = stdout_json(&out);
    let p = sol["nodes"][0]["pressure"].as_f64().unwrap();
    assert!((p - 5.0).abs() < 1e-12);
}

#[test]
fn bounds_modes() {
    let paper = stdout_json(&potflow(&["bounds", path(&network("chain.json")), "--mode", "paper"]));
    assert_eq!(paper["L"], 10.0);
    assert_eq!(paper["mode"], "paper");
    let safe = stdout_json(&potflow(&["bounds", path(&network("chain.json"))]));
    assert_eq!(safe["L"], 20.0);
    assert_eq!(safe["guaranteed"], true);
}

#[test]
fn alpha_error_csv() {
    let out = potflow(&["alpha-error"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "p_mpa,alpha,alpha_cnga,abs_err");
    assert_eq!(lines.len(), 1 + 100 * 100 + 1);
    assert!(lines.last().unwrap().starts_with("# max_abs_err="));
}

#[test]
fn generated_networks_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = potflow(&["generate", "--topology", "mesh", "--nodes", "30", "--seed", "9"]);
    assert_eq!(out.status.code(), Some(0));
    let file = dir.path().join("g.json");
    std::fs::write(&file, &out.stdout).unwrap();
    let parsed = potflow::io::read_network(&file).unwrap();
    assert_eq!(potflow::io::network_to_json(&parsed).as_bytes(), out.stdout.strip_suffix(b"\n").unwrap());
    assert_eq!(potflow(&["validate", path(&file)]).status.code(), Some(0));
}

#[test]
fn probe_finds_one_state() {
    let out = potflow(&["probe", path(&network("triangle.json")), "--trials", "6", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let rep = stdout_json(&out);
    assert_eq!(rep["distinct"], 1);
    assert_eq!(rep["trials"].as_array().unwrap().len(), 6);
}
