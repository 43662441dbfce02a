use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_epdyn"))
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(task: &str, cfg: &Path, extra: &[&str]) -> Output {
    bin().arg(task).arg(cfg).args(extra).output().unwrap()
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    (header, rows)
}

const STUB_SWEEP: &str = r#"{"schema_version":1,"model":{"kind":"stub","n":4,"hopping":{"profile":"uniform","up":2.0},"lambda":0.0},
 "sweep":{"parameter":"lambda","start":-1.2,"stop":1.0,"step":0.01}}"#;

const STUB_EVOLVE: &str = r#"{"schema_version":1,"model":{"kind":"stub","n":4,"hopping":{"profile":"uniform","up":2.0},"lambda":0.0},
 "initial_state":{"sites":["B4"]},"times":{"start":0,"stop":20,"count":201}}"#;

#[test]
fn spectrum_sweep_has_one_row_per_lambda() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "s.json", STUB_SWEEP);
    let out = run("spectrum-sweep", &cfg, &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("# epdyn "));
    assert!(text.contains("# config_sha256 "));
    assert!(text.contains("# tolerances "));
    let (header, rows) = csv_rows(&text);
    assert_eq!(header.len(), 1 + 2 * 11);
    assert_eq!(header[0], "lambda");
    assert_eq!(rows.len(), 221);
    assert_eq!(rows[0][0], -1.2);
    assert_eq!(rows[120][0], 0.0);
    assert_eq!(rows[220][0], 1.0);
    // λ = 0.5 lies in the real-spectrum window.
    let half = rows.iter().find(|r| r[0] == 0.5).unwrap();
    assert!(half[1..].iter().skip(1).step_by(2).all(|im| im.abs() < 1e-10));
}

#[test]
fn evolve_writes_populations_for_every_site() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "e.json", STUB_EVOLVE);
    let out_path = dir.path().join("pop.csv");
    let out = run("evolve", &cfg, &["--out", out_path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = csv_rows(&std::fs::read_to_string(&out_path).unwrap());
    for label in ["A1", "A2", "A3", "A4", "B4"] {
        assert!(header.contains(&format!("pop_{label}")));
    }
    assert_eq!(rows.len(), 201);
    assert_eq!(rows[0][0], 0.0);
    assert_eq!(rows[200][0], 20.0);
    let b4 = header.iter().position(|h| h == "pop_B4").unwrap();
    assert!((rows[0][b4] - 1.0).abs() < 1e-12);
    assert!(header.last().unwrap() == "fidelity_direction");
    assert!(dir.path().join("pop.csv.config.json").exists());
}

#[test]
fn nondefective_matrix_file_reports_standard_completeness() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "m.csv", "# diag(1, 2)\n1,0,0,0\n0,0,2,0\n");
    let cfg = write(dir.path(), "p.json", r#"{"schema_version":1,"model":{"kind":"matrix-file","path":"m.csv"}}"#);
    let out = run("pcr-check", &cfg, &[]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["scenario"], "nondefective; standard completeness used");
    assert!(v["closure_residual"].as_f64().unwrap() <= 1e-12);
    assert!(v["header"]["config_sha256"].as_str().unwrap().len() == 64);
}

#[test]
fn pcr_check_on_stub_ep() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "p.json", r#"{"schema_version":1,"model":{"kind":"stub","n":4,"hopping":{"profile":"sqrt"},"lambda":0.0},"include_basis":true}"#);
    let out = run("pcr-check", &cfg, &[]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["closure_residual"].as_f64().unwrap() <= 1e-10);
    let zero = v["clusters"].as_array().unwrap().iter().find(|c| c["algebraic_multiplicity"] == 5).unwrap();
    assert_eq!(zero["geometric_multiplicity"], 4);
    assert_eq!(v["basis"]["dim"], 11);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "d.json",
        r#"{"schema_version":1,"model":{"kind":"diamond","epsilon":[2,0],"kappa":1},"members":12,"seed":5,"times":{"start":0,"stop":20,"count":11}}"#,
    );
    let a = run("density-evolve", &cfg, &[]);
    let b = run("density-evolve", &cfg, &[]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = run("density-evolve", &cfg, &["--seed", "6"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn effective_config_reruns_to_identical_output() {
    let dir = TempDir::new().unwrap();
    let sub = dir.path().join("sub");
    std::fs::create_dir(&sub).unwrap();
    write(&sub, "m.csv", "0,0,1,0\n0,0,0,0\n");
    let cfg = write(&sub, "p.json", r#"{"schema_version":1,"model":{"kind":"matrix-file","path":"m.csv"},"initial_state":{"sites":["1"]},"times":{"values":[0,1,2]}}"#);
    let first = dir.path().join("first.csv");
    assert!(run("evolve", &cfg, &["--out", first.to_str().unwrap(), "--rank-tol", "1e-12"]).status.success());
    let eff = dir.path().join("first.csv.config.json");
    let second = dir.path().join("second.csv");
    let out = run("evolve", &eff, &["--out", second.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(std::fs::read(&first).unwrap(), std::fs::read(&second).unwrap());
    let text = std::fs::read_to_string(&first).unwrap();
    assert!(text.contains("\"rank_tol\":1e-12"));
}

#[test]
fn transfer_and_elimination_tasks() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "t.json",
        r#"{"schema_version":1,"model":{"kind":"diamond","epsilon":[0,-1],"kappa":-1},"initial_state":{"sites":["B","D"]},"times":{"start":0,"stop":50,"count":51}}"#,
    );
    let out = run("transfer", &cfg, &[]);
    assert!(out.status.success());
    let (_, rows) = csv_rows(std::str::from_utf8(&out.stdout).unwrap());
    let last = rows.last().unwrap();
    assert!(last[1] <= 0.01 && last[2] >= 0.999);

    let cfg = write(
        dir.path(),
        "a.json",
        r#"{"schema_version":1,"model":{"kind":"adiabatic-stub","target":{"n":3,"hopping":{"profile":"uniform","up":2.0},"lambda":0.0},"kappa_aux":100},
            "sweep":{"parameter":"kappa_aux","values":[100,1000,10000]},"initial_state":{"sites":["B3"]},"times":{"start":0,"stop":10,"count":11}}"#,
    );
    let out = run("eliminate-compare", &cfg, &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = csv_rows(std::str::from_utf8(&out.stdout).unwrap());
    assert_eq!(header, ["kappa_aux", "time", "error_with_induced_decay", "error_ideal_model"]);
    assert_eq!(rows.len(), 33);
    let max = |k: f64| rows.iter().filter(|r| r[0] == k).map(|r| r[2]).fold(0.0, f64::max);
    assert!(max(100.0) > max(1000.0) && max(1000.0) > max(10000.0));
    assert!(max(10000.0) <= 1e-2);
}

#[test]
fn config_errors_exit_with_code_two() {
    let dir = TempDir::new().unwrap();
    let cases = [
        ("evolve", r#"{"schema_version":1,"model":{"kind":"stub"}}"#),
        ("evolve", r#"{"schema_version":99,"model":{"kind":"diamond","epsilon":[2,0],"kappa":1}}"#),
        ("evolve", r#"{"schema_version":1,"model":{"kind":"diamond","epsilon":[2,0],"kappa":1},"initial_state":{"sites":["Z"]},"times":{"values":[0,1]}}"#),
        ("evolve", r#"{"schema_version":1,"model":{"kind":"diamond","epsilon":[2,0],"kappa":1},"initial_state":{"sites":["A"]},"times":{"values":[1,0]}}"#),
        ("spectrum-sweep", r#"{"schema_version":1,"model":{"kind":"diamond","epsilon":[2,0],"kappa":1},"sweep":{"parameter":"lambda","values":[0]}}"#),
        ("evolve", r#"{"schema_version":1,"task":"transfer","model":{"kind":"diamond","epsilon":[2,0],"kappa":1}}"#),
        ("transfer", r#"{"schema_version":1,"model":{"kind":"stub","n":2,"hopping":{"profile":"sqrt"},"lambda":0},"initial_state":{"sites":["A1"]},"times":{"values":[0]}}"#),
    ];
    for (k, (task, text)) in cases.iter().enumerate() {
        let cfg = write(dir.path(), &format!("c{k}.json"), text);
        let out = run(task, &cfg, &[]);
        assert_eq!(out.status.code(), Some(2), "case {k}: {}", String::from_utf8_lossy(&out.stderr));
        let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
        assert_eq!(err["error"]["kind"], "config");
    }
}

#[test]
fn numerical_failures_exit_with_code_three() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "n.json", r#"{"schema_version":1,"model":{"kind":"diamond","epsilon":[2,0],"kappa":1},"tolerances":{"closure_tol":1e-300}}"#);
    let out = run("pcr-check", &cfg, &[]);
    assert_eq!(out.status.code(), Some(3));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "numerical");
}
