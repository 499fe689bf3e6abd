use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn wellcond(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wellcond"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn gen(dir: &TempDir, name: &str, args: &[&str]) -> PathBuf {
    let out = path(dir, name);
    let mut all = vec!["gen"];
    all.extend_from_slice(args);
    all.extend_from_slice(&["--out", s(&out)]);
    let o = wellcond(&all);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    out
}

fn report(p: &Path) -> Value {
    serde_json::from_slice(&fs::read(p).unwrap()).unwrap()
}

const X: &str = r#"{"rows":2,"cols":2,"data":[[0,0],[1,0],[1,0],[0,0]]}"#;

#[test]
fn gen_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let args = ["MATINV", "--n", "3", "--kappa", "4", "--epsilon", "0.1", "--seed", "7"];
    let a = gen(&dir, "a.json", &args);
    let b = gen(&dir, "b.json", &args);
    assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());
    let c = gen(&dir, "c.json", &["MATINV", "--n", "3", "--kappa", "4", "--epsilon", "0.1", "--seed", "8"]);
    assert_ne!(fs::read(path(&dir, "a.json")).unwrap(), fs::read(c).unwrap());
}

#[test]
fn invalid_parameters_are_usage_errors() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "x.json");
    let o = wellcond(&["gen", "MATINV", "--n", "2", "--kappa", "0.5", "--epsilon", "0.1", "--out", s(&out)]);
    assert_eq!(code(&o), 2);
    assert!(!out.exists());
    assert_eq!(code(&wellcond(&["gen", "NOPE", "--n", "2", "--kappa", "2", "--epsilon", "0.1"])), 2);
    assert_eq!(code(&wellcond(&[])), 2);
}

#[test]
fn rule_must_match_the_input_type() {
    let dir = TempDir::new().unwrap();
    let inst = gen(&dir, "m.json", &["MATINV", "--n", "2", "--kappa", "3", "--epsilon", "0.2"]);
    assert_eq!(code(&wellcond(&["reduce", s(&inst), "--rule", "det_to_posdet"])), 2);
    assert_eq!(code(&wellcond(&["reduce", s(&inst), "--rule", "no_such_rule"])), 2);
}

#[test]
fn reduce_reports_the_identity_residual() {
    let dir = TempDir::new().unwrap();
    let inst = gen(&dir, "m.json", &["MATINV", "--n", "3", "--kappa", "5", "--epsilon", "0.1", "--answer", "one"]);
    let (out, rep) = (path(&dir, "o.json"), path(&dir, "r.json"));
    let o = wellcond(&["reduce", s(&inst), "--rule", "matinv_to_posmatinv", "--out", s(&out), "--report", s(&rep)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let r = report(&rep);
    let id = r["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"].as_str().unwrap().starts_with("identity"))
        .unwrap();
    assert!(id["measured"].as_f64().unwrap() <= 1e-9);
    assert_eq!(r["decisions"]["source"], "One");
    assert_eq!(r["decisions"]["target"], "One");
    assert_eq!(r["exit_code"], 0);
    assert_eq!(r["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn repeated_reduce_equals_chain() {
    let dir = TempDir::new().unwrap();
    let inst = gen(&dir, "p.json", &["ITMATPROD", "--n", "2", "--m", "3", "--kappa", "2", "--epsilon", "0.2"]);
    let (step1, step2, chained) = (path(&dir, "1.json"), path(&dir, "2.json"), path(&dir, "c.json"));
    assert_eq!(code(&wellcond(&["reduce", s(&inst), "--rule", "itmatprod_to_matpow", "--out", s(&step1)])), 0);
    assert_eq!(code(&wellcond(&["reduce", s(&step1), "--rule", "matpow_to_matinv", "--out", s(&step2)])), 0);
    let o = wellcond(&["chain", s(&inst), "--path", "itmatprod_to_matpow,matpow_to_matinv", "--out", s(&chained)]);
    assert_eq!(code(&o), 0);
    assert_eq!(fs::read(step2).unwrap(), fs::read(chained).unwrap());
}

fn compile(dir: &TempDir, circuit: &str) -> Value {
    let c = path(dir, "c.json");
    fs::write(&c, circuit).unwrap();
    let (out, rep) = (path(dir, "o.json"), path(dir, "r.json"));
    let o = wellcond(&["compile-circuit", s(&c), "--target", "matinv-plus", "--out", s(&out), "--report", s(&rep)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    report(&rep)
}

#[test]
fn x_circuit_accepts_and_empty_circuit_rejects() {
    let dir = TempDir::new().unwrap();
    let x = format!(r#"{{"qubits":1,"gates":[{{"kind":"unitary","targets":[0],"matrices":[{X}]}}]}}"#);
    assert_eq!(compile(&dir, &x)["decisions"]["target"], "One");
    assert_eq!(compile(&dir, r#"{"qubits":1,"gates":[]}"#)["decisions"]["target"], "Zero");
}

#[test]
fn circuit_with_proof_qubits_is_rejected() {
    let dir = TempDir::new().unwrap();
    let c = path(&dir, "c.json");
    fs::write(&c, r#"{"qubits":2,"merlin_qubits":1,"gates":[]}"#).unwrap();
    assert_eq!(code(&wellcond(&["compile-circuit", s(&c)])), 2);
}

#[test]
fn identity_posdet_decides_one() {
    let dir = TempDir::new().unwrap();
    let inst = path(&dir, "d.json");
    fs::write(
        &inst,
        r#"{"type":"DET+","params":{"n":2,"m":1,"kappa":2,"epsilon":0.1},
            "matrices":[{"rows":2,"cols":2,"data":[[1,0],[0,0],[0,0],[1,0]]}],"b":0}"#,
    )
    .unwrap();
    for method in ["oracle", "series"] {
        let o = wellcond(&["solve", s(&inst), "--method", method]);
        assert_eq!(code(&o), 0);
        assert!(String::from_utf8_lossy(&o.stdout).contains("decision: One"), "{method}");
    }
}

#[test]
fn series_agrees_with_oracle() {
    let dir = TempDir::new().unwrap();
    for (kind, seed) in [("DET+", "1"), ("DET+", "2"), ("MATINV+", "3"), ("MATINV+", "4")] {
        let inst = gen(&dir, "i.json", &[kind, "--n", "4", "--kappa", "3", "--epsilon", "0.2", "--seed", seed]);
        let oracle = wellcond(&["solve", s(&inst), "--method", "oracle"]);
        let series = wellcond(&["solve", s(&inst), "--method", "series"]);
        assert_eq!(code(&oracle), 0);
        assert_eq!(oracle.stdout, series.stdout, "{kind} seed {seed}");
    }
}

#[test]
fn batch_verify_and_corrupted_kappa() {
    let dir = TempDir::new().unwrap();
    for (i, kind) in ["MATINV", "DET", "MATPOW"].iter().enumerate() {
        gen(&dir, &format!("{i}.json"), &[kind, "--n", "3", "--kappa", "4", "--epsilon", "0.1"]);
    }
    fs::write(path(&dir, "notes.txt"), "ignored").unwrap();
    let o = wellcond(&["verify", s(dir.path())]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("3 files: 3 pass, 0 fail"));

    let victim = path(&dir, "0.json");
    let mut v: Value = serde_json::from_slice(&fs::read(&victim).unwrap()).unwrap();
    v["params"]["kappa"] = Value::from(1.0);
    fs::write(&victim, serde_json::to_vec(&v).unwrap()).unwrap();
    assert_eq!(code(&wellcond(&["verify", s(&victim)])), 1);
    let o = wellcond(&["verify", s(dir.path())]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stdout).contains("2 pass, 1 fail"));

    fs::write(path(&dir, "broken.json"), "{").unwrap();
    assert_eq!(code(&wellcond(&["verify", s(dir.path())])), 2);
}

#[test]
fn report_reruns_reproduce_outputs() {
    let dir = TempDir::new().unwrap();
    let args = ["DET", "--n", "3", "--kappa", "4", "--epsilon", "0.1", "--seed", "11"];
    let (r1, r2) = (path(&dir, "r1.json"), path(&dir, "r2.json"));
    for r in [&r1, &r2] {
        let mut all = vec!["gen"];
        all.extend_from_slice(&args);
        all.extend_from_slice(&["--report", s(r)]);
        assert_eq!(code(&wellcond(&all)), 0);
    }
    let (mut a, mut b) = (report(&r1), report(&r2));
    for v in [&mut a, &mut b] {
        v.as_object_mut().unwrap().remove("wall_time_s");
        v.as_object_mut().unwrap().remove("command");
    }
    assert_eq!(a, b);
}
