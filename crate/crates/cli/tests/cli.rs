use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;
use tempfile::TempDir;

struct Out {
    code: i32,
    report: Value,
}

fn run(dir: &Path, args: &[&str]) -> Out {
    let out = Command::new(env!("CARGO_BIN_EXE_cybe-forge"))
        .current_dir(dir)
        .env_remove("CYBE_FORGE_SEED")
        .args(args)
        .output()
        .expect("binary runs");
    let report = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    Out { code: out.status.code().expect("exit code"), report }
}

fn check<'a>(report: &'a Value, name: &str) -> &'a Value {
    report["checks"].as_array().unwrap().iter().find(|c| c["name"] == name).unwrap_or_else(|| panic!("no check {name} in {report}"))
}

fn build_sl(dir: &Path, n: usize) -> PathBuf {
    let out = format!("sl{n}.json");
    assert_eq!(run(dir, &["lie", "build", "--type", "sl", "--n", &n.to_string(), "--out", &out]).code, 0);
    dir.join(out)
}

fn identity_file(dir: &Path, dim: usize) -> &'static str {
    let m: Vec<Vec<String>> = (0..dim).map(|i| (0..dim).map(|j| if i == j { "1" } else { "0" }.to_string()).collect()).collect();
    std::fs::write(dir.join("id.json"), serde_json::to_string(&m).unwrap()).unwrap();
    "id.json"
}

#[test]
fn build_and_validate_sl3() {
    let d = TempDir::new().unwrap();
    build_sl(d.path(), 3);
    let alg: Value = serde_json::from_str(&std::fs::read_to_string(d.path().join("sl3.json")).unwrap()).unwrap();
    assert_eq!(alg["schema"], "lie-algebra.v1");
    assert!(d.path().join("sl3.roots.json").exists());
    let r = run(d.path(), &["lie", "validate", "--in", "sl3.json"]);
    assert_eq!(r.code, 0);
    assert_eq!(r.report["schema"], "report.v1");
    assert_eq!(check(&r.report, "jacobi")["status"], "pass");
}

#[test]
fn out_of_range_rank_is_an_input_error() {
    let d = TempDir::new().unwrap();
    let r = run(d.path(), &["lie", "build", "--type", "sl", "--n", "99", "--out", "x.json"]);
    assert_eq!(r.code, 2);
    assert_eq!(r.report["status"], "error");
    assert!(!d.path().join("x.json").exists());
}

#[test]
fn missing_input_file_exits_2() {
    let d = TempDir::new().unwrap();
    assert_eq!(run(d.path(), &["lie", "validate", "--in", "nope.json"]).code, 2);
}

#[test]
fn subsystem_counts() {
    let d = TempDir::new().unwrap();
    for (n, count) in [(2, 2), (3, 5)] {
        build_sl(d.path(), n);
        let r = run(d.path(), &["roots", "subsystems", "--in", &format!("sl{n}.roots.json")]);
        assert_eq!(r.code, 0);
        assert_eq!(check(&r.report, "subsystems")["witness"]["count"], count);
    }
    assert_eq!(run(d.path(), &["lie", "build", "--sum", "sl2.json,sl2.json", "--out", "s.json"]).code, 0);
    let r = run(d.path(), &["roots", "subsystems", "--in", "s.roots.json"]);
    assert_eq!(check(&r.report, "subsystems")["witness"]["count"], 4);
}

#[test]
fn homogeneous_family_through_cybe_and_back() {
    let d = TempDir::new().unwrap();
    build_sl(d.path(), 3);
    let r = run(d.path(), &["avg", "homogeneous", "--alg", "sl3.json", "--roots", "sl3.roots.json", "--subsystem", "1", "--xi", "0:3/2", "--hperp-deg", "2", "--seed", "11", "--out", "fam.json"]);
    assert_eq!(r.code, 0, "{}", r.report);

    let r = run(d.path(), &["avg", "conf-check", "--op", "fam.json", "--roots", "sl3.roots.json", "--alg", "sl3.json"]);
    assert_eq!(r.code, 0, "{}", r.report);
    assert_eq!(check(&r.report, "homogeneous")["status"], "pass");

    assert_eq!(run(d.path(), &["avg", "leibniz", "--op", "fam.json", "--alg", "sl3.json"]).code, 0);

    let r = run(d.path(), &["cybe", "from-conf-avg", "--op", "fam.json", "--roots", "sl3.roots.json", "--out", "p.json", "--alg", "sl3.json"]);
    assert_eq!(r.code, 0, "{}", r.report);
    let r = run(d.path(), &["cybe", "check", "--op", "p.json", "--alg", "sl3.json"]);
    assert_eq!(r.code, 0, "{}", r.report);
    assert_eq!(check(&r.report, "cybe-tensor")["status"], "pass");

    assert_eq!(run(d.path(), &["cybe", "residue", "--in", "p.json", "--out", "res.json"]).code, 0);
    let read = |f: &str| -> Value { serde_json::from_str(&std::fs::read_to_string(d.path().join(f)).unwrap()).unwrap() };
    assert_eq!(read("res.json")["family"], read("fam.json")["family"]);
}

#[test]
fn identity_operator() {
    let d = TempDir::new().unwrap();
    build_sl(d.path(), 2);
    let id = identity_file(d.path(), 3);
    assert_eq!(run(d.path(), &["avg", "check", "--alg", "sl2.json", "--op", id]).code, 0);
    let r = run(d.path(), &["cybe", "from-avg", "--alg", "sl2.json", "--op", id, "--out", "p.json"]);
    assert_eq!(r.code, 0);
    assert_eq!(run(d.path(), &["cybe", "check", "--alg", "sl2.json", "--op", "p.json"]).code, 0);
    let p: Value = serde_json::from_str(&std::fs::read_to_string(d.path().join("p.json")).unwrap()).unwrap();
    assert_eq!(p["schema"], "laurent-op.v1");
    assert_eq!(p["coeffs"][0][0], -1);

    // the identity is not a Rota-Baxter operator of weight zero
    let r = run(d.path(), &["cybe", "rb-check", "--alg", "sl2.json", "--op", id]);
    assert_eq!(r.code, 1);
    assert_eq!(r.report["status"], "fail");
}

#[test]
fn non_averaging_operator_fails() {
    let d = TempDir::new().unwrap();
    build_sl(d.path(), 2);
    // T = E_{H1,E12}: sends E12 to H1
    let m: Vec<Vec<&str>> = (0..3).map(|i| (0..3).map(|j| if i == 0 && j == 2 { "1" } else { "0" }).collect()).collect();
    std::fs::write(d.path().join("t.json"), serde_json::to_string(&m).unwrap()).unwrap();
    let r = run(d.path(), &["avg", "check", "--alg", "sl2.json", "--op", "t.json"]);
    assert_eq!(r.code, 1);
    assert!(check(&r.report, "averaging")["witness"].is_object() || check(&r.report, "averaging")["witness"].is_array());
}

#[test]
fn run_all_small_and_deterministic() {
    let d = TempDir::new().unwrap();
    let args = ["report", "run-all", "--trials", "0", "--rank-max", "2", "--seed", "5"];
    let a = run(d.path(), &args);
    let b = run(d.path(), &args);
    assert_eq!(a.code, 0, "{}", a.report);
    let strip = |mut v: Value| {
        v.as_object_mut().unwrap().remove("timing");
        v
    };
    assert_eq!(strip(a.report), strip(b.report));
}

#[test]
fn run_all_rejects_a_bad_fixture() {
    let d = TempDir::new().unwrap();
    build_sl(d.path(), 2);
    // zero family is not homogeneous
    let fam = serde_json::json!({"schema": "conf-ave-op.v1", "N": 0, "family": [[["0","0","0"],["0","0","0"],["0","0","0"]]]});
    std::fs::write(d.path().join("bad.json"), fam.to_string()).unwrap();
    let r = run(d.path(), &["report", "run-all", "--trials", "0", "--rank-max", "1", "--fixture", "bad.json"]);
    assert_eq!(r.code, 1, "{}", r.report);
}

#[test]
fn seed_comes_from_environment() {
    let d = TempDir::new().unwrap();
    build_sl(d.path(), 3);
    let out = Command::new(env!("CARGO_BIN_EXE_cybe-forge"))
        .current_dir(d.path())
        .env("CYBE_FORGE_SEED", "42")
        .args(["avg", "homogeneous", "--alg", "sl3.json", "--roots", "sl3.roots.json", "--subsystem", "0", "--out", "f.json"])
        .output()
        .unwrap();
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["inputs"]["params"]["seed"], 42);
}
