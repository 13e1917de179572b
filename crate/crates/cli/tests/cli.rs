use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_skein-lab"))
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("spawn skein-lab")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).trim_end().to_string()
}

fn schema_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas")
}

fn validate(report: &Path, schema: &str) {
    let schema: Value = serde_json::from_str(&fs::read_to_string(schema_dir().join(schema)).unwrap()).unwrap();
    let doc: Value = serde_json::from_str(&fs::read_to_string(report).unwrap()).unwrap();
    let v = jsonschema::validator_for(&schema).expect("schema compiles");
    let errors: Vec<String> = v.iter_errors(&doc).map(|e| format!("{} at {}", e, e.instance_path())).collect();
    assert!(errors.is_empty(), "{} violates {:?}: {errors:?}", report.display(), schema);
}

fn corpus_dir() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["corpus", "--out-dir", "c", "--report", "corpus.json"]);
    assert!(o.status.success(), "{o:?}");
    validate(&dir.path().join("corpus.json"), "corpus.v1.json");
    dir
}

#[test]
fn cheb_five() {
    let o = bin().args(["cheb", "5"]).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "x^5 - 5*x^3 + 5*x");
}

#[test]
fn empty_bracket_is_one() {
    let dir = corpus_dir();
    let o = run_in(dir.path(), &["bracket", "c/diagrams/empty.json", "--report", "r.json"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "1");
    validate(&dir.path().join("r.json"), "bracket.v1.json");
}

#[test]
fn bracket_at_root() {
    let dir = corpus_dir();
    let o = run_in(dir.path(), &["bracket", "c/diagrams/b2_1_1_1.json", "--at-root", "5,1", "--report", "r.json"]);
    assert_eq!(o.status.code(), Some(0));
    validate(&dir.path().join("r.json"), "bracket.v1.json");
    let r: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(r["result"]["at_root"]["n"], 5);
}

#[test]
fn exit_codes() {
    let dir = corpus_dir();
    // usage
    assert_eq!(bin().args(["cheb"]).output().unwrap().status.code(), Some(64));
    assert_eq!(bin().args(["frobnicate"]).output().unwrap().status.code(), Some(64));
    assert_eq!(bin().args(["cheb", "3", "--at-root", "5,1"]).output().unwrap().status.code(), Some(64));
    assert_eq!(bin().args(["skein", "nf", "X1", "--at-root", "five"]).output().unwrap().status.code(), Some(64));
    // validation
    fs::write(dir.path().join("bad.json"), r#"{"crossings":[[1,1,2,3]]}"#).unwrap();
    assert_eq!(run_in(dir.path(), &["bracket", "bad.json"]).status.code(), Some(2));
    assert_eq!(run_in(dir.path(), &["bracket", "missing.json"]).status.code(), Some(2));
    assert_eq!(bin().args(["skein", "nf", "X4"]).output().unwrap().status.code(), Some(2));
    assert_eq!(bin().args(["skein", "nf", "X1", "--at-root", "4,1"]).output().unwrap().status.code(), Some(2));
    // invariant violation: tampered bundle
    let o = run_in(dir.path(), &["qrep", "build", "c/triangulations/punctured_torus.json", "--N", "3", "--report", "q.json"]);
    assert_eq!(o.status.code(), Some(0));
    let mut q: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("q.json")).unwrap()).unwrap();
    let x = q["result"]["bundle"]["images"][0][0][0][0].as_f64().unwrap();
    q["result"]["bundle"]["images"][0][0][0][0] = (x + 1e-3).into();
    fs::write(dir.path().join("bad_q.json"), q.to_string()).unwrap();
    assert_eq!(run_in(dir.path(), &["qrep", "verify", "bad_q.json"]).status.code(), Some(3));
}

#[test]
fn skein_commands() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["skein", "nf", "X2*X1", "--report", "nf.json"]);
    assert_eq!(stdout(&o), "(A^-1 - A^3)*X3 + (A^2)*X1*X2");
    validate(&dir.path().join("nf.json"), "skein-nf.v1.json");
    let o = run_in(dir.path(), &["skein", "nf", "X1^3 - 3*X1", "--at-root", "3,1", "--report", "nf3.json"]);
    assert_eq!(o.status.code(), Some(0));
    validate(&dir.path().join("nf3.json"), "skein-nf.v1.json");
    let o = run_in(dir.path(), &["skein", "central", "--N", "3", "--report", "c.json"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("verbatim: central"));
    validate(&dir.path().join("c.json"), "skein-central.v1.json");
}

#[test]
fn charvar_commands() {
    let dir = tempfile::tempdir().unwrap();
    // a = [[2,1],[1,1]], b = [[1,1],[0,1]]
    fs::write(
        dir.path().join("rep.json"),
        "[[[2,0],[1,0],[1,0],[1,0]],[[1,0],[1,0],[0,0],[1,0]]]",
    )
    .unwrap();
    let o = run_in(dir.path(), &["charvar", "trace", "--word", "ab", "--rep", "rep.json", "--report", "t.json"]);
    assert_eq!(o.status.code(), Some(0));
    let t: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("t.json")).unwrap()).unwrap();
    assert_eq!(t["result"]["trace"][0].as_f64(), Some(4.0));
    validate(&dir.path().join("t.json"), "charvar-trace.v1.json");
    let o = run_in(dir.path(), &["charvar", "fricke", "--p", "1", "--q", "1", "--rep", "rep.json", "--report", "f.json"]);
    assert_eq!(o.status.code(), Some(0));
    validate(&dir.path().join("f.json"), "charvar-fricke.v1.json");
    fs::write(dir.path().join("sing.json"), "[[[1,0],[0,0],[0,0],[0,0]]]").unwrap();
    assert_eq!(run_in(dir.path(), &["charvar", "trace", "--word", "a", "--rep", "sing.json"]).status.code(), Some(2));
}

#[test]
fn tt_commands() {
    let dir = corpus_dir();
    for (name, _) in skein_core::traintrack::CORPUS {
        let file = format!("c/triangulations/{name}.json");
        let o = run_in(dir.path(), &["tt", "basis", &file, "--report", "b.json"]);
        assert_eq!(o.status.code(), Some(0), "{name}");
        validate(&dir.path().join("b.json"), "tt-basis.v1.json");
        let b: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("b.json")).unwrap()).unwrap();
        assert_eq!(b["result"]["rank"], b["result"]["expected_rank"]);
    }
    let o = run_in(
        dir.path(),
        &["tt", "form", "c/triangulations/punctured_torus.json", "--a", "1,1,-1,1,1,-1", "--b", "-1,1,1,-1,1,1", "--report", "f.json"],
    );
    assert_eq!(stdout(&o), "-8");
    validate(&dir.path().join("f.json"), "tt-form.v1.json");
    let o = run_in(dir.path(), &["tt", "form", "c/triangulations/punctured_torus.json", "--a", "1,0,0,0,0,0", "--b", "0,1,0,0,0,0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn qrep_roundtrip() {
    let dir = corpus_dir();
    fs::write(
        dir.path().join("chi.json"),
        r#"{"nth_powers":[[2.0,0.0],[0.5,0.5],[-1.0,0.25]],"kernel_vectors":[],"kernel_values":[]}"#,
    )
    .unwrap();
    for n in ["3", "5", "7"] {
        let o = run_in(
            dir.path(),
            &["qrep", "build", "c/triangulations/punctured_torus.json", "--N", n, "--character", "chi.json", "--report", "q.json"],
        );
        assert_eq!(o.status.code(), Some(0), "{o:?}");
        validate(&dir.path().join("q.json"), "qrep-build.v1.json");
        let o = run_in(dir.path(), &["qrep", "verify", "q.json", "--report", "v.json"]);
        assert_eq!(o.status.code(), Some(0));
        validate(&dir.path().join("v.json"), "qrep-verify.v1.json");
        let v: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("v.json")).unwrap()).unwrap();
        let d: u64 = n.parse().unwrap();
        assert_eq!(v["result"]["irreducibility_rank"].as_u64(), Some(d * d));
    }
}

#[test]
fn shadow_run_acceptance() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["shadow", "run", "--N", "3", "--samples", "20", "--seed", "7", "--report", "s.json"]);
    assert_eq!(o.status.code(), Some(0), "{o:?}");
    validate(&dir.path().join("s.json"), "shadow-run.v1.json");
    let s: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("s.json")).unwrap()).unwrap();
    assert!(s["result"]["max_curve_error"].as_f64().unwrap() < 1e-6);
    assert!(s["result"]["max_puncture_error"].as_f64().unwrap() < 1e-6);
    assert_eq!(s["result"]["samples"].as_array().unwrap().len(), 20);
}

#[test]
fn reports_are_deterministic() {
    let dir = corpus_dir();
    let a = run_in(dir.path(), &["shadow", "run", "--N", "5", "--samples", "6", "--seed", "3", "--report", "a.json"]);
    let b = bin()
        .current_dir(dir.path())
        .env("SKEINLAB_THREADS", "1")
        .args(["shadow", "run", "--triangulation", "c/triangulations/punctured_torus.json", "--N", "5", "--samples", "6", "--seed", "3", "--report", "b.json"])
        .output()
        .unwrap();
    assert!(a.status.success() && b.status.success());
    let ra: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("a.json")).unwrap()).unwrap();
    let rb: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("b.json")).unwrap()).unwrap();
    // same numbers regardless of thread count; only the input digest differs
    assert_eq!(ra["result"], rb["result"]);
    let c = bin()
        .current_dir(dir.path())
        .env("SKEINLAB_THREADS", "2")
        .args(["shadow", "run", "--N", "5", "--samples", "6", "--seed", "3", "--report", "c.json"])
        .output()
        .unwrap();
    assert!(c.status.success());
    assert_eq!(fs::read(dir.path().join("a.json")).unwrap(), fs::read(dir.path().join("c.json")).unwrap());
}

#[test]
fn corpus_is_reproducible() {
    let a = corpus_dir();
    let b = corpus_dir();
    assert_eq!(fs::read(a.path().join("corpus.json")).unwrap(), fs::read(b.path().join("corpus.json")).unwrap());
    for entry in fs::read_dir(a.path().join("c/diagrams")).unwrap() {
        let path = entry.unwrap().path();
        let o = bin().arg("bracket").arg(&path).output().unwrap();
        assert_eq!(o.status.code(), Some(0), "{}", path.display());
    }
}
