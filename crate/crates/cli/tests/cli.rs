use std::path::PathBuf;
use std::process::{Command, Output};
use std::sync::atomic::{AtomicUsize, Ordering};

use serde_json::Value;

fn scratch(name: &str, contents: &str) -> PathBuf {
    static COUNTER: AtomicUsize = AtomicUsize::new(0);
    let dir = std::env::temp_dir().join(format!("extendkit-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(format!("{}-{name}", COUNTER.fetch_add(1, Ordering::Relaxed)));
    std::fs::write(&path, contents).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_extendkit")).args(args).output().unwrap()
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

const CUBE: &str = r#"{"m":2,"points":[{"set":[],"value":"0"},{"set":[0],"value":"0"},{"set":[1],"value":"0"},{"set":[0,1],"value":"1"}]}"#;

#[test]
fn linear_instance_extends_as_xos() {
    let f = scratch("lin.json", r#"{"m":3,"points":[{"set":[0],"value":"1"},{"set":[1,2],"value":"5/2"},{"set":[0,1,2],"value":"7/2"}]}"#);
    let out = run(&["extend", "--class", "xos", "--input", f.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let doc = json_of(&out);
    assert_eq!(doc["verdict"], "extendible");
    assert_eq!(doc["vectors"].as_array().unwrap().len(), 3);
}

#[test]
fn cube_certificate_round_trip() {
    let f = scratch("cube.json", CUBE);
    let cert = f.with_extension("cert.json");
    let out = run(&["extend", "--class", "submodular", "--input", f.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert_eq!(json_of(&out)["certificate"]["tuples"][0]["count"], 1);

    let out = run(&["certify", "--input", f.to_str().unwrap(), "--out", cert.to_str().unwrap(), "--boolean"]);
    assert_eq!(code(&out), 1);
    assert!(json_of(&out)["circuit"]["gates"].is_array());
    let out = run(&["verify-cert", "--cert", cert.to_str().unwrap(), "--input", f.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert_eq!(json_of(&out)["slack"], "1");
    let out = run(&["rewrite-cert", "--cert", cert.to_str().unwrap(), "--input", f.to_str().unwrap()]);
    assert_eq!(code(&out), 0);

    let fixed = scratch("flat.json", &CUBE.replace(r#""value":"1""#, r#""value":"0""#));
    let out = run(&["verify-cert", "--cert", cert.to_str().unwrap(), "--input", fixed.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert_eq!(json_of(&out)["valid"], false);
}

#[test]
fn subadditive_violation_is_reported() {
    let f = scratch("sub.json", r#"{"m":2,"points":[{"set":[0],"value":"1"},{"set":[1],"value":"1"},{"set":[0,1],"value":"3"}]}"#);
    for class in ["subadditive", "subadditive-nonmonotone"] {
        let out = run(&["extend", "--class", class, "--input", f.to_str().unwrap()]);
        assert_eq!(code(&out), 1);
        assert_eq!(json_of(&out)["violation"]["cover_sum"], "2");
    }
    let out = run(&["approx", "--class", "subadditive", "--input", f.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert_eq!(json_of(&out)["alpha"], "3/2");
    let out = run(&["oracle", "--class", "subadditive", "--input", f.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
}

#[test]
fn tester_is_reproducible() {
    let values: Vec<String> = (0..16u32).map(|k| format!("\"{}\"", k.count_ones())).collect();
    let table = scratch("modular.json", &format!(r#"{{"m":4,"values":[{}]}}"#, values.join(",")));
    let args = ["test", "--class", "subadditive", "--oracle", table.to_str().unwrap(), "--epsilon", "0.25", "--seed", "7"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let doc = json_of(&a);
    assert_eq!(doc["verdict"], "accept");
    assert!(doc["queries"].as_u64().unwrap() > 0);

    let mut many: Vec<&str> = args.to_vec();
    many.extend(["--trials", "5", "--jobs", "2"]);
    let out = run(&many);
    assert_eq!(code(&out), 0);
    assert_eq!(json_of(&out)["reports"].as_array().unwrap().len(), 5);
}

#[test]
fn convex_operations() {
    let f = scratch("cvx.json", r#"{"dim":1,"points":[{"x":["0"],"value":"0"},{"x":["1"],"value":"2"},{"x":["2"],"value":"2"}]}"#);
    let p = f.to_str().unwrap();
    assert_eq!(code(&run(&["extend", "--class", "convex", "--input", p])), 1);
    let out = run(&["eval", "--class", "convex-roof", "--at", r#"["1/2"]"#, "--input", p]);
    assert_eq!(json_of(&out)["value"], "1/2");
    let out = run(&["eval", "--class", "convex-roof", "--at", r#"["3"]"#, "--input", p]);
    assert_eq!(json_of(&out)["value"], Value::Null);
    let out = run(&["eval", "--class", "convex-tilde", "--at", r#"["3"]"#, "--input", p]);
    assert_eq!(json_of(&out)["value"], "3");
    let out = run(&["vertices", "--input", p]);
    assert_eq!(json_of(&out)["count"], 1);
}

#[test]
fn exit_codes_for_errors() {
    let f = scratch("cube.json", CUBE);
    let out = run(&["extend", "--class", "modular", "--input", f.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(out.stdout.is_empty());

    let bad = scratch("bad.json", r#"{"m":2,"points":[{"set":[1,0],"value":"1"}]}"#);
    let out = run(&["extend", "--class", "submodular", "--input", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("strictly increasing"));

    let flat = scratch("flat.json", r#"{"dim":2,"points":[{"x":["0","0"],"value":"0"},{"x":["1","1"],"value":"1"}]}"#);
    let out = run(&["vertices", "--input", flat.to_str().unwrap()]);
    assert_eq!(code(&out), 3);

    let big = scratch("big.json", r#"{"m":6,"points":[{"set":[0],"value":"1"}]}"#);
    let out = run(&["oracle", "--class", "xos", "--input", big.to_str().unwrap()]);
    assert_eq!(code(&out), 3);

    let out = run(&["extend", "--class", "submodular", "--cap", "1", "--input", f.to_str().unwrap()]);
    assert_eq!(code(&out), 3);
}

#[test]
fn generated_certificates_verify() {
    for seed in ["1", "2", "3"] {
        let function = scratch("gen-f.json", "");
        let out = run(&["gen", "--kind", "cert", "--m", "4", "--n", "3", "--seed", seed, "--function-out", function.to_str().unwrap()]);
        assert_eq!(code(&out), 0);
        let cert = scratch("gen-c.json", &String::from_utf8(out.stdout).unwrap());
        let out = run(&["verify-cert", "--cert", cert.to_str().unwrap(), "--input", function.to_str().unwrap()]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    }
    let out = run(&["gen", "--kind", "antichain", "--m", "4", "--n", "5", "--lo=-3", "--hi=3"]);
    let f = scratch("anti.json", &String::from_utf8(out.stdout).unwrap());
    let out = run(&["extend", "--class", "submodular", "--input", f.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert_eq!(json_of(&out)["antichain"], true);
}

#[test]
fn version_names_the_schema() {
    let out = run(&["--version"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("schema 1"));
}
