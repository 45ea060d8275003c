use osl::cli::run;
use serde_json::{json, Value};
use std::path::PathBuf;
use std::process::Command;

fn call(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(std::iter::once("osl").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json_of(s: &str) -> Value {
    serde_json::from_str(s).unwrap_or_else(|e| panic!("{e}: {s}"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("osl-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn write(name: &str, body: &str) -> String {
    let p = scratch(name);
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

const THETA: &str = r#"{"graph":{"vertices":2,"edges":[[0,1],[0,1],[0,1]]},"lengths":["3","2","5"]}"#;

#[test]
fn brun_expand_one_step() {
    let (code, out, _) = call(&["brun", "expand", "--vector", "5/10,3/10,2/10", "--steps", "1"]);
    assert_eq!(code, 0);
    let v = json_of(&out);
    assert_eq!(v["symbols"], json!([[1, 2]]));
    assert_eq!(v["iterates"][1], json!(["1/5", "3/10", "1/5"]));
}

#[test]
fn fold_matrix_example() {
    let (code, out, _) = call(&["matrices", "fold", "--i", "1", "--j", "2", "--dim", "3"]);
    assert_eq!(code, 0);
    assert_eq!(json_of(&out)["matrix"], json!([["1", "-1", "0"], ["0", "1", "0"], ["0", "0", "1"]]));
}

#[test]
fn generated_ray_passes_certify_in_the_binary() {
    let bin = env!("CARGO_BIN_EXE_osl");
    let path = scratch("pipeline.json");
    let path = path.to_str().unwrap();
    let gen = Command::new(bin).args(["ray", "generate", "--rank", "2", "--horizon", "20", "--mode", "theta", "--out", path]).output().unwrap();
    assert!(gen.status.success());
    let cert = Command::new(bin).args(["ray", "certify", "--ray", path]).output().unwrap();
    assert!(cert.status.success(), "{}", String::from_utf8_lossy(&cert.stderr));
    let v = json_of(&String::from_utf8(cert.stdout).unwrap());
    assert_eq!(v["folds"].as_array().unwrap().len(), 20);
    assert_eq!(v["distance"]["bits"], 256);
}

#[test]
fn outputs_are_deterministic() {
    let a = call(&["ray", "generate", "--rank", "2", "--horizon", "15", "--mode", "full"]);
    let b = call(&["ray", "generate", "--rank", "2", "--horizon", "15", "--mode", "full"]);
    assert_eq!(a.0, 0);
    assert_eq!(a.1, b.1);
    let s1 = call(&["--seed", "5", "pf-sample", "--target", "1/2,1/3,1/6", "--eps", "1/100"]);
    let s2 = call(&["--seed", "5", "pf-sample", "--target", "1/2,1/3,1/6", "--eps", "1/100"]);
    assert_eq!(s1.0, 0, "{}", s1.2);
    assert_eq!(s1.1, s2.1);
}

#[test]
fn find_and_plotdata() {
    let ray = write("find.json", &call(&["ray", "generate", "--rank", "2", "--horizon", "60"]).1);
    let target = write("theta.json", THETA);
    let (code, out, err) = call(&["ray", "find", "--ray", &ray, "--target", &target, "--eps", "0.05"]);
    assert_eq!(code, 0, "{err}");
    let v = json_of(&out);
    assert!(v["distance"].as_f64().unwrap() < 0.05);
    assert_eq!(v["translation_identity"], true);

    let (code, out, _) = call(&["ray", "plotdata", "--ray", &ray]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "step,simplex,lengths,distance");
    assert_eq!(lines.len(), 62);
    assert!(lines[1].ends_with(",0"));
}

#[test]
fn foldline_and_decompose() {
    let target = write("line.json", THETA);
    let (code, out, err) = call(&["foldline", "rose-to-rose", "--point", &target, "--turn", "-0,-1", "--eps", "1/100"]);
    assert_eq!(code, 0, "{err}");
    let v = json_of(&out);
    assert!(["1", "-1"].contains(&v["determinant"].as_str().unwrap()));
    assert_eq!(v["proper"], true);
    let (code, out, _) = call(&["foldline", "eval", "--point", &target, "--turn", "-0,-1", "--eps", "1/100", "--time", "0"]);
    assert_eq!(code, 0);
    assert_eq!(json_of(&out)["lengths"].as_array().unwrap().len(), 2);

    let graph = write("graph.json", r#"{"vertices":2,"edges":[[0,1],[0,1],[0,1]]}"#);
    let (code, out, err) = call(&["decompose", "--graph", &graph, "--turn", "+0,+1"]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(json_of(&out)["verified"], true);
}

#[test]
fn every_error_has_one_category() {
    let (code, _, err) = call(&["matrices", "fold", "--i", "2", "--j", "2", "--dim", "3"]);
    assert_eq!((code, json_of(&err)["error"]["category"].as_str().unwrap()), (3, "domain"));
    let (code, _, err) = call(&["ray", "generate", "--rank", "2"]);
    assert_eq!((code, json_of(&err)["error"]["category"].as_str().unwrap()), (2, "usage"));
    let bad = write("bad.json", "{not json");
    let (code, _, err) = call(&["ray", "certify", "--ray", &bad]);
    assert_eq!((code, json_of(&err)["error"]["kind"].as_str().unwrap()), (2, "parse"));

    let mut file = json_of(&call(&["ray", "generate", "--rank", "2", "--horizon", "5"]).1);
    file["base"][0] = json!("1/3");
    let tampered = write("tampered.json", &file.to_string());
    assert_eq!(call(&["ray", "certify", "--ray", &tampered]).0, 2);

    let ray = write("budget.json", &call(&["ray", "generate", "--rank", "2", "--horizon", "5"]).1);
    let target = write("far.json", r#"{"graph":{"vertices":2,"edges":[[0,1],[0,1],[0,1]]},"lengths":["1000003","999983","7"]}"#);
    let (code, _, err) = call(&["ray", "find", "--ray", &ray, "--target", &target, "--eps", "1e-12", "--budget", "2"]);
    assert_eq!((code, json_of(&err)["error"]["category"].as_str().unwrap()), (4, "not-found"));
    assert_eq!(call(&["--backend", "rational", "--precision-bits", "80", "ray", "generate", "--rank", "2", "--horizon", "2"]).0, 2);
    assert_eq!(call(&["--format", "csv", "matrices", "fold", "--i", "1", "--j", "2", "--dim", "2"]).0, 2);
}

#[test]
fn rational_backend_omits_floats() {
    let ray = write("rational.json", &call(&["ray", "generate", "--rank", "2", "--horizon", "4"]).1);
    let (code, out, _) = call(&["--backend", "rational", "ray", "certify", "--ray", &ray]);
    assert_eq!(code, 0);
    let v = json_of(&out);
    assert!(v["distance"].is_null());
    assert!(osl::numeric::parse_rational(v["volume_ratio"].as_str().unwrap()).unwrap() > osl::numeric::q(1, 1));
}
