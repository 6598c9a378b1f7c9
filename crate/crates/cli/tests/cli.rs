use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_metrifill"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn error_json(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str(text.lines().last().unwrap_or("")).expect("stderr carries JSON")
}

fn read_json(path: impl AsRef<Path>) -> Value {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

#[test]
fn patch_pipeline_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    assert_eq!(run(d, &["fixture", "euclidean_patch", "--n", "2", "--out", "w"]).status.code(), Some(0));
    let approx = run(d, &["approx", "--input", "w/euclidean_patch.json", "--eps", "0.2", "--out", "w"]);
    assert_eq!(approx.status.code(), Some(0), "{}", String::from_utf8_lossy(&approx.stderr));
    let verify = run(d, &["verify", "--input", "w/euclidean_patch.json", "--out", "w"]);
    assert_eq!(verify.status.code(), Some(0), "{}", String::from_utf8_lossy(&verify.stderr));

    let cert = read_json(d.join("w/certificate.json"));
    assert_eq!(cert["pass"], true);
    assert_eq!(cert["eps"], 0.2);
    assert_eq!(cert["pairs"].as_array().unwrap().len(), 2000);
    assert_eq!(cert, read_json(d.join("w/certificate_0.json")));
    let level = read_json(d.join("w/level_0.json"));
    assert_eq!(level["part_areas"].as_array().unwrap().len(), 8);
    assert_eq!(level["euler_characteristic"], 1);
    let m = read_json(d.join("w/verify.manifest.json"));
    assert_eq!(m["command"], "verify");
    assert_eq!(m["seed"], 0);
    assert_eq!(m["inputs"].as_object().unwrap().len(), 1);
}

#[test]
fn corrupt_table_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    assert_eq!(run(d, &["fixture", "euclidean", "--samples-per-edge", "8", "--out", "w"]).status.code(), Some(0));
    let mut tri = read_json(d.join("w/euclidean.json"));
    // a far pair pulled almost together breaks the triangle inequality
    let far = tri["dist"][0][12].as_f64().unwrap();
    tri["dist"][0][12] = Value::from(far * 0.01);
    tri["dist"][12][0] = Value::from(far * 0.01);
    fs::write(d.join("bad.json"), serde_json::to_vec(&tri).unwrap()).unwrap();
    let out = run(d, &["embed", "--input", "bad.json", "--out", "w"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_json(&out)["error"], "InvalidMetric");
}

#[test]
fn embedding_and_svg_export() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    assert_eq!(run(d, &["fixture", "linf", "--samples-per-edge", "16", "--out", "w"]).status.code(), Some(0));
    assert_eq!(run(d, &["embed", "--input", "w/linf.json", "--out", "w"]).status.code(), Some(0));
    let e = read_json(d.join("w/embedding.json"));
    assert_eq!(e["report"]["pass"], true);
    assert_eq!(e["image"].as_array().unwrap().len(), 48);

    assert_eq!(run(d, &["export", "--svg", "--input", "w/linf.json", "--out", "w"]).status.code(), Some(0));
    let svg = fs::read_to_string(d.join("w/embedding.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
    assert_eq!(svg.matches("class=\"tripod\"").count(), 3);
}

#[test]
fn fill_verify_and_obj() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    run(d, &["fixture", "euclidean", "--samples-per-edge", "16", "--out", "w"]);
    let out = run(d, &["fill", "--input", "w/euclidean.json", "--eps", "0.25", "--out", "w"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = read_json(d.join("w/filling_report.json"));
    assert_eq!(r["pass"], true);
    assert!(r["area_ratio"].as_f64().unwrap() <= 5472.0);

    assert_eq!(run(d, &["export", "--obj", "--input", "w/filling.json", "--out", "w"]).status.code(), Some(0));
    let obj = fs::read_to_string(d.join("w/filling.obj")).unwrap();
    assert!(obj.lines().any(|l| l.starts_with("f ")));

    let v = run(d, &["verify", "--input", "w/euclidean.json", "--eps", "0.25", "--out", "v"]);
    assert_eq!(v.status.code(), Some(0));
    assert_eq!(read_json(d.join("v/filling_report.json")), r);
}

#[test]
fn modulus_from_graph_and_node_sets() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let graph = r#"{"nodes":[0,1,2],"edges":[[0,1,1.0],[1,2,3.0]]}"#;
    fs::write(d.join("g.json"), graph).unwrap();
    fs::write(d.join("e.json"), "[0]").unwrap();
    fs::write(d.join("f.json"), "[2]").unwrap();
    let out = run(d, &["modulus", "--graph", "g.json", "--connect", "e.json", "f.json", "--tol", "1e-9", "--out", "w"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = read_json(d.join("w/result.json"));
    assert!((r["value"].as_f64().unwrap() - 0.25).abs() < 1e-12);
    assert_eq!(r["weight_rule"], "length");
}

#[test]
fn modulus_fixture_problem() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    run(d, &["fixture", "unit_square_grid", "--n", "8", "--out", "w"]);
    let out = run(d, &["modulus", "--input", "w/unit_square_grid.json", "--out", "w"]);
    assert_eq!(out.status.code(), Some(0));
    let v = read_json(d.join("w/result.json"))["value"].as_f64().unwrap();
    assert!((v - 1.0).abs() < 0.05, "{v}");
}

#[test]
fn bad_parameters_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    run(d, &["fixture", "euclidean", "--samples-per-edge", "8", "--out", "w"]);
    let out = run(d, &["fill", "--input", "w/euclidean.json", "--eps", "-1", "--out", "w"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_json(&out)["error"], "InvalidInput");
    let out = run(d, &["embed", "--input", "missing.json", "--out", "w"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_json(&out)["error"], "Io");
    let out = run(d, &["fixture", "klein_bottle", "--out", "w"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(run(d, &["frobnicate"]).status.code(), Some(2));
}

#[test]
fn identical_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    for out in ["a", "b"] {
        let args = ["fixture", "random_norm", "--random", "--seed", "11", "--samples-per-edge", "12", "--out", out];
        assert_eq!(run(d, &args).status.code(), Some(0));
    }
    fs::copy(d.join("a/random_norm.json"), d.join("t.json")).unwrap();
    for out in ["a", "b"] {
        assert_eq!(run(d, &["fill", "--input", "t.json", "--eps", "0.3", "--out", out]).status.code(), Some(0));
    }
    for name in [
        "random_norm.json",
        "fixture.manifest.json",
        "filling.json",
        "filling_report.json",
        "fill.manifest.json",
    ] {
        assert_eq!(fs::read(d.join("a").join(name)).unwrap(), fs::read(d.join("b").join(name)).unwrap(), "{name}");
    }
}
