use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rigidity")).args(args).output().unwrap()
}

fn run_json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn lines(args: &[&str]) -> Vec<Value> {
    let out = run(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

fn path(name: &str) -> String {
    data(name).display().to_string()
}

fn coordinate(v: &Value) -> f64 {
    match v {
        Value::Number(n) => n.as_f64().unwrap(),
        Value::String(s) => match s.split_once('/') {
            Some((a, b)) => a.parse::<f64>().unwrap() / b.parse::<f64>().unwrap(),
            None => s.parse().unwrap(),
        },
        _ => panic!("bad coordinate {v}"),
    }
}

/// Points and `(i, j, kind)` members, 0-based, read back from a report.
fn framework(report: &Value) -> (Vec<Vec<f64>>, Vec<(usize, usize, String)>) {
    let f = &report["input"]["framework"];
    let points = f["vertices"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p.as_array().unwrap().iter().map(coordinate).collect())
        .collect();
    let members = f["members"]
        .as_array()
        .unwrap()
        .iter()
        .map(|m| {
            (
                m["i"].as_u64().unwrap() as usize - 1,
                m["j"].as_u64().unwrap() as usize - 1,
                m["kind"].as_str().unwrap().to_string(),
            )
        })
        .collect();
    (points, members)
}

fn label(i: usize, j: usize, kind: &str) -> String {
    format!("{}-{}:{kind}", i + 1, j + 1)
}

#[test]
fn triangle_is_rigid() {
    let r = run_json(&["analyze", &path("triangle.json")]);
    assert_eq!(r["schema_version"], "1.0.0");
    assert_eq!(r["result"]["verdict"], "FirstOrderRigid");
    assert_eq!(r["result"]["flex_dim"], 0);
    assert_eq!(r["result"]["trivial_dim"], 3);
}

#[test]
fn square_in_square_bar_analysis() {
    let r = run_json(&["analyze", &path("square_in_square.json")]);
    let res = &r["result"];
    assert_eq!(res["verdict"], "Flexible");
    assert_eq!(res["flex_dim"], 2);
    assert_eq!(res["stress_space"]["dim"], 1);
    // the stress re-verifies from the report alone
    let (points, members) = framework(&r);
    let stress = &res["stress_space"]["basis"][0];
    let mut residual = vec![[0.0f64; 2]; points.len()];
    for (i, j, kind) in &members {
        let w = stress[label(*i, *j, kind)].as_f64().unwrap();
        for k in 0..2 {
            let d = points[*i][k] - points[*j][k];
            residual[*i][k] += w * d;
            residual[*j][k] -= w * d;
        }
    }
    assert!(residual.iter().flatten().all(|x| x.abs() < 1e-9));
}

#[test]
fn cable_triangle_witness_reverifies() {
    let r = run_json(&["analyze", "--mode", "tensegrity", &path("cable_triangle.json")]);
    let res = &r["result"];
    assert_eq!(res["verdict"], "Flexible");
    assert_eq!(res["roth_whiteley"]["verdict"], "Flexible");
    let (points, members) = framework(&r);
    let u = &res["direct"]["witness_flex"];
    let vel = |v: usize| -> Vec<f64> { u[(v + 1).to_string()].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect() };
    let mut strict = false;
    for (i, j, kind) in &members {
        let s: f64 = (0..2).map(|k| (points[*i][k] - points[*j][k]) * (vel(*i)[k] - vel(*j)[k])).sum();
        assert_eq!(kind, "cable");
        assert!(s <= 1e-9);
        strict |= s < -1e-9;
    }
    assert!(strict);
}

#[test]
fn prestress_examples() {
    let state = |name: &str| run_json(&["prestress", &path(name)])["result"]["state"].clone();
    assert_eq!(state("square_in_square.json"), "CertifiedPS");
    assert_eq!(state("four_cycle.json"), "CertifiedNotWPS");
    assert_eq!(state("triangle.json"), "CertifiedPS");
    let r = run_json(&["prestress", &path("square_in_square.json")]);
    let checks = r["result"]["second_derivative"].as_array().unwrap();
    assert_eq!(checks.len(), 2);
    assert!(checks.iter().all(|c| c["passed"] == true));
    assert!(r["result"]["min_eigenvalue"].as_f64().unwrap() > 0.0);
}

#[test]
fn prestress_rejects_tensegrities() {
    assert_eq!(run(&["prestress", &path("cable_triangle.json")]).status.code(), Some(2));
}

#[test]
fn infinite_lacunary() {
    let out = lines(&["infinite", "lacunary", "--levels", "10"]);
    assert_eq!(out.len(), 11);
    assert!(out[..10].iter().all(|l| l["record"] == "truncation"));
    assert_eq!(out[9]["partial_energy"], 4094.0);
    let s = &out[10];
    assert_eq!(s["record"], "summary");
    assert_eq!(s["summable"], true);
    assert_eq!(s["energy"], "Divergent");
    assert_eq!(s["bps"]["verdict"], "NotSupported");
}

#[test]
fn infinite_dyadic() {
    let out = lines(&["infinite", "dyadic", "--levels", "6"]);
    let s = out.last().unwrap();
    assert_eq!(s["summable"], true);
    assert_eq!(s["bps"]["verdict"], "BpsEvidence");
    assert!((s["dyadic"]["fitted_ratio"].as_f64().unwrap() - 0.4).abs() < 1e-6);
    assert_eq!(s["dyadic"]["stated_ratio"], 0.8);
}

#[test]
fn infinite_strip() {
    let out = lines(&["infinite", "strip", "--levels", "20", "--space", "l1"]);
    let s = out.last().unwrap();
    assert_eq!(s["strong_decay"], false);
    assert_eq!(s["weak_decay"], true);
    assert_eq!(s["monotonicity"]["holds"], true);
}

#[test]
fn unknown_family_is_an_input_error() {
    assert_eq!(run(&["infinite", "bogus"]).status.code(), Some(2));
    assert_eq!(run(&["infinite", "strip", "--space", "l0.5"]).status.code(), Some(2));
}

#[test]
fn svg_stress_overlay_on_square_in_square() {
    let out = run(&["export-svg", &path("square_in_square.json"), "--overlay", "stress"]);
    assert!(out.status.success());
    let svg = String::from_utf8(out.stdout).unwrap();
    assert!(svg.contains(r#"version="1.1""#));
    let labels: Vec<&str> = svg
        .lines()
        .filter(|l| l.contains(r#"class="stress""#))
        .map(|l| l.rsplit_once('>').unwrap().0.rsplit_once('>').unwrap().1.trim_end_matches("</text"))
        .collect();
    assert_eq!(labels.len(), 12);
    assert_eq!(labels.iter().filter(|&&l| l == "-1").count(), 4);
}

#[test]
fn svg_triangle_has_three_solid_segments() {
    let svg = String::from_utf8(run(&["export-svg", &path("triangle.json")]).stdout).unwrap();
    assert_eq!(svg.matches(r#"class="bar""#).count(), 3);
    assert!(!svg.contains("stroke-dasharray"));
}

#[test]
fn svg_strip_flex_arrows_point_left() {
    let out = run(&["export-svg", "--family", "strip", "--level", "5", "--overlay", "flex:0"]);
    assert!(out.status.success());
    let svg = String::from_utf8(out.stdout).unwrap();
    let arrows: Vec<Vec<f64>> = svg
        .lines()
        .filter(|l| l.contains(r#"class="velocity""#))
        .map(|l| {
            ["x1", "y1", "x2", "y2"]
                .iter()
                .map(|a| {
                    let start = l.find(&format!(" {a}=\"")).unwrap() + a.len() + 3;
                    l[start..].split('"').next().unwrap().parse().unwrap()
                })
                .collect()
        })
        .collect();
    assert!(!arrows.is_empty());
    assert!(arrows.iter().all(|a| a[2] < a[0] && a[1] == a[3]));
}

#[test]
fn svg_rejects_other_dimensions() {
    let dir = std::env::temp_dir().join("rigidity-cli-3d.json");
    std::fs::write(
        &dir,
        r#"{"dimension": 3, "vertices": [[0,0,0],[1,0,0]], "members": [{"i":1,"j":2,"kind":"bar"}]}"#,
    )
    .unwrap();
    assert_eq!(run(&["export-svg", dir.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn oracle_suites_pass() {
    for (kind, trials) in [("dichotomy", "500"), ("projection", "200"), ("doubledual", "100")] {
        let r = run_json(&["oracle", kind, "--trials", trials, "--seed", "11"]);
        assert_eq!(r["result"]["passed"].as_u64().unwrap().to_string(), trials);
        assert_eq!(r["result"]["failed"], 0);
    }
    assert_eq!(run(&["oracle", "dichotomy", "--trials", "0"]).status.code(), Some(2));
}

#[test]
fn reports_are_deterministic() {
    for args in [
        vec!["prestress", "--seed", "5"],
        vec!["analyze", "--seed", "5"],
    ] {
        let mut a = args.clone();
        let p = path("square_in_square.json");
        a.push(&p);
        assert_eq!(run(&a).stdout, run(&a).stdout);
    }
    let a = ["infinite", "dyadic", "--levels", "5", "--seed", "3"];
    assert_eq!(run(&a).stdout, run(&a).stdout);
}

#[test]
fn malformed_input_exits_with_two() {
    let file = std::env::temp_dir().join("rigidity-cli-bad.json");
    std::fs::write(&file, "{ not json").unwrap();
    let out = run(&["analyze", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));
    assert_eq!(run(&["analyze", "/nonexistent/file.json"]).status.code(), Some(2));
}

#[test]
fn csv_output() {
    let out = run(&["matrix", &path("triangle.json"), "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("member,v1x,v1y"));
    assert_eq!(text.lines().count(), 4);
    let out = run(&["analyze", &path("triangle.json"), "--format", "csv"]);
    assert!(String::from_utf8(out.stdout).unwrap().contains("result.verdict,FirstOrderRigid"));
}

#[test]
fn schema_file_matches_version() {
    let text = std::fs::read_to_string(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("schema/report.schema.json")).unwrap();
    let schema: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(schema["$defs"]["SchemaVersion"]["const"], "1.0.0");
    let r = run_json(&["analyze", &path("triangle.json")]);
    for key in schema["$defs"]["AnalysisReport"]["required"].as_array().unwrap() {
        assert!(r.get(key.as_str().unwrap()).is_some(), "{key}");
    }
    for key in schema["$defs"]["AnalyzeResult"]["required"].as_array().unwrap() {
        assert!(r["result"].get(key.as_str().unwrap()).is_some(), "{key}");
    }
}
