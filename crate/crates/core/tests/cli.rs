use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn toledo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_toledo")).args(args).env_remove("TOLEDO_OUT_DIR").output().unwrap()
}

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name).to_string_lossy().into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("toledo-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn body(out: &Output) -> serde_json::Value {
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).expect("report is JSON");
    v["body"].clone()
}

#[test]
fn bundled_pants_model_is_maximal() {
    let out = toledo(&["toledo", &data("pants_model_n2.json")]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let b = body(&out);
    assert!((b["results"]["report"]["value"].as_f64().unwrap() - 2.0).abs() < 1e-6);
    assert_eq!(b["results"]["maximal"], true);
    assert_eq!(b["status"], "pass");
}

#[test]
fn bundled_trivial_rep_is_zero() {
    let b = body(&toledo(&["toledo", &data("trivial_pants.json")]));
    assert!(b["results"]["report"]["value"].as_f64().unwrap().abs() < 1e-9);
    assert_eq!(b["results"]["maximal"], false);
}

#[test]
fn bundled_closed_genus2_passes_cut_check() {
    let out = toledo(&["toledo", &data("genus2_closed.json")]);
    assert_eq!(out.status.code(), Some(0));
    let b = body(&out);
    let v = b["results"]["report"]["value"].as_f64().unwrap();
    assert!((v - v.round()).abs() < 1e-6);
    let cut = b["checks"].as_array().unwrap().iter().find(|c| c["name"] == "cut_consistency").unwrap();
    assert_eq!(cut["pass"], true);
}

#[test]
fn rot_and_maslov_outputs() {
    let b = body(&toledo(&["rot", &data("rotation_60deg.json")]));
    assert!((b["results"]["rot_mod1"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-9);
    let b = body(&toledo(&["rot", &data("diag_2_half.json")]));
    assert_eq!(b["results"]["rot_mod1"].as_f64().unwrap(), 0.0);
    let b = body(&toledo(&["maslov", &data("maslov_convention.json")]));
    assert_eq!(b["results"]["beta"], "+1/2");
    let b = body(&toledo(&["maslov", &data("maslov_swapped.json")]));
    assert_eq!(b["results"]["beta"], "-1/2");
}

#[test]
fn non_transverse_triple_warns() {
    let p = scratch("degenerate.json");
    fs::write(&p, r#"{"n":1,"lagrangians":[[[1],[0]],[[1],[0]],[[1],[1]]]}"#).unwrap();
    let out = toledo(&["maslov", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not pairwise transverse"));
    assert_eq!(body(&out)["results"]["beta"], "0");
}

#[test]
fn input_errors_exit_2() {
    let p = scratch("malformed.json");
    fs::write(&p, "{\"matrix\": [[1, 0], [0,\n").unwrap();
    let out = toledo(&["rot", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    let p = scratch("not_symplectic.json");
    fs::write(&p, r#"{"matrix": [[1, 2], [3, 4]]}"#).unwrap();
    assert_eq!(toledo(&["rot", p.to_str().unwrap()]).status.code(), Some(2));

    assert_eq!(toledo(&["verify", "unknown-suite"]).status.code(), Some(2));
    assert_eq!(toledo(&["--kappa-w", "0", "rot", &data("diag_2_half.json")]).status.code(), Some(2));
    assert_eq!(toledo(&["--depth", "40", "rot", &data("diag_2_half.json")]).status.code(), Some(2));
    assert_eq!(toledo(&["toledo", "/nonexistent/file.json"]).status.code(), Some(2));
    assert_eq!(toledo(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn unknown_generator_in_words() {
    let p = scratch("unknown_gen.json");
    fs::write(
        &p,
        r#"{"n":1,"surface":{"genus":0,"boundary":3},
            "generators":{"a":[[2,0],[0,0.5]],"b":[[1,1],[0,1]]},
            "boundary_words":["a","b","[q]"]}"#,
    )
    .unwrap();
    let out = toledo(&["toledo", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains('q'));
}

#[test]
fn violated_property_exits_1() {
    let out = toledo(&["--samples", "40", "verify", "range"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(body(&out)["status"], "fail");
}

#[test]
fn sample_csv() {
    let p = scratch("samples.csv");
    let out = toledo(&["--samples", "12", "--seed", "3", "--out", p.to_str().unwrap(), "sample"]);
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(&p).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("sample_id,seed,T_value"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 12);
    for row in rows {
        let v: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
        assert!(v.abs() <= 2.0 + 1e-6);
    }
    let again = toledo(&["--samples", "12", "--seed", "3", "sample"]);
    assert_eq!(String::from_utf8(again.stdout).unwrap(), text);
}

#[test]
fn output_directory_from_environment() {
    let dir = scratch("envdir");
    let out = Command::new(env!("CARGO_BIN_EXE_toledo"))
        .args(["verify", "boundary-map", "--samples", "20"])
        .env("TOLEDO_OUT_DIR", &dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("verify-boundary-map.json")).unwrap()).unwrap();
    assert_eq!(v["body"]["status"], "pass");
}

#[test]
fn construct_round_trips_through_toledo() {
    let p = scratch("sphere.json");
    let out = toledo(&["construct", "four-holed-sphere", "--n", "2", "--out", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let b = body(&toledo(&["toledo", p.to_str().unwrap()]));
    assert!((b["results"]["report"]["value"].as_f64().unwrap() - 4.0).abs() < 1e-6);
    let p = scratch("reversed.json");
    toledo(&["construct", "pants", "--reverse", "--out", p.to_str().unwrap()]);
    let b = body(&toledo(&["toledo", p.to_str().unwrap()]));
    assert!((b["results"]["report"]["value"].as_f64().unwrap() + 1.0).abs() < 1e-6);
}

#[test]
fn report_body_is_deterministic() {
    let run = || {
        let out = toledo(&["--seed", "9", "--samples", "30", "verify", "milnor-wood"]);
        serde_json::to_string(&body(&out)).unwrap()
    };
    assert_eq!(run(), run());
}
