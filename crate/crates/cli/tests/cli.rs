use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ietpc::{Iet, MapFile, PiecewiseContraction};

fn maps_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../maps")
}

fn map(name: &str) -> String {
    maps_dir().join(name).to_string_lossy().into_owned()
}

fn ietpc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ietpc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// The stderr line of a failed run, parsed.
fn error_line(o: &Output) -> serde_json::Value {
    let text = String::from_utf8(o.stderr.clone()).unwrap();
    assert_eq!(text.trim_end().lines().count(), 1, "{text}");
    serde_json::from_str(text.trim_end()).unwrap()
}

const ALPHA: &str = "(3-1*sqrt(5))/2";

#[test]
fn golden_coding() {
    let o = ietpc(&[
        "code",
        "--map",
        &map("golden_rotation.json"),
        "--x",
        ALPHA,
        "--len",
        "13",
    ]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "1211212112112\n");

    let o = ietpc(&[
        "code",
        "--map",
        &map("golden_rotation.json"),
        "--x",
        ALPHA,
        "--len",
        "5",
        "--format",
        "csv",
    ]);
    assert_eq!(stdout(&o), "k,letter\n0,1\n1,2\n2,1\n3,1\n4,2\n");
}

#[test]
fn point_outside_the_domain_is_a_validation_error() {
    let o = ietpc(&[
        "code",
        "--map",
        &map("golden_rotation.json"),
        "--x",
        "(4-(1+1*sqrt(5))/2)/1",
        "--len",
        "13",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(error_line(&o)["error"], "iet");
}

#[test]
fn rabbit_enclosure() {
    let o = ietpc(&["rabbit", "--bits", "60"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("R in [0.70980344286129131"), "{text}");
    assert!(text.contains("delta = 1 - R/2: consistent"));

    let o = ietpc(&["rabbit", "--bits", "60", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["identity_holds"], true);
    let lo = v["rabbit_lower"].as_str().unwrap();
    let hi = v["rabbit_upper"].as_str().unwrap();
    let printed = "0.7098034428612913146";
    assert!(lo[..printed.len()] <= *printed && *printed <= hi[..printed.len()]);
}

#[test]
fn identity_has_constant_complexity() {
    let o = ietpc(&[
        "complexity",
        "--map",
        &map("ident.json"),
        "--x",
        "1/3",
        "--len",
        "100",
        "--kmax",
        "10",
    ]);
    assert!(o.status.success());
    let expected: String = std::iter::once("k,p\n".to_string())
        .chain((1..=10).map(|k| format!("{k},1\n")))
        .collect();
    assert_eq!(stdout(&o), expected);
}

#[test]
fn counted_table_reports_prefix_stability() {
    let g = map("golden_rotation.json");
    let o = ietpc(&[
        "complexity",
        "--map",
        &g,
        "--x",
        ALPHA,
        "--len",
        "4000",
        "--kmax",
        "20",
        "--format",
        "json",
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["prefix_lengths"], serde_json::json!([1000, 2000, 4000]));
    assert_eq!(v["changed_over_last_doublings"], false);
    assert_eq!(v["values"][19], serde_json::json!([20, 21]));

    let o = ietpc(&[
        "complexity",
        "--map",
        &g,
        "--x",
        ALPHA,
        "--len",
        "40",
        "--kmax",
        "10",
        "--format",
        "plain",
    ]);
    assert!(
        stdout(&o).ends_with("prefixes 10, 20, 40: table changed\n"),
        "{}",
        stdout(&o)
    );
}

#[test]
fn refinement_table_matches_counted_table() {
    let g = map("golden_rotation.json");
    let counted = ietpc(&["complexity", "--map", &g, "--x", ALPHA, "--len", "2000", "--kmax", "12"]);
    let refined = ietpc(&["complexity", "--map", &g, "--x", ALPHA, "--kmax", "12", "--refinement"]);
    assert!(counted.status.success() && refined.status.success());
    assert_eq!(stdout(&counted), stdout(&refined));
}

#[test]
fn idoc_certificate() {
    let o = ietpc(&["idoc", "--map", &map("golden_rotation.json"), "--depth", "50"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["idoc"]["verdict"]["kind"], "PassedToDepth");
    assert_eq!(v["keane_applies"], true);
}

#[test]
fn construct_round_trips_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("f.json");
    let side = dir.path().join("f.side.json");
    let args = |o: &Path, s: &Path| {
        vec![
            "construct".to_string(),
            "--map".into(),
            map("golden_rotation.json"),
            "--sidecar".into(),
            s.to_string_lossy().into_owned(),
            "-o".into(),
            o.to_string_lossy().into_owned(),
        ]
    };
    let run = |a: Vec<String>| ietpc(&a.iter().map(String::as_str).collect::<Vec<_>>());
    assert!(run(args(&out, &side)).status.success());

    let text = std::fs::read_to_string(&out).unwrap();
    let MapFile::Pc(spec) = MapFile::from_json(&text).unwrap() else {
        panic!("not a PC")
    };
    let f = PiecewiseContraction::from_spec(spec).unwrap();
    assert_eq!(f.slopes().len(), 2);

    // refuses to overwrite without --force
    let again = run(args(&out, &side));
    assert_eq!(again.status.code(), Some(1));
    assert_eq!(error_line(&again)["error"], "io");

    let (out2, side2) = (dir.path().join("g.json"), dir.path().join("g.side.json"));
    assert!(run(args(&out2, &side2)).status.success());
    assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(&out2).unwrap());
    assert_eq!(std::fs::read(&side).unwrap(), std::fs::read(&side2).unwrap());

    // the representative alone has an attracting cycle; the family does not
    let o = out.to_string_lossy().into_owned();
    let s = side.to_string_lossy().into_owned();
    let rep = ietpc(&["certify", "--map", &o, "--x", "0"]);
    assert!(rep.status.success());
    let fam = ietpc(&["certify", "--map", &o, "--sidecar", &s, "--x", "0"]);
    assert_eq!(fam.status.code(), Some(2));
    assert_eq!(error_line(&fam)["error"], "inconclusive");

    let fac = ietpc(&["factor", "--map", &o, "--sidecar", &s, "--format", "json"]);
    assert!(fac.status.success());
    let v: serde_json::Value = serde_json::from_slice(&fac.stdout).unwrap();
    let y1 = v["breakpoints"][1].as_f64().unwrap();
    assert!((y1 - 0.618034).abs() < 0.01);
    assert_eq!(v["approximate"], true);

    let refused = ietpc(&["factor", "--map", &o]);
    assert_eq!(refused.status.code(), Some(1));
    assert_eq!(error_line(&refused)["error"], "periodic_orbit");
}

#[test]
fn sidecar_must_match_the_map() {
    let dir = tempfile::tempdir().unwrap();
    let side = dir.path().join("side.json");
    let built = ietpc(&[
        "construct",
        "--map",
        &map("golden_rotation.json"),
        "--sidecar",
        &side.to_string_lossy(),
        "-o",
        &dir.path().join("f.json").to_string_lossy(),
    ]);
    assert!(built.status.success());
    let o = ietpc(&[
        "certify",
        "--map",
        &map("half_rotation_third.json"),
        "--sidecar",
        &side.to_string_lossy(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(error_line(&o)["error"], "sidecar");
}

#[test]
fn verify_reports_agreement() {
    let o = ietpc(&["verify", "--map", &map("golden_rotation.json"), "--format", "json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["disagree"], 0);
    assert_eq!(v["pass"], true);
    assert_eq!(v["samples"].as_array().unwrap().len(), 20);
}

#[test]
fn certify_periodic_pc() {
    let o = ietpc(&["certify", "--map", &map("half_rotation_third.json"), "--x", "1/5"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["period"], 2);
    assert_eq!(v["word"], serde_json::json!([1, 2]));
}

#[test]
fn wrong_map_kind_and_bad_json() {
    let o = ietpc(&["certify", "--map", &map("golden_rotation.json")]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(error_line(&o)["error"], "map");

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"type":"iet","breakpoints":["0","1"],"signs":[1],"translations":["0"],"extra":1}"#,
    )
    .unwrap();
    let o = ietpc(&["idoc", "--map", &bad.to_string_lossy()]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(error_line(&o)["error"], "map");
}

#[test]
fn bad_flags_give_json_errors() {
    let o = ietpc(&["code", "--map", "x.json", "--x", "0", "--len", "0"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(error_line(&o)["error"], "argument");
    let o = ietpc(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn sweep_is_reproducible_across_job_counts() {
    let one = ietpc(&["sweep", "--count", "30", "--seed", "3", "--format", "json"]);
    let four = ietpc(&[
        "sweep", "--count", "30", "--seed", "3", "--jobs", "4", "--format", "json",
    ]);
    assert!(one.status.success());
    assert_eq!(one.stdout, four.stdout);
    let v: serde_json::Value = serde_json::from_slice(&one.stdout).unwrap();
    assert!(v["certified"].as_u64().unwrap() >= 27);
}

#[test]
fn sample_maps_validate() {
    for name in ["golden_rotation.json", "ident.json"] {
        let text = std::fs::read_to_string(maps_dir().join(name)).unwrap();
        let MapFile::Iet(spec) = MapFile::from_json(&text).unwrap() else {
            panic!("{name}")
        };
        Iet::from_spec(spec).unwrap();
    }
}
