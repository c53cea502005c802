use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn permprime(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_permprime"))
        .current_dir(fixtures())
        .env_remove("PERMPRIME_CAP")
        .args(args)
        .output()
        .unwrap()
}

fn structured(args: &[&str]) -> (i32, Value) {
    let mut all = args.to_vec();
    all.extend(["--format", "structured"]);
    let out = permprime(&all);
    let v = serde_json::from_slice(&out.stdout).expect("structured report is JSON");
    (out.status.code().unwrap(), v)
}

#[test]
fn cp_on_z2_prints_a_term() {
    let (code, v) = structured(&["alg", "cp", "z2.alg"]);
    assert_eq!(code, 0);
    assert_eq!(v["verdict"], "pass");
    assert!(v["maltsev_term"].as_str().unwrap().contains("plus"));
}

#[test]
fn cp_on_semilattice_fails() {
    let (code, v) = structured(&["alg", "cp", "s2.alg"]);
    assert_eq!(code, 1);
    assert_eq!(v["verdict"], "fail");
    assert_eq!(v["asymmetric_edge"], "x -> y");
}

#[test]
fn swap_on_path3() {
    let (code, v) = structured(&[
        "verify", "swap", "--g1", "path3.dg", "--u1", "1", "--g2", "path3.dg", "--u2", "1", "--k",
        "2",
    ]);
    assert_eq!(code, 0);
    assert_eq!(v["quotient_vertices"], 16);
    assert_eq!(v["block_quotients_agree"], true);
}

#[test]
fn swap_picks_universal_vertices() {
    let (code, v) = structured(&["verify", "swap", "--g1", "path3.dg", "--g2", "path3.dg", "--k", "2"]);
    assert_eq!(code, 0);
    assert_eq!((v["u1"].as_u64(), v["u2"].as_u64()), (Some(1), Some(1)));
}

#[test]
fn chain_verify_on_chain2() {
    let (code, v) = structured(&["chain", "verify", "chain2.dg", "--x", "chain2.dg"]);
    assert_eq!(code, 0);
    assert_eq!(v["g2_vertices"], 45);
}

#[test]
fn claim1_on_path3() {
    let (code, v) = structured(&["verify", "claim1", "--g1", "path3.dg", "--g2", "path3.dg", "--k", "2"]);
    assert_eq!(code, 0);
    assert_eq!(v["power_vertices"], 81);
    assert_eq!(v["pairs_checked"], 6561);
    assert_eq!(v["disagreements"], 0);
}

#[test]
fn complement_payload_round_trips() {
    let out = permprime(&["dg", "complement", "path3.dg"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let payload = &text[text.find("digraph ").unwrap()..];
    assert_eq!(payload, "digraph 3\n0 2\n2 0\n");
}

#[test]
fn iso_mismatch_exits_one() {
    let (code, v) = structured(&["dg", "iso", "path3.dg", "k3.dg"]);
    assert_eq!(code, 1);
    assert_eq!(v["isomorphic"], false);
}

#[test]
fn text_and_structured_share_keys() {
    let text = String::from_utf8(permprime(&["dg", "classify", "path3.dg"]).stdout).unwrap();
    let (_, v) = structured(&["dg", "classify", "path3.dg"]);
    for key in v.as_object().unwrap().keys() {
        assert!(text.contains(&format!("{key} = ")), "{key} missing from text");
    }
}

#[test]
fn parse_errors_exit_two_with_line() {
    let dir = std::env::temp_dir().join(format!("permprime-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.dg");
    std::fs::write(&bad, "digraph 2\n0 5\n").unwrap();
    let out = permprime(&["dg", "classify", bad.to_str().unwrap(), "--format", "structured"]);
    assert_eq!(out.status.code(), Some(2));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["verdict"], "error");
    assert_eq!(v["error_kind"], "parse");
    assert!(v["error"].as_str().unwrap().contains("line 2"));
    assert!(!out.stderr.is_empty());
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn missing_file_exits_two() {
    assert_eq!(permprime(&["dg", "classify", "nope.dg"]).status.code(), Some(2));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(permprime(&["bogus"]).status.code(), Some(2));
    assert_eq!(permprime(&["dg"]).status.code(), Some(2));
    assert_eq!(permprime(&["dg", "classify", "path3.dg", "--threads", "0"]).status.code(), Some(2));
}

#[test]
fn help_goes_to_stdout() {
    let out = permprime(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().contains("chain"));
}

#[test]
fn cap_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_permprime"))
        .current_dir(fixtures())
        .env("PERMPRIME_CAP", "26")
        .args(["dg", "exp", "path3.dg", "path3.dg", "--format", "structured"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["error_kind"], "resource");

    let bad = Command::new(env!("CARGO_BIN_EXE_permprime"))
        .current_dir(fixtures())
        .env("PERMPRIME_CAP", "lots")
        .args(["dg", "classify", "path3.dg"])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn threads_flag_keeps_results() {
    let a = structured(&["verify", "claim1", "--g1", "path3.dg", "--g2", "path3.dg", "--k", "2", "--threads", "1"]);
    let b = structured(&["verify", "claim1", "--g1", "path3.dg", "--g2", "path3.dg", "--k", "2", "--threads", "2"]);
    assert_eq!(a.1["disagreements"], b.1["disagreements"]);
    assert_eq!(a.0, b.0);
}

#[test]
fn obstruction_on_path3() {
    let (code, v) = structured(&["chain", "obstruction", "path3.dg"]);
    assert_eq!(code, 0);
    assert_eq!((v["v"].as_u64(), v["u"].as_u64(), v["w"].as_u64()), (Some(0), Some(1), Some(2)));
    assert_eq!(structured(&["chain", "obstruction", "k3.dg"]).0, 1);
}

#[test]
fn fixtures_round_trip() {
    for entry in std::fs::read_dir(fixtures()).unwrap() {
        let path = entry.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        match path.extension().and_then(|e| e.to_str()) {
            Some("dg") => {
                let d = permprime::text::parse_digraph(&text).unwrap();
                let again = permprime::text::serialize_digraph(&d);
                assert_eq!(permprime::text::parse_digraph(&again).unwrap(), d);
            }
            Some("alg") => {
                let a = permprime::text::parse_algebra(&text).unwrap();
                let again = permprime::text::serialize_algebra(&a);
                assert_eq!(permprime::text::parse_algebra(&again).unwrap(), a);
            }
            _ => {}
        }
    }
}
