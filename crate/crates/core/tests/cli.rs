mod common;

use std::process::{Command, Output};

use common::{corpus_file, manifest_dir, mock_node};
use serde_json::Value;

fn sescan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sescan"))
        .args(args)
        .current_dir(manifest_dir())
        .output()
        .expect("run sescan")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn report(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("report is JSON")
}

#[test]
fn selector_command() {
    for h in ["foo(uint256)", "foo(uint)", " foo( uint ) "] {
        let o = sescan(&["selector", h]);
        assert_eq!(o.status.code(), Some(0));
        assert_eq!(stdout(&o), "0x2fbebd38\n");
    }
    assert_eq!(stdout(&sescan(&["selector", "transfer(address,uint256)"])), "0xa9059cbb\n");
    let bad = sescan(&["selector", "foo(badtype)"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(bad.stdout.is_empty());
}

#[test]
fn checksum_command() {
    let o = sescan(&["checksum", "0x5aaeb6053f3e94c9b9a09f33669435e7ef1beaed"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "all-lower\n0x5aAeb6053F3E94C9b9A09f33669435E7Ef1BeAed\n");
    let o = sescan(&["checksum", "0x5aAeb6053F3E94C9b9A09f33669435E7Ef1BeAed"]);
    assert_eq!(stdout(&o).lines().next(), Some("valid-eip55"));
    let o = sescan(&["checksum", "0x5AAEB6053F3E94C9B9A09F33669435E7EF1BEAED"]);
    assert_eq!(stdout(&o).lines().next(), Some("all-upper"));
    let o = sescan(&["checksum", "0x5aAeb6053F3E94C9b9A09f33669435E7Ef1BeAeD"]);
    assert_eq!(stdout(&o).lines().next(), Some("invalid-checksum"));
    let o = sescan(&["checksum", "0x5aaeb6053f3e94c9b9a09f33669435e7ef1beae"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stdout(&o), "malformed\n");
}

#[test]
fn derive_command() {
    let args = ["derive", "0x6ac7ea33f8831ea9dcc53393aaa88b25a785dbf0", "0"];
    let a = sescan(&args);
    let b = sescan(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout(&a), "0xcd234a471b72ba2f1ccf0a70fcaba648a5eecd8d\n");
    assert_eq!(a.stdout, b.stdout);
    let big = sescan(&["derive", "0x6ac7ea33f8831ea9dcc53393aaa88b25a785dbf0", "18446744073709551616"]);
    assert_eq!(big.status.code(), Some(2));
    let max = sescan(&["derive", "0x6ac7ea33f8831ea9dcc53393aaa88b25a785dbf0", "18446744073709551615"]);
    assert_eq!(max.status.code(), Some(0));
    assert_eq!(sescan(&["derive", "0x1234", "0"]).status.code(), Some(2));
}

#[test]
fn mine_command() {
    let o = sescan(&["mine", "0x00000000", "--budget", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o), "NOT FOUND\n");

    let o = sescan(&["mine", "0xa9059cbb", "--match-bits", "16", "--max-len", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let line = stdout(&o);
    let (header, sel) = line.trim().split_once(' ').unwrap();
    assert!(sel.starts_with("0xa905"), "{line}");
    assert_eq!(stdout(&sescan(&["selector", header])).trim(), sel);

    // The A6 fixture's mined function, recovered from a space that contains it.
    let o = sescan(&["mine", "0x6546bf8a", "--alphabet", "as4Pgr", "--max-len", "6", "--jobs", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "as4Pgr(uint256) 0x6546bf8a\n");

    let o = sescan(&["mine", "0xab", "--budget", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = sescan(&["mine", "0x2fbebd38", "--alphabet", "aa"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn every_command_has_help() {
    for cmd in ["scan", "selector", "checksum", "derive", "mine", "bench"] {
        let o = sescan(&[cmd, "--help"]);
        assert_eq!(o.status.code(), Some(0), "{cmd}");
        assert!(stdout(&o).contains("Usage"), "{cmd}");
    }
}

#[test]
fn benign_twins_scan_clean() {
    let files: Vec<String> = (1..=6)
        .map(|i| corpus_file(&format!("benign_a{i}.sol")).display().to_string())
        .collect();
    let mut args = vec!["--snapshot", "fixtures/snapshot.csv", "scan"];
    args.extend(files.iter().map(String::as_str));
    let o = sescan(&args);
    assert_eq!(o.status.code(), Some(0));
    let r = report(&o);
    assert_eq!(r["scanned_files"], 6);
    assert_eq!(r["findings"].as_array().unwrap().len(), 0);
}

#[test]
fn empty_directory_is_an_operational_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = sescan(&["scan", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let r = report(&o);
    assert_eq!(r["scanned_files"], 0);
    assert!(r["schema_version"].is_string());
}

#[test]
fn unreadable_paths_are_recorded_not_fatal() {
    let o = sescan(&["scan", "fixtures/corpus/benign_a1.sol", "fixtures/missing.sol"]);
    assert_eq!(o.status.code(), Some(0));
    let r = report(&o);
    assert_eq!(r["scanned_files"], 1);
    assert_eq!(r["errors"][0]["path"], "fixtures/missing.sol");

    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.sol"), [0x66u8, 0xff, 0xfe]).unwrap();
    let o = sescan(&["scan", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(report(&o)["errors"][0]["message"].as_str().unwrap().contains("UTF-8"));
}

#[test]
fn report_shape_and_out_flag() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = sescan(&[
        "--out",
        out.to_str().unwrap(),
        "--snapshot",
        "fixtures/snapshot.csv",
        "scan",
        "fixtures/corpus",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(o.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    for key in ["schema_version", "scanned_files", "findings", "per_class_counts", "errors", "config_echo"] {
        assert!(r.get(key).is_some(), "{key}");
    }
    let counts = r["per_class_counts"].as_object().unwrap();
    assert_eq!(counts.len(), 6);
    let total: u64 = counts.values().map(|v| v.as_u64().unwrap()).sum();
    assert_eq!(total as usize, r["findings"].as_array().unwrap().len());
    for f in r["findings"].as_array().unwrap() {
        assert!(f["file"].as_str().unwrap().ends_with(".sol"));
    }
}

#[test]
fn class_and_floor_flags() {
    let o = sescan(&["--classes", "A3,a4", "--severity-floor", "high", "scan", "fixtures/corpus"]);
    let r = report(&o);
    for f in r["findings"].as_array().unwrap() {
        assert!(["A3", "A4"].contains(&f["attack_class"].as_str().unwrap()));
        assert_eq!(f["severity"], "high");
    }
    assert_eq!(r["config_echo"]["classes"], serde_json::json!(["A3", "A4"]));
    assert_eq!(r["config_echo"]["severity_floor"], "high");
    assert_eq!(sescan(&["--classes", "A9", "scan", "fixtures"]).status.code(), Some(2));
}

#[test]
fn glob_flag_filters_directory_walks() {
    let o = sescan(&["--severity-floor", "info", "scan", "fixtures", "--glob", "*.csv"]);
    let r = report(&o);
    assert_eq!(r["scanned_files"], 2);
    assert_eq!(r["config_echo"]["glob"], "*.csv");
}

#[test]
fn rpc_flag_resolves_unknown_addresses() {
    let node = mock_node("0x6080");
    let o = sescan(&["--rpc", &node.url, "scan", "fixtures/corpus/attack_a1.sol"]);
    assert_eq!(o.status.code(), Some(1));
    let r = report(&o);
    let f = &r["findings"][0];
    assert_eq!(f["attack_class"], "A1");
    assert_eq!(f["evidence"]["address_kind"], "contract-unknown-payability");
    assert_eq!(node.bodies.lock().unwrap().len(), 1);

    let o = sescan(&["--rpc", &common::dead_endpoint(), "scan", "fixtures/corpus/attack_a2.sol"]);
    assert_eq!(o.status.code(), Some(1));
    let r = report(&o);
    assert_eq!(r["findings"][0]["attack_class"], "A2");
    assert_eq!(r["errors"].as_array().unwrap().len(), 1);
}
