//! Replays the checked-in fuzz corpus through the same entry points as the
//! fuzz targets, so the seeds stay meaningful without a nightly toolchain.

use std::fs;
use std::path::PathBuf;

use almost_hermitian::json;
use almost_hermitian::presets;

fn seeds(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

fn text(bytes: &[u8]) -> &str {
    std::str::from_utf8(bytes).unwrap()
}

#[test]
fn algebra_seeds() {
    for (name, data) in seeds("parse_algebra") {
        let r = json::parse_algebra(text(&data));
        assert_eq!(r.is_ok(), name != "out_of_range.json", "{name}: {r:?}");
    }
}

#[test]
fn structure_and_preset_seeds() {
    for (name, data) in seeds("parse_structure") {
        json::parse_structure(text(&data)).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
    for (name, data) in seeds("parse_preset") {
        let p = presets::parse_preset(text(&data)).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert!(p.check().unwrap().iter().all(|c| c.passed), "{name}");
    }
}

#[test]
fn almost_abelian_seeds() {
    for (name, data) in seeds("parse_almost_abelian") {
        let r = json::parse_almost_abelian(text(&data));
        if name == "empty_blocks.json" {
            assert!(r.is_err());
            continue;
        }
        let d = r.unwrap_or_else(|e| panic!("{name}: {e}"));
        let _ = d.classify();
        let _ = d.lee_form();
    }
}

#[test]
fn matrix_seeds() {
    for (name, data) in seeds("parse_matrix") {
        assert_eq!(json::parse_matrix(text(&data)).is_ok(), name != "ragged.txt", "{name}");
    }
}

#[test]
fn form_key_seeds() {
    // libFuzzer's tuple decoding takes the trailing byte for the integer.
    for (name, data) in seeds("parse_form_key") {
        let (key, dim) = data.split_at(data.len() - 1);
        let dim = dim[0] as usize % 17;
        let idx = json::parse_form_key(text(key), dim).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(json::parse_form_key(&json::form_key(&idx, dim), dim).unwrap(), idx);
    }
}

#[test]
fn writer_seeds() {
    for (name, data) in seeds("json_roundtrip") {
        let v: serde_json::Value = serde_json::from_slice(&data).unwrap();
        let once = json::to_string(&v);
        let back: serde_json::Value = serde_json::from_str(&once).unwrap();
        assert_eq!(once, json::to_string(&back), "{name}");
    }
}

#[test]
fn garbage_is_rejected_without_panicking() {
    let inputs = ["", "{", "null", "[]", "{\"dim\": -1}", "{\"dim\": 4, \"brackets\": [{\"i\": 1, \"j\": 2, \"out\": {\"x\": 1}}]}",
        "{\"dim\": 2, \"brackets\": [], \"metric\": [[1, 0], [0, 1]], \"J\": [[0, 0], [0, 0]]}",
        "{\"a\": 0, \"b\": [1], \"v\": [1, 2], \"A\": [[0]]}", "[[1e400]]"];
    for s in inputs {
        assert!(json::parse_algebra(s).is_err() || s.contains("brackets"));
        assert!(json::parse_structure(s).is_err());
        assert!(json::parse_almost_abelian(s).is_err());
        assert!(presets::parse_preset(s).is_err());
    }
}
