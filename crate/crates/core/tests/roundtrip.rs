mod common;

use serde_json::json;

use twext::io::{self, IoError};

#[test]
fn all_documents_roundtrip() {
    common::roundtrips().unwrap();
}

#[test]
fn truncated_file_names_missing_field() {
    let full = io::module_to_json(&twext::presets::module("c-eta").unwrap());
    let mut v = full.clone();
    v.as_object_mut().unwrap().remove("basis");
    let err = io::module_from_json(&v, "$", true).unwrap_err();
    assert!(matches!(err, IoError::Schema { .. }));
    assert!(err.to_string().contains("basis"), "{err}");

    let text = io::to_json_string(&full);
    let cut = &text[..text.len() / 2];
    assert!(matches!(io::parse_json(cut), Err(IoError::Json(_))));
}

#[test]
fn wrong_format_and_kind_are_rejected() {
    let v = json!({"format": 2, "kind": "module"});
    assert!(matches!(io::load_document(&v), Err(IoError::Format { .. })));
    let v = json!({"format": 1, "kind": "chart"});
    assert!(matches!(io::resolution_from_json(&v, None), Err(IoError::Kind { .. })));
    let v = json!({"kind": "module"});
    assert!(matches!(io::load_document(&v), Err(IoError::Schema { .. })));
}

#[test]
fn presets_load_as_documents() {
    for p in twext::presets::PRESETS {
        let v = io::parse_json(p.source).unwrap();
        if p.fixture {
            continue;
        }
        io::load_document(&v).unwrap_or_else(|e| panic!("{}: {e}", p.name));
    }
}
