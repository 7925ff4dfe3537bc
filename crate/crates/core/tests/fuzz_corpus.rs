//! Replays the checked-in fuzz seeds through the same checks as the fuzz targets.

use std::path::PathBuf;

use hill_core::parse::{format_complex, parse_complex};
use hill_core::PotentialDocument;

fn seeds(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let path = e.unwrap().path();
            let name = path.file_name().unwrap().to_string_lossy().into_owned();
            (name, std::fs::read(&path).unwrap())
        })
        .collect();
    out.sort();
    out
}

#[test]
fn potential_json_seeds() {
    let mut accepted = 0;
    for (name, data) in seeds("potential_json") {
        let Ok(doc) = PotentialDocument::from_slice(&data) else {
            continue;
        };
        accepted += 1;
        let again = PotentialDocument::from_slice(doc.to_json().as_bytes()).unwrap();
        assert_eq!(again, doc, "{name}");
        assert_eq!(doc.potential.conjugate().conjugate(), doc.potential, "{name}");
    }
    assert!(accepted >= 4);
}

#[test]
fn complex_literal_seeds() {
    let mut accepted = 0;
    for (name, data) in seeds("complex_literal") {
        let Ok(text) = std::str::from_utf8(&data) else {
            continue;
        };
        if let Ok(z) = parse_complex(text) {
            accepted += 1;
            let back = parse_complex(&format_complex(z)).unwrap();
            assert_eq!(back, z, "{name}");
        }
    }
    assert!(accepted >= 5);
}
