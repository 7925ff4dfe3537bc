#![no_main]

use hill_core::PotentialDocument;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(doc) = PotentialDocument::from_slice(data) else {
        return;
    };
    let again = PotentialDocument::from_slice(doc.to_json().as_bytes()).expect("reparse");
    assert_eq!(again, doc);

    let v = &doc.potential;
    assert_eq!(&v.conjugate().conjugate(), v);
    if let Ok(scaled) = v.scale(3) {
        assert_eq!(scaled.len(), v.len());
    }
    let _ = v.evaluate(1.0);
});
