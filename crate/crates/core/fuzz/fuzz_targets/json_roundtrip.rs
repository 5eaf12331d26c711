#![no_main]

use libfuzzer_sys::fuzz_target;
use almost_hermitian::json::to_string;

// Whatever parses must come back byte-identical after one normalising write.
fuzz_target!(|data: &str| {
    let Ok(v) = serde_json::from_str::<serde_json::Value>(data) else { return };
    let once = to_string(&v);
    let back: serde_json::Value = serde_json::from_str(&once).expect("writer emits valid JSON");
    assert_eq!(once, to_string(&back));
});
