#![no_main]

use libfuzzer_sys::fuzz_target;
use almost_hermitian::json::parse_algebra;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(alg) = parse_algebra(s) {
            let _ = alg.validate();
        }
    }
});
