#![no_main]

use libfuzzer_sys::fuzz_target;
use almost_hermitian::almost_abelian::classify_jordan;
use almost_hermitian::json::parse_matrix;

fuzz_target!(|data: &str| {
    if let Ok(m) = parse_matrix(data) {
        if m.shape() == (3, 3) {
            let _ = classify_jordan(&m);
        }
    }
});
