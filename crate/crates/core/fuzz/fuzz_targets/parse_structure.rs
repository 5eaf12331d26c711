#![no_main]

use libfuzzer_sys::fuzz_target;
use almost_hermitian::curvatures::Geometry;
use almost_hermitian::json::parse_structure;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(st) = parse_structure(s) {
        // Dimension 4 is cheap enough to push through the whole pipeline.
        if st.dim() == 4 {
            let _ = Geometry::new(st);
        }
    }
});
