#![no_main]

use libfuzzer_sys::fuzz_target;
use almost_hermitian::json::parse_almost_abelian;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(d) = parse_almost_abelian(s) {
        let _ = d.classify();
        let _ = d.lee_form();
        if d.dim() == 4 {
            let _ = d.second_chern_system();
        }
    }
});
