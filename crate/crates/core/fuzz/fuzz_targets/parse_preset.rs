#![no_main]

use libfuzzer_sys::fuzz_target;
use almost_hermitian::presets::parse_preset;

fuzz_target!(|data: &str| {
    if let Ok(p) = parse_preset(data) {
        if p.structure.dim() == 4 {
            let _ = p.check();
        }
    }
});
