#![no_main]

use libfuzzer_sys::fuzz_target;
use almost_hermitian::json::{form_key, parse_form_key};

fuzz_target!(|data: (&str, u8)| {
    let (key, dim) = data;
    let dim = dim as usize % 17;
    if let Ok(idx) = parse_form_key(key, dim) {
        assert!(idx.iter().all(|&i| i < dim));
        assert_eq!(parse_form_key(&form_key(&idx, dim), dim).unwrap(), idx);
    }
});
