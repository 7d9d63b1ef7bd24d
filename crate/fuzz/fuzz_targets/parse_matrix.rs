#![no_main]

use herdisc::instances::{parse_matrix, render_matrix};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(a) = parse_matrix(text) {
        assert_eq!(parse_matrix(&render_matrix(&a)).unwrap(), a);
    }
});
