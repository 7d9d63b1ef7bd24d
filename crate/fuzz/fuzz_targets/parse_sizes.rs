#![no_main]

use herdisc::cli::{parse_kinds, parse_seeds, parse_sizes};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(sizes) = parse_sizes(text) {
        assert!(sizes.iter().all(|&(m, n)| m > 0 && n > 0));
    }
    let _ = parse_seeds(text);
    let _ = parse_kinds(text);
});
