#![no_main]

use herdisc::instances::{parse_coloring, render_coloring};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(x) = parse_coloring(text) {
        assert!(x.signs().iter().all(|s| s.abs() == 1));
        assert_eq!(parse_coloring(&render_coloring(&x)).unwrap(), x);
    }
});
