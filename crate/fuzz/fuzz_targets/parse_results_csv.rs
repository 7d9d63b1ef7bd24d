#![no_main]

use herdisc::bench::{read_results_csv, render_report, ReportFormat};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(rows) = read_results_csv(text) {
        let again = render_report(&rows, ReportFormat::Csv).unwrap();
        assert_eq!(read_results_csv(&again).unwrap().len(), rows.len());
        let _ = render_report(&rows, ReportFormat::Markdown).unwrap();
    }
});
