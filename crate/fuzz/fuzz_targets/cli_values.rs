#![no_main]

use libfuzzer_sys::fuzz_target;
use revpref_core::models::ModelSpec;
use revpref_harness::generate::Preset;
use revpref_harness::report::ReportFormat;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(m) = text.parse::<ModelSpec>() {
        assert_eq!(m.to_string().parse::<ModelSpec>().unwrap(), m);
    }
    if let Ok(p) = text.parse::<Preset>() {
        assert_eq!(p.to_string().parse::<Preset>().unwrap(), p);
    }
    let _ = text.parse::<ReportFormat>();
});
