#![no_main]

use libfuzzer_sys::fuzz_target;
use revpref_harness::io::{menus_to_json, parse_menus_json};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok((alts, menus)) = parse_menus_json(text) {
        let again = parse_menus_json(&menus_to_json(&alts, &menus)).expect("written form parses");
        assert_eq!(again, (alts, menus));
    }
});
