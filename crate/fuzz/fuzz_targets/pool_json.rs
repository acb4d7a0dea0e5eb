#![no_main]

use libfuzzer_sys::fuzz_target;
use revpref_harness::io::{parse_pool_json, to_json};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(pool) = parse_pool_json(text) {
        // accepted pools survive a canonical round trip
        let again = parse_pool_json(&to_json(&pool)).expect("canonical form parses");
        assert_eq!(again, pool);
    }
});
