#![no_main]

use libfuzzer_sys::fuzz_target;
use revpref_harness::io::{menus_to_json, parse_pool_csv, to_csv};

// Input: menus JSON, a NUL byte, then the long-format CSV.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Some((menus, csv)) = text.split_once('\0') else {
        return;
    };
    if let Ok(pool) = parse_pool_csv(csv, menus) {
        let side = menus_to_json(&pool.alternatives, &pool.menus);
        let again = parse_pool_csv(&to_csv(&pool), &side).expect("written form parses");
        assert_eq!(again, pool);
    }
});
