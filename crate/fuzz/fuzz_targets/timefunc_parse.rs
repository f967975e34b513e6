#![no_main]

use std::collections::BTreeMap;

use bianchi_maxwell::timefunc::TimeFunc;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else {
        return;
    };
    let params = BTreeMap::from([("w".to_string(), 1.5), ("p".to_string(), -0.25)]);
    if let Ok(f) = TimeFunc::new(src, &params) {
        for t in [-1.0, 0.0, 0.5, 2.0] {
            let _ = f.eval(t);
        }
    }
});
