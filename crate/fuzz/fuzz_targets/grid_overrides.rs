#![no_main]

use bianchi_maxwell::config::parse_grid_overrides;
use bianchi_maxwell::verify::GridSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(g) = parse_grid_overrides(text, GridSpec::default()) {
        let _ = g.validate();
    }
});
