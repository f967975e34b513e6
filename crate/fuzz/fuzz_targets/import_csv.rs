#![no_main]

use bianchi_maxwell::spacetime::import_csv;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(sol) = import_csv(data) {
        let _ = sol.local(sol.samples[0].u0);
    }
});
