#![no_main]

use bianchi_maxwell::spacetime::import_json;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(sol) = import_json(data) {
        let grid = sol.grid();
        let mid = 0.5 * (grid[0] + grid[grid.len() - 1]);
        let _ = sol.local(mid);
    }
});
