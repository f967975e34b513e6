#![no_main]

use bianchi_maxwell::config::RunConfig;
use bianchi_maxwell::maxwell_system::CaseId;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(cfg) = RunConfig::from_json(text) else {
        return;
    };
    // Keep grids small so a single input stays cheap.
    if cfg.time_grid.steps > 64 {
        return;
    }
    if let Ok(p) = cfg.prepare() {
        for case in CaseId::ALL {
            let _ = p.check_free_slots(case);
        }
        let _ = p.curve.state_at(p.grid[0]);
    }
});
