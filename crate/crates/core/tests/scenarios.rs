use twext::presets::{self, PresetKind, PRESETS};
use twext::scenario::run_scenario;

#[test]
fn every_scenario_passes() {
    let mut failed = Vec::new();
    for p in PRESETS.iter().filter(|p| p.kind == PresetKind::Scenario) {
        let sc = presets::scenario(p.name).unwrap();
        let start = std::time::Instant::now();
        let report = run_scenario(&sc).unwrap_or_else(|e| panic!("{}: {e}", p.name));
        print!("{report}");
        println!("  ({:.2?})", start.elapsed());
        if !report.passed() {
            failed.push(p.name);
        }
    }
    assert!(failed.is_empty(), "failing scenarios: {failed:?}");
}
