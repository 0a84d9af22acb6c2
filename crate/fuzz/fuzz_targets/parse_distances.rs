#![no_main]

use libfuzzer_sys::fuzz_target;
use paxflow::ingest::parse_distances;

fuzz_target!(|data: &[u8]| {
    if let Ok(parsed) = parse_distances(data) {
        assert!(parsed.records.values().all(|d| d.is_finite() && *d > 0.0));
    }
});
