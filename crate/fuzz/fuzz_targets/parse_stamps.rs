#![no_main]

use libfuzzer_sys::fuzz_target;
use paxflow::ingest::parse_immigration_stamps;

fuzz_target!(|data: &[u8]| {
    if let Ok(parsed) = parse_immigration_stamps(data) {
        assert!(parsed.records.windows(2).all(|w| w[0].timestamp <= w[1].timestamp));
    }
});
