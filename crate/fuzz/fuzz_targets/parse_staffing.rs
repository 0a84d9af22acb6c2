#![no_main]

use libfuzzer_sys::fuzz_target;
use paxflow::ingest::parse_staffing_schedule;

fuzz_target!(|data: &[u8]| {
    let _ = parse_staffing_schedule(data);
});
