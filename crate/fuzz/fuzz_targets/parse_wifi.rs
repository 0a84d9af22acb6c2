#![no_main]

use libfuzzer_sys::fuzz_target;
use paxflow::ingest::parse_wifi_traces;

fuzz_target!(|data: &[u8]| {
    let _ = parse_wifi_traces(data);
});
