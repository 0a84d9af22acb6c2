#![no_main]

use libfuzzer_sys::fuzz_target;
use paxflow::analyze::read_traces;

fuzz_target!(|data: &[u8]| {
    let _ = read_traces(data);
});
