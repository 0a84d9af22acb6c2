#![no_main]

use libfuzzer_sys::fuzz_target;
use paxflow::analyze::read_bins;

fuzz_target!(|data: &[u8]| {
    let _ = read_bins(data);
});
