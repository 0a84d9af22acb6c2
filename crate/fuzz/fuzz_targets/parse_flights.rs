#![no_main]

use libfuzzer_sys::fuzz_target;
use paxflow::ingest::{parse_flight_schedule, write_flight_schedule};

fuzz_target!(|data: &[u8]| {
    let Ok(parsed) = parse_flight_schedule(data) else { return };
    // Whatever was accepted must survive a write and re-read unchanged.
    let mut buf = Vec::new();
    write_flight_schedule(&parsed.records, &mut buf).unwrap();
    let again = parse_flight_schedule(&buf[..]).unwrap();
    assert_eq!(again.records, parsed.records);
});
