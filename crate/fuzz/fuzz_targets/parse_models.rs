#![no_main]

use libfuzzer_sys::fuzz_target;
use paxflow::calibrate::CalibratedModels;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(models) = CalibratedModels::from_json(text) {
        let again = CalibratedModels::from_json(&models.to_json()).unwrap();
        assert_eq!(again, models);
    }
});
