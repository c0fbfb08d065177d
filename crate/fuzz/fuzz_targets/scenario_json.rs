#![no_main]

//! Scenario JSON parsing must never crash, and any scenario it accepts must
//! survive a write/reload round trip unchanged.

use libfuzzer_sys::fuzz_target;

use ofdm_frontier::scenario::{from_json_str, to_json_string};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(scenario) = from_json_str(text) {
        let written = to_json_string(&scenario);
        let reparsed = from_json_str(&written).expect("accepted scenario must reparse");
        assert_eq!(scenario, reparsed, "round trip must preserve the scenario");
    }
});
