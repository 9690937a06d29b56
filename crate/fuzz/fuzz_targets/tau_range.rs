#![no_main]

use gw_core::eval::parse_tau_range;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(taus) = parse_tau_range(text) {
        assert!(taus.windows(2).all(|w| w[0] < w[1]));
    }
});
