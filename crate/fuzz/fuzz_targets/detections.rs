#![no_main]

use gw_core::frameio::parse_detections;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(dets) = parse_detections(data) {
        assert!(dets.iter().all(|d| (0.0..=1.0).contains(&d.score)));
    }
});
