#![no_main]

use gw_core::frameio::parse_person_boxes;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let _ = parse_person_boxes(data, Some((944, 576)));
});
