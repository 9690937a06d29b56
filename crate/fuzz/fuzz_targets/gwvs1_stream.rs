#![no_main]

use gw_core::frameio::read_raw_stream;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(reader) = read_raw_stream(data) {
        // cap work on huge declared frame counts
        for frame in reader.take(64) {
            if frame.is_err() {
                break;
            }
        }
    }
});
