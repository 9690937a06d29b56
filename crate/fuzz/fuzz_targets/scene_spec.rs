#![no_main]

use gw_core::synth::parse_scene;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(spec) = parse_scene(text) {
        // keep rendering cheap
        if spec.width * spec.height <= 64 * 64 && spec.nframes <= 8 {
            let _ = spec.frames().map(|f| f.count());
        }
    }
});
