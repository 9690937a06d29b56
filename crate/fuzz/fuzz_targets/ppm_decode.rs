#![no_main]

use gw_core::frameio::ppm;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(img) = ppm::decode(data) {
        assert_eq!(img.pixels.len(), img.width * img.height * 3);
        let frame = gw_core::Frame::new(img.width, img.height, 0, img.pixels.clone()).unwrap();
        let again = ppm::decode(&ppm::encode_to_vec(&frame)).unwrap();
        assert_eq!(again.pixels, img.pixels);
    }
});
