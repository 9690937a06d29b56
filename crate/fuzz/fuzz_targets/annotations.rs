#![no_main]

use gw_core::frameio::jsonl::write_annotations_to;
use gw_core::frameio::parse_annotations;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(anns) = parse_annotations(data, None) {
        let mut out = Vec::new();
        write_annotations_to(&mut out, &anns).unwrap();
        assert_eq!(parse_annotations(out.as_slice(), None).unwrap(), anns);
    }
});
