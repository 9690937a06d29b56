//! Frame ingestion and box-record file formats.

pub mod gwvs1;
pub mod jsonl;
pub mod ppm;
pub mod sequence;

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

pub use gwvs1::{write_raw_stream, RawStreamReader, StreamHeader};
pub use jsonl::{
    detections_as_annotations, parse_annotations, parse_detections, parse_person_boxes,
    read_annotations, read_detections, read_person_boxes, write_annotations, write_detections,
    write_person_boxes, Annotation, Detection,
};
pub use sequence::{read_frame_sequence, write_frame, FrameSequence};

use crate::error::Result;
use crate::frame::Frame;

pub type FrameStream = Box<dyn Iterator<Item = Result<Frame>> + Send>;

/// Opens either a PPM frame directory or a GWVS1 stream file.
pub fn open_frames(path: impl AsRef<Path>) -> Result<FrameStream> {
    let path = path.as_ref();
    if path.is_dir() {
        Ok(Box::new(read_frame_sequence(path)?))
    } else {
        read_raw_stream(BufReader::new(File::open(path)?))
            .map(|r| Box::new(r) as FrameStream)
    }
}

pub fn read_raw_stream<R: std::io::BufRead>(source: R) -> Result<RawStreamReader<R>> {
    RawStreamReader::new(source)
}
