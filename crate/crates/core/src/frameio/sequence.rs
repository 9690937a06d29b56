//! Directories of `frame_NNNNNN.ppm` files.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::frameio::ppm;

pub fn frame_file_name(index: u64) -> String {
    format!("frame_{index:06}.ppm")
}

fn parse_frame_file_name(name: &str) -> Option<u64> {
    let digits = name.strip_prefix("frame_")?.strip_suffix(".ppm")?;
    if digits.len() != 6 || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

/// Ordered iterator over a PPM frame directory.
///
/// The directory listing is validated up front (contiguity from 0); each
/// frame is decoded lazily and checked against the first frame's size.
#[derive(Debug)]
pub struct FrameSequence {
    dir: PathBuf,
    len: u64,
    next: u64,
    dims: Option<(usize, usize)>,
    failed: bool,
}

impl FrameSequence {
    pub fn open(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref().to_path_buf();
        let mut indices = BTreeSet::new();
        for entry in fs::read_dir(&dir)? {
            let entry = entry?;
            if let Some(index) = entry.file_name().to_str().and_then(parse_frame_file_name) {
                indices.insert(index);
            }
        }
        if let Some(missing) = (0..).zip(&indices).find(|(want, have)| want != *have) {
            return Err(Error::Sequence { missing: missing.0 });
        }
        Ok(Self {
            dir,
            len: indices.len() as u64,
            next: 0,
            dims: None,
            failed: false,
        })
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn load(&mut self, index: u64) -> Result<Frame> {
        let path = self.dir.join(frame_file_name(index));
        let data = fs::read(&path)?;
        let img = ppm::decode(&data)
            .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        let dims = (img.width, img.height);
        match self.dims {
            None => self.dims = Some(dims),
            Some(first) if first != dims => {
                return Err(Error::Format(format!(
                    "{}: frame size changed from {}x{} to {}x{}",
                    path.display(),
                    first.0,
                    first.1,
                    dims.0,
                    dims.1
                )))
            }
            Some(_) => {}
        }
        Frame::new(img.width, img.height, index, img.pixels)
    }
}

impl Iterator for FrameSequence {
    type Item = Result<Frame>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed || self.next >= self.len {
            return None;
        }
        let index = self.next;
        self.next += 1;
        let result = self.load(index);
        self.failed = result.is_err();
        Some(result)
    }
}

pub fn read_frame_sequence(dir: impl AsRef<Path>) -> Result<FrameSequence> {
    FrameSequence::open(dir)
}

/// Writes `frame` as `frame_NNNNNN.ppm` under `dir`, named by its index.
pub fn write_frame(dir: impl AsRef<Path>, frame: &Frame) -> Result<PathBuf> {
    let path = dir.as_ref().join(frame_file_name(frame.index));
    fs::write(&path, ppm::encode_to_vec(frame))?;
    Ok(path)
}
