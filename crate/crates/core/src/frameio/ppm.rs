//! Binary PPM (P6, maxval 255) encoding.

use std::io::Write;

use crate::error::{Error, Result};
use crate::frame::Frame;

/// Decoded P6 image: dimensions plus the RGB payload.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PpmImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_whitespace_and_comments(&mut self) {
        while let Some(&b) = self.data.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.data.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn read_number(&mut self, what: &str) -> Result<usize> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.data.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::Format(format!("PPM header: expected {what}")));
        }
        std::str::from_utf8(&self.data[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Format(format!("PPM header: {what} out of range")))
    }
}

pub fn decode(data: &[u8]) -> Result<PpmImage> {
    if data.len() < 2 || &data[..2] != b"P6" {
        let magic = String::from_utf8_lossy(&data[..data.len().min(2)]).into_owned();
        return Err(Error::Format(format!(
            "expected binary PPM magic P6, found {magic:?}"
        )));
    }
    let mut cur = Cursor { data, pos: 2 };
    let width = cur.read_number("width")?;
    let height = cur.read_number("height")?;
    let maxval = cur.read_number("maxval")?;
    if maxval != 255 {
        return Err(Error::Format(format!("PPM maxval must be 255, got {maxval}")));
    }
    if width == 0 || height == 0 {
        return Err(Error::Format(format!(
            "PPM dimensions must be positive, got {width}x{height}"
        )));
    }
    // exactly one whitespace byte separates the header from the raster
    match data.get(cur.pos) {
        Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
        _ => return Err(Error::Format("PPM header not terminated".into())),
    }
    let expected = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(3))
        .ok_or_else(|| Error::Format(format!("PPM {width}x{height} is too large")))?;
    let payload = &data[cur.pos..];
    if payload.len() != expected {
        return Err(Error::Format(format!(
            "PPM {width}x{height} needs {expected} raster bytes, found {}",
            payload.len()
        )));
    }
    Ok(PpmImage {
        width,
        height,
        pixels: payload.to_vec(),
    })
}

pub fn encode<W: Write>(frame: &Frame, mut out: W) -> std::io::Result<()> {
    write!(out, "P6\n{} {}\n255\n", frame.width(), frame.height())?;
    out.write_all(frame.pixels())
}

pub fn encode_to_vec(frame: &Frame) -> Vec<u8> {
    let mut buf = Vec::with_capacity(frame.pixels().len() + 32);
    encode(frame, &mut buf).expect("writing to a Vec cannot fail");
    buf
}
