//! GWVS1 raw video container: one ASCII header line
//! `GWVS1 <width> <height> <fps> <nframes>\n` followed by `nframes` packed
//! RGB frames.

use std::io::{BufRead, Read, Write};

use crate::error::{Error, Result};
use crate::frame::Frame;

pub const MAGIC: &str = "GWVS1";
const MAX_HEADER_LEN: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StreamHeader {
    pub width: usize,
    pub height: usize,
    pub fps: f64,
    pub nframes: u64,
}

impl StreamHeader {
    pub fn frame_bytes(&self) -> usize {
        self.width * self.height * 3
    }

    pub fn payload_bytes(&self) -> u64 {
        self.frame_bytes() as u64 * self.nframes
    }

    pub fn parse(line: &str) -> Result<Self> {
        let fields: Vec<&str> = line.split_ascii_whitespace().collect();
        if fields.first() != Some(&MAGIC) {
            return Err(Error::Format(format!(
                "expected {MAGIC} stream header, found {:?}",
                fields.first().copied().unwrap_or("")
            )));
        }
        if fields.len() != 5 {
            return Err(Error::Format(format!(
                "{MAGIC} header needs 4 fields after the magic, found {}",
                fields.len() - 1
            )));
        }
        let dim = |s: &str, what: &str| -> Result<usize> {
            match s.parse::<usize>() {
                Ok(v) if v > 0 => Ok(v),
                _ => Err(Error::Format(format!("{MAGIC} header: bad {what} {s:?}"))),
            }
        };
        let width = dim(fields[1], "width")?;
        let height = dim(fields[2], "height")?;
        let fps = match fields[3].parse::<f64>() {
            Ok(v) if v.is_finite() && v > 0.0 => v,
            _ => {
                return Err(Error::Format(format!(
                    "{MAGIC} header: bad fps {:?}",
                    fields[3]
                )))
            }
        };
        let nframes = fields[4]
            .parse::<u64>()
            .map_err(|_| Error::Format(format!("{MAGIC} header: bad nframes {:?}", fields[4])))?;
        width
            .checked_mul(height)
            .and_then(|n| n.checked_mul(3))
            .and_then(|n| (n as u64).checked_mul(nframes))
            .ok_or_else(|| Error::Format(format!("{MAGIC} header: stream too large")))?;
        Ok(Self {
            width,
            height,
            fps,
            nframes,
        })
    }

    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "{MAGIC} {} {} {} {}",
            self.width, self.height, self.fps, self.nframes
        )
    }
}

/// Sequential reader over a GWVS1 byte stream.
pub struct RawStreamReader<R> {
    inner: R,
    header: StreamHeader,
    next: u64,
    done: bool,
}

impl<R: BufRead> RawStreamReader<R> {
    pub fn new(mut inner: R) -> Result<Self> {
        let mut line = Vec::new();
        (&mut inner)
            .take(MAX_HEADER_LEN as u64)
            .read_until(b'\n', &mut line)?;
        if line.last() != Some(&b'\n') {
            if line.len() >= MAX_HEADER_LEN {
                return Err(Error::Format(format!("{MAGIC} header line too long")));
            }
            return Err(Error::Format(format!("{MAGIC} header line not terminated")));
        }
        let text = std::str::from_utf8(&line)
            .map_err(|_| Error::Format(format!("{MAGIC} header is not ASCII")))?;
        let header = StreamHeader::parse(text)?;
        Ok(Self {
            inner,
            header,
            next: 0,
            done: false,
        })
    }

    pub fn header(&self) -> &StreamHeader {
        &self.header
    }

    fn read_frame(&mut self) -> Result<Frame> {
        let size = self.header.frame_bytes();
        // grow with the data actually read, so a bogus header cannot force a
        // huge allocation up front
        let mut buf = Vec::new();
        (&mut self.inner).take(size as u64).read_to_end(&mut buf)?;
        let got = buf.len();
        if got < size {
            return Err(Error::Stream {
                expected: self.header.payload_bytes(),
                received: self.next * size as u64 + got as u64,
            });
        }
        Frame::new(self.header.width, self.header.height, self.next, buf)
    }
}

impl<R: BufRead> Iterator for RawStreamReader<R> {
    type Item = Result<Frame>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done || self.next >= self.header.nframes {
            return None;
        }
        let result = self.read_frame();
        if result.is_err() {
            self.done = true;
        }
        self.next += 1;
        Some(result)
    }
}

/// Writes a complete GWVS1 stream. All frames must share the header's
/// dimensions and their count must equal `nframes`.
pub fn write_raw_stream<'a, W, I>(mut out: W, header: &StreamHeader, frames: I) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a Frame>,
{
    header.write(&mut out)?;
    let mut count = 0u64;
    for frame in frames {
        if frame.dims() != (header.width, header.height) {
            return Err(Error::shape((header.width, header.height), frame.dims()));
        }
        out.write_all(frame.pixels())?;
        count += 1;
    }
    if count != header.nframes {
        return Err(Error::Input(format!(
            "header declares {} frames, wrote {count}",
            header.nframes
        )));
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stream(header: &str, payload: usize) -> Vec<u8> {
        let mut data = header.as_bytes().to_vec();
        data.extend((0..payload).map(|i| i as u8));
        data
    }

    #[test]
    fn single_frame_stream() {
        let data = stream("GWVS1 2 2 25 1\n", 12);
        let frames: Vec<_> = RawStreamReader::new(&data[..])
            .unwrap()
            .collect::<Result<_>>()
            .unwrap();
        assert_eq!(frames.len(), 1);
        assert_eq!(frames[0].dims(), (2, 2));
        assert_eq!(frames[0].pixels(), &data[15..]);
    }

    #[test]
    fn truncated_payload_reports_byte_counts() {
        let data = stream("GWVS1 2 2 25 2\n", 12);
        let mut reader = RawStreamReader::new(&data[..]).unwrap();
        assert!(reader.next().unwrap().is_ok());
        match reader.next().unwrap() {
            Err(Error::Stream { expected, received }) => {
                assert_eq!((expected, received), (24, 12));
            }
            other => panic!("expected stream error, got {other:?}"),
        }
        assert!(reader.next().is_none());
    }

    #[test]
    fn bad_magic() {
        let data = stream("GWVS2 2 2 25 1\n", 12);
        assert!(matches!(
            RawStreamReader::new(&data[..]),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn header_roundtrip() {
        let header = StreamHeader {
            width: 4,
            height: 3,
            fps: 29.97,
            nframes: 2,
        };
        let mut buf = Vec::new();
        header.write(&mut buf).unwrap();
        assert_eq!(buf, b"GWVS1 4 3 29.97 2\n");
        let text = std::str::from_utf8(&buf).unwrap();
        assert_eq!(StreamHeader::parse(text).unwrap(), header);
    }

    #[test]
    fn huge_declared_frame_is_not_preallocated() {
        let data = b"GWVS1 100000 100000 25 1\nabc".to_vec();
        let mut reader = RawStreamReader::new(&data[..]).unwrap();
        match reader.next() {
            Some(Err(Error::Stream { received, .. })) => assert_eq!(received, 3),
            other => panic!("unexpected {other:?}"),
        }
    }
}
