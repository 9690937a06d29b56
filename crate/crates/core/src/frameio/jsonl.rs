//! JSON Lines records: ground-truth annotations, detections, and person
//! sidecars. One object per frame.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cluster::PersonBoxes;
use crate::error::{Error, Result};
use crate::frame::BoundingBox;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Annotation {
    pub frame_index: u64,
    pub boxes: Vec<BoundingBox>,
}

/// One garment-of-interest found in one frame.
#[derive(Clone, Debug, PartialEq)]
pub struct Detection {
    pub frame_index: u64,
    pub bbox: BoundingBox,
    pub color_label: String,
    /// Clustered region area over frame area, in `[0, 1]`.
    pub score: f64,
}

#[derive(Deserialize)]
struct RawBox {
    x: i64,
    y: i64,
    w: i64,
    h: i64,
    #[serde(default)]
    color: Option<String>,
    #[serde(default)]
    score: Option<f64>,
}

#[derive(Deserialize)]
struct RawBoxesLine {
    frame: i64,
    boxes: Vec<RawBox>,
}

#[derive(Deserialize)]
struct RawPersonsLine {
    frame: i64,
    persons: Vec<RawBox>,
}

#[derive(Serialize)]
struct OutBox<'a> {
    x: u32,
    y: u32,
    w: u32,
    h: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    color: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    score: Option<f64>,
}

impl<'a> OutBox<'a> {
    fn plain(b: &BoundingBox) -> Self {
        Self {
            x: b.x,
            y: b.y,
            w: b.w,
            h: b.h,
            color: None,
            score: None,
        }
    }
}

#[derive(Serialize)]
struct OutBoxesLine<'a> {
    frame: u64,
    boxes: Vec<OutBox<'a>>,
}

#[derive(Serialize)]
struct OutPersonsLine<'a> {
    frame: u64,
    persons: Vec<OutBox<'a>>,
}

fn validate_frame(frame: i64, line: usize) -> Result<u64> {
    u64::try_from(frame).map_err(|_| {
        Error::Validation(format!("line {line}: frame index {frame} is negative"))
    })
}

fn validate_box(raw: &RawBox, line: usize, dims: Option<(usize, usize)>) -> Result<BoundingBox> {
    let coord = |v: i64, what: &str, min: i64| -> Result<u32> {
        if v < min || v > u32::MAX as i64 {
            let bound = if min == 0 { "non-negative" } else { "at least 1" };
            return Err(Error::Validation(format!(
                "line {line}: box {what} = {v} must be {bound}"
            )));
        }
        Ok(v as u32)
    };
    let b = BoundingBox::new(
        coord(raw.x, "x", 0)?,
        coord(raw.y, "y", 0)?,
        coord(raw.w, "w", 1)?,
        coord(raw.h, "h", 1)?,
    );
    if let Some((width, height)) = dims {
        if !b.fits_within(width, height) {
            return Err(Error::Validation(format!(
                "line {line}: box {b:?} exceeds {width}x{height} frame"
            )));
        }
    }
    Ok(b)
}

/// Parses each non-blank line of `reader` with `f`, passing the 1-based line
/// number.
fn parse_lines<R, T, F>(reader: R, mut f: F) -> Result<Vec<T>>
where
    R: BufRead,
    F: FnMut(&str, usize) -> Result<T>,
{
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(f(&line, i + 1)?);
    }
    Ok(out)
}

fn json<'de, T: Deserialize<'de>>(text: &'de str, line: usize) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        line,
        message: e.to_string(),
    })
}

fn sort_unique_by_frame<T>(items: &mut [T], key: impl Fn(&T) -> u64) -> Result<()> {
    items.sort_by_key(&key);
    if let Some(pair) = items.windows(2).find(|w| key(&w[0]) == key(&w[1])) {
        return Err(Error::Validation(format!(
            "frame {} appears more than once",
            key(&pair[0])
        )));
    }
    Ok(())
}

/// Parses annotation lines. Extra per-box fields (`color`, `score`) are
/// accepted and ignored, so detection files read as annotations too.
pub fn parse_annotations<R: BufRead>(
    reader: R,
    dims: Option<(usize, usize)>,
) -> Result<Vec<Annotation>> {
    let mut anns = parse_lines(reader, |text, line| {
        let raw: RawBoxesLine = json(text, line)?;
        Ok(Annotation {
            frame_index: validate_frame(raw.frame, line)?,
            boxes: raw
                .boxes
                .iter()
                .map(|b| validate_box(b, line, dims))
                .collect::<Result<_>>()?,
        })
    })?;
    sort_unique_by_frame(&mut anns, |a| a.frame_index)?;
    Ok(anns)
}

pub fn read_annotations(
    path: impl AsRef<Path>,
    dims: Option<(usize, usize)>,
) -> Result<Vec<Annotation>> {
    parse_annotations(BufReader::new(File::open(path)?), dims)
}

pub fn write_annotations_to<W: Write>(mut out: W, annotations: &[Annotation]) -> Result<()> {
    for ann in annotations {
        let line = OutBoxesLine {
            frame: ann.frame_index,
            boxes: ann.boxes.iter().map(OutBox::plain).collect(),
        };
        serde_json::to_writer(&mut out, &line).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_annotations(path: impl AsRef<Path>, annotations: &[Annotation]) -> Result<()> {
    write_annotations_to(BufWriter::new(File::create(path)?), annotations)
}

/// Parses detection lines; every box must carry `color` and `score`.
pub fn parse_detections<R: BufRead>(reader: R) -> Result<Vec<Detection>> {
    let lines = parse_lines(reader, |text, line| {
        let raw: RawBoxesLine = json(text, line)?;
        let frame_index = validate_frame(raw.frame, line)?;
        raw.boxes
            .iter()
            .map(|b| {
                let bbox = validate_box(b, line, None)?;
                let color_label = b.color.clone().ok_or_else(|| Error::Parse {
                    line,
                    message: "detection box is missing \"color\"".into(),
                })?;
                let score = b.score.ok_or_else(|| Error::Parse {
                    line,
                    message: "detection box is missing \"score\"".into(),
                })?;
                if !(0.0..=1.0).contains(&score) {
                    return Err(Error::Validation(format!(
                        "line {line}: score {score} outside [0, 1]"
                    )));
                }
                Ok(Detection {
                    frame_index,
                    bbox,
                    color_label,
                    score,
                })
            })
            .collect::<Result<Vec<_>>>()
            .map(|dets| (frame_index, dets))
    })?;
    let mut lines = lines;
    sort_unique_by_frame(&mut lines, |(frame, _)| *frame)?;
    Ok(lines.into_iter().flat_map(|(_, dets)| dets).collect())
}

pub fn read_detections(path: impl AsRef<Path>) -> Result<Vec<Detection>> {
    parse_detections(BufReader::new(File::open(path)?))
}

/// Writes detections grouped into one line per frame. Frames without
/// detections produce no line.
pub fn write_detections_to<W: Write>(mut out: W, detections: &[Detection]) -> Result<()> {
    if let Some(pair) = detections
        .windows(2)
        .find(|w| w[0].frame_index > w[1].frame_index)
    {
        return Err(Error::Input(format!(
            "detections not sorted by frame: {} follows {}",
            pair[1].frame_index, pair[0].frame_index
        )));
    }
    for group in detections.chunk_by(|a, b| a.frame_index == b.frame_index) {
        let line = OutBoxesLine {
            frame: group[0].frame_index,
            boxes: group
                .iter()
                .map(|d| OutBox {
                    color: Some(&d.color_label),
                    score: Some(d.score),
                    ..OutBox::plain(&d.bbox)
                })
                .collect(),
        };
        serde_json::to_writer(&mut out, &line).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_detections(detections: &[Detection], path: impl AsRef<Path>) -> Result<()> {
    write_detections_to(BufWriter::new(File::create(path)?), detections)
}

pub fn parse_person_boxes<R: BufRead>(
    reader: R,
    dims: Option<(usize, usize)>,
) -> Result<Vec<PersonBoxes>> {
    let mut out = parse_lines(reader, |text, line| {
        let raw: RawPersonsLine = json(text, line)?;
        Ok(PersonBoxes {
            frame_index: validate_frame(raw.frame, line)?,
            boxes: raw
                .persons
                .iter()
                .map(|b| validate_box(b, line, dims))
                .collect::<Result<_>>()?,
        })
    })?;
    sort_unique_by_frame(&mut out, |p| p.frame_index)?;
    Ok(out)
}

pub fn read_person_boxes(
    path: impl AsRef<Path>,
    dims: Option<(usize, usize)>,
) -> Result<Vec<PersonBoxes>> {
    parse_person_boxes(BufReader::new(File::open(path)?), dims)
}

pub fn write_person_boxes_to<W: Write>(mut out: W, persons: &[PersonBoxes]) -> Result<()> {
    for p in persons {
        let line = OutPersonsLine {
            frame: p.frame_index,
            persons: p.boxes.iter().map(OutBox::plain).collect(),
        };
        serde_json::to_writer(&mut out, &line).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_person_boxes(path: impl AsRef<Path>, persons: &[PersonBoxes]) -> Result<()> {
    write_person_boxes_to(BufWriter::new(File::create(path)?), persons)
}

/// Collapses detections into per-frame annotation records for evaluation.
pub fn detections_as_annotations(detections: &[Detection]) -> Vec<Annotation> {
    let mut out: Vec<Annotation> = Vec::new();
    for d in detections {
        match out.last_mut() {
            Some(last) if last.frame_index == d.frame_index => last.boxes.push(d.bbox),
            _ => out.push(Annotation {
                frame_index: d.frame_index,
                boxes: vec![d.bbox],
            }),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_annotation_record() {
        let text = r#"{"frame":0,"boxes":[{"x":1,"y":2,"w":3,"h":4}]}"#;
        let anns = parse_annotations(text.as_bytes(), None).unwrap();
        assert_eq!(
            anns,
            vec![Annotation {
                frame_index: 0,
                boxes: vec![BoundingBox::new(1, 2, 3, 4)]
            }]
        );
    }

    #[test]
    fn empty_input_is_empty_list() {
        assert!(parse_annotations(&b""[..], None).unwrap().is_empty());
        assert!(parse_detections(&b"\n\n"[..]).unwrap().is_empty());
    }

    #[test]
    fn malformed_line_reports_its_number() {
        let text = "{\"frame\":0,\"boxes\":[]}\n{\"frame\":1,\"boxes\":[\n";
        match parse_annotations(text.as_bytes(), None) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn zero_or_negative_extent_is_rejected() {
        for bad in [
            r#"{"frame":0,"boxes":[{"x":1,"y":2,"w":0,"h":4}]}"#,
            r#"{"frame":0,"boxes":[{"x":1,"y":2,"w":3,"h":-4}]}"#,
            r#"{"frame":0,"boxes":[{"x":-1,"y":2,"w":3,"h":4}]}"#,
            r#"{"frame":-3,"boxes":[]}"#,
        ] {
            assert!(
                matches!(parse_annotations(bad.as_bytes(), None), Err(Error::Validation(_))),
                "{bad}"
            );
        }
    }

    #[test]
    fn boxes_checked_against_frame_size() {
        let text = r#"{"frame":0,"boxes":[{"x":8,"y":0,"w":3,"h":4}]}"#;
        assert!(parse_annotations(text.as_bytes(), Some((10, 10))).is_err());
        assert!(parse_annotations(text.as_bytes(), Some((11, 10))).is_ok());
    }

    #[test]
    fn annotations_sorted_and_unique() {
        let text = "{\"frame\":3,\"boxes\":[]}\n{\"frame\":1,\"boxes\":[]}\n";
        let anns = parse_annotations(text.as_bytes(), None).unwrap();
        assert_eq!(anns[0].frame_index, 1);
        let dup = "{\"frame\":1,\"boxes\":[]}\n{\"frame\":1,\"boxes\":[]}\n";
        assert!(matches!(
            parse_annotations(dup.as_bytes(), None),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn detection_line_layout() {
        let det = Detection {
            frame_index: 4,
            bbox: BoundingBox::new(1, 2, 3, 4),
            color_label: "Red".into(),
            score: 0.25,
        };
        let mut buf = Vec::new();
        write_detections_to(&mut buf, std::slice::from_ref(&det)).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "{\"frame\":4,\"boxes\":[{\"x\":1,\"y\":2,\"w\":3,\"h\":4,\"color\":\"Red\",\"score\":0.25}]}\n"
        );
        assert_eq!(parse_detections(&buf[..]).unwrap(), vec![det]);
        let anns = parse_annotations(&buf[..], None).unwrap();
        assert_eq!(anns[0].boxes, vec![BoundingBox::new(1, 2, 3, 4)]);
    }

    #[test]
    fn empty_detections_write_empty_file() {
        let mut buf = Vec::new();
        write_detections_to(&mut buf, &[]).unwrap();
        assert!(buf.is_empty());
    }

    #[test]
    fn unsorted_detections_are_refused() {
        let d = |f| Detection {
            frame_index: f,
            bbox: BoundingBox::new(0, 0, 1, 1),
            color_label: "Red".into(),
            score: 0.0,
        };
        assert!(write_detections_to(Vec::new(), &[d(2), d(1)]).is_err());
    }

    #[test]
    fn person_sidecar_roundtrip() {
        let text = r#"{"frame":2,"persons":[{"x":0,"y":0,"w":5,"h":9}]}"#;
        let persons = parse_person_boxes(text.as_bytes(), Some((10, 10))).unwrap();
        assert_eq!(persons[0].frame_index, 2);
        let mut buf = Vec::new();
        write_person_boxes_to(&mut buf, &persons).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().trim_end(), text);
    }

    #[test]
    fn unwritable_sink_is_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("missing").join("out.jsonl");
        assert!(matches!(write_detections(&[], path), Err(Error::Io(_))));
    }
}
