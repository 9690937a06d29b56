//! Binary region extraction: thresholding, square-element closing, outer
//! border following, and area filtering.

use crate::error::{Error, Result};
use crate::frame::{BinaryMask, BoundingBox, GrayFrame};

/// Square structuring element with odd side length.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StructuringElement {
    size: usize,
}

impl StructuringElement {
    pub fn square(size: usize) -> Result<Self> {
        if size < 3 || size.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "structuring element size must be odd and >= 3, got {size}"
            )));
        }
        Ok(Self { size })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    fn radius(&self) -> usize {
        self.size / 2
    }
}

impl Default for StructuringElement {
    fn default() -> Self {
        Self { size: 5 }
    }
}

pub fn binarize(gframe: &GrayFrame, threshold: u8) -> BinaryMask {
    let bits = gframe.values().iter().map(|&v| v > threshold).collect();
    BinaryMask::from_bits(gframe.width(), gframe.height(), bits).expect("same size")
}

#[derive(Clone, Copy)]
enum Reduce {
    Any,
    All,
}

/// Applies a 1-D window reduction of radius `r` along rows (`stride == 1`) or
/// columns (`stride == width`). Out-of-bounds cells are skipped, so `All`
/// only requires the in-bounds part of the window to be set.
fn window_pass(src: &[bool], width: usize, height: usize, r: usize, along_rows: bool, op: Reduce) -> Vec<bool> {
    let mut out = vec![false; src.len()];
    let (lines, len) = if along_rows { (height, width) } else { (width, height) };
    let index = |line: usize, pos: usize| {
        if along_rows {
            line * width + pos
        } else {
            pos * width + line
        }
    };
    let mut prefix = vec![0usize; len + 1];
    for line in 0..lines {
        for pos in 0..len {
            prefix[pos + 1] = prefix[pos] + src[index(line, pos)] as usize;
        }
        for pos in 0..len {
            let lo = pos.saturating_sub(r);
            let hi = (pos + r + 1).min(len);
            let ones = prefix[hi] - prefix[lo];
            out[index(line, pos)] = match op {
                Reduce::Any => ones > 0,
                Reduce::All => ones == hi - lo,
            };
        }
    }
    out
}

fn square_pass(mask: &BinaryMask, se: StructuringElement, op: Reduce) -> BinaryMask {
    let (w, h) = mask.dims();
    let r = se.radius();
    let rows = window_pass(mask.bits(), w, h, r, true, op);
    let bits = window_pass(&rows, w, h, r, false, op);
    BinaryMask::from_bits(w, h, bits).expect("same size")
}

/// Dilation; pixels outside the image count as background.
pub fn dilate(mask: &BinaryMask, se: StructuringElement) -> BinaryMask {
    square_pass(mask, se, Reduce::Any)
}

/// Erosion restricted to the image domain: a pixel survives when every
/// in-bounds pixel under the element is set.
pub fn erode(mask: &BinaryMask, se: StructuringElement) -> BinaryMask {
    square_pass(mask, se, Reduce::All)
}

/// Morphological closing (dilate, then erode). Extensive and idempotent.
pub fn close(mask: &BinaryMask, se: StructuringElement) -> BinaryMask {
    erode(&dilate(mask, se), se)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Point {
    pub x: u32,
    pub y: u32,
}

/// Outer boundary of one 8-connected foreground component.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Contour {
    /// Boundary pixels in clockwise order (screen orientation, y down),
    /// starting at the component's top-most, then left-most pixel.
    pub points: Vec<Point>,
    pub bbox: BoundingBox,
    /// Pixel count of the whole component.
    pub area: u64,
}

// Neighbor offsets, clockwise on screen starting east.
const DIRS: [(i64, i64); 8] = [
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
];
const WEST: usize = 4;

fn neighbor(mask: &BinaryMask, p: Point, dir: usize) -> Option<Point> {
    let (dx, dy) = DIRS[dir];
    let x = p.x as i64 + dx;
    let y = p.y as i64 + dy;
    if x < 0 || y < 0 || x >= mask.width() as i64 || y >= mask.height() as i64 {
        return None;
    }
    let q = Point {
        x: x as u32,
        y: y as u32,
    };
    mask.get(q.x as usize, q.y as usize).then_some(q)
}

fn direction(from: Point, to: Point) -> usize {
    let d = (to.x as i64 - from.x as i64, to.y as i64 - from.y as i64);
    DIRS.iter().position(|&o| o == d).expect("points are adjacent")
}

/// Border following around the component whose top-left pixel is `start`.
fn trace_outer(mask: &BinaryMask, start: Point) -> Vec<Point> {
    // the pixel reached just before returning to `start`: first foreground
    // neighbor counter-clockwise from west
    let Some(last) = (0..8).find_map(|k| neighbor(mask, start, (WEST + 8 - k) % 8)) else {
        return vec![start];
    };
    let mut points = Vec::new();
    let mut prev = last;
    let mut cur = start;
    loop {
        let back = direction(cur, prev);
        let next = (1..=8)
            .find_map(|k| neighbor(mask, cur, (back + k) % 8))
            .expect("prev is a foreground neighbor");
        points.push(cur);
        if next == start && cur == last {
            break;
        }
        prev = cur;
        cur = next;
    }
    points
}

/// One contour per 8-connected component, ordered by `(bbox.y, bbox.x)`.
pub fn trace_contours(mask: &BinaryMask) -> Vec<Contour> {
    let (w, h) = mask.dims();
    let mut seen = vec![false; w * h];
    let mut stack = Vec::new();
    let mut contours = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if !mask.bits()[i] || seen[i] {
                continue;
            }
            let (mut x0, mut y0, mut x1, mut y1) = (x, y, x, y);
            let mut area = 0u64;
            seen[i] = true;
            stack.push((x, y));
            while let Some((cx, cy)) = stack.pop() {
                area += 1;
                x0 = x0.min(cx);
                x1 = x1.max(cx);
                y0 = y0.min(cy);
                y1 = y1.max(cy);
                for ny in cy.saturating_sub(1)..=(cy + 1).min(h - 1) {
                    for nx in cx.saturating_sub(1)..=(cx + 1).min(w - 1) {
                        let j = ny * w + nx;
                        if mask.bits()[j] && !seen[j] {
                            seen[j] = true;
                            stack.push((nx, ny));
                        }
                    }
                }
            }
            let start = Point {
                x: x as u32,
                y: y as u32,
            };
            contours.push(Contour {
                points: trace_outer(mask, start),
                bbox: BoundingBox::new(
                    x0 as u32,
                    y0 as u32,
                    (x1 - x0 + 1) as u32,
                    (y1 - y0 + 1) as u32,
                ),
                area,
            });
        }
    }
    contours.sort_by_key(|c| (c.bbox.y, c.bbox.x));
    contours
}

/// Keeps contours with `area >= min_area`, preserving order.
pub fn filter_small(contours: Vec<Contour>, min_area: f64) -> Vec<Contour> {
    contours
        .into_iter()
        .filter(|c| c.area as f64 >= min_area)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mask_from(rows: &[&str]) -> BinaryMask {
        let h = rows.len();
        let w = rows[0].len();
        let bits = rows
            .iter()
            .flat_map(|r| r.bytes().map(|b| b == b'#'))
            .collect();
        BinaryMask::from_bits(w, h, bits).unwrap()
    }

    fn pts(list: &[(u32, u32)]) -> Vec<Point> {
        list.iter().map(|&(x, y)| Point { x, y }).collect()
    }

    #[test]
    fn element_sizes() {
        assert!(StructuringElement::square(3).is_ok());
        assert!(StructuringElement::square(4).is_err());
        assert!(StructuringElement::square(1).is_err());
        assert_eq!(StructuringElement::default().size(), 5);
    }

    #[test]
    fn binarize_threshold_is_strict() {
        let g = GrayFrame::new(3, 1, vec![0, 40, 41]).unwrap();
        assert_eq!(binarize(&g, 40).bits(), &[false, false, true]);
        let zeros = GrayFrame::new(2, 2, vec![0; 4]).unwrap();
        assert_eq!(binarize(&zeros, 0).count_ones(), 0);
        let full = GrayFrame::new(2, 2, vec![255; 4]).unwrap();
        assert_eq!(binarize(&full, 0).count_ones(), 4);
    }

    #[test]
    fn closing_fills_single_hole() {
        let mut m = BinaryMask::new(11, 11);
        for y in 2..9 {
            for x in 2..9 {
                m.set(x, y, true);
            }
        }
        m.set(5, 5, false);
        let mut solid = m.clone();
        solid.set(5, 5, true);
        let se = StructuringElement::square(3).unwrap();
        assert_eq!(close(&m, se), solid);
    }

    #[test]
    fn closing_keeps_border_pixels() {
        let m = mask_from(&["#..", "...", "..#"]);
        let closed = close(&m, StructuringElement::square(3).unwrap());
        assert!(closed.get(0, 0) && closed.get(2, 2));
    }

    #[test]
    fn closing_empty_mask() {
        let m = BinaryMask::new(6, 4);
        assert_eq!(close(&m, StructuringElement::default()), m);
    }

    #[test]
    fn single_pixel_contour() {
        let mut m = BinaryMask::new(8, 8);
        m.set(3, 4, true);
        let c = trace_contours(&m);
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].points, pts(&[(3, 4)]));
        assert_eq!(c[0].area, 1);
        assert_eq!(c[0].bbox, BoundingBox::new(3, 4, 1, 1));
    }

    #[test]
    fn square_traced_clockwise() {
        let m = mask_from(&["....", ".##.", ".##.", "...."]);
        let c = trace_contours(&m);
        assert_eq!(c[0].points, pts(&[(1, 1), (2, 1), (2, 2), (1, 2)]));
    }

    #[test]
    fn l_shape_and_diagonal() {
        let m = mask_from(&["#...", "##..", ".#.#", "..#."]);
        let c = trace_contours(&m);
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].area, 6);
        assert_eq!(c[0].bbox, BoundingBox::new(0, 0, 4, 4));
        assert_eq!(
            c[0].points,
            pts(&[(0, 0), (1, 1), (1, 2), (2, 3), (3, 2), (2, 3), (1, 2), (0, 1)])
        );
    }

    #[test]
    fn outer_border_skips_holes() {
        let m = mask_from(&["###", "#.#", "###"]);
        let c = trace_contours(&m);
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].area, 8);
        assert_eq!(c[0].points.len(), 8);
    }

    #[test]
    fn two_blocks_in_order() {
        let m = mask_from(&["......", ".##...", ".##.##", "....##"]);
        let c = trace_contours(&m);
        assert_eq!(c.len(), 2);
        assert_eq!((c[0].area, c[1].area), (4, 4));
        assert_eq!(c[0].bbox, BoundingBox::new(1, 1, 2, 2));
        assert_eq!(c[1].bbox, BoundingBox::new(4, 2, 2, 2));
    }

    #[test]
    fn ordering_uses_bbox_not_start_pixel() {
        // the right component starts on row 0, the left one's bbox begins at
        // row 0 too but further left
        let m = mask_from(&["...#", "#..#", "#..."]);
        let c = trace_contours(&m);
        assert_eq!(c[0].bbox, BoundingBox::new(3, 0, 1, 2));
        assert_eq!(c[1].bbox, BoundingBox::new(0, 1, 1, 2));
    }

    #[test]
    fn small_filter() {
        let mk = |area| Contour {
            points: pts(&[(0, 0)]),
            bbox: BoundingBox::new(0, 0, 1, 1),
            area,
        };
        let cs = vec![mk(4), mk(400), mk(1000)];
        assert_eq!(filter_small(cs.clone(), 0.0), cs);
        let kept = filter_small(cs, 400.0);
        assert_eq!(kept.iter().map(|c| c.area).collect::<Vec<_>>(), [400, 1000]);
    }
}
