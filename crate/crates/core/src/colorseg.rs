//! HSV color bands, per-band masks, and grayscale conversion.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::frame::{BinaryMask, Frame, GrayFrame};

/// Hue/saturation/value with hue in degrees `[0, 360)`, saturation and value
/// in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hsv {
    pub h: f64,
    pub s: f64,
    pub v: f64,
}

/// Hexcone conversion. Hue is reported as 0 for achromatic pixels.
pub fn rgb_to_hsv(rgb: [u8; 3]) -> Hsv {
    let [r, g, b] = rgb.map(|c| c as f64);
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    let v = max / 255.0;
    let s = if max > 0.0 { delta / max } else { 0.0 };
    let mut h = if delta == 0.0 {
        0.0
    } else if max == r {
        60.0 * ((g - b) / delta)
    } else if max == g {
        60.0 * ((b - r) / delta + 2.0)
    } else {
        60.0 * ((r - g) / delta + 4.0)
    };
    if h < 0.0 {
        h += 360.0;
    }
    if h >= 360.0 {
        h -= 360.0;
    }
    Hsv { h, s, v }
}

pub fn hsv_to_rgb(hsv: Hsv) -> [u8; 3] {
    let c = hsv.v * hsv.s;
    let hp = (hsv.h.rem_euclid(360.0)) / 60.0;
    let x = c * (1.0 - (hp % 2.0 - 1.0).abs());
    let (r, g, b) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = hsv.v - c;
    [r, g, b].map(|ch| ((ch + m) * 255.0).round().clamp(0.0, 255.0) as u8)
}

/// A named hue band with saturation/value floors.
#[derive(Clone, Debug, PartialEq)]
pub struct ColorBand {
    pub label: String,
    /// Half-open `[lo, hi)` hue intervals in degrees.
    pub hue_ranges: Vec<(f64, f64)>,
    pub sat_min: f64,
    pub val_min: f64,
}

impl ColorBand {
    pub fn new(
        label: impl Into<String>,
        hue_ranges: Vec<(f64, f64)>,
        sat_min: f64,
        val_min: f64,
    ) -> Result<Self> {
        let band = Self {
            label: label.into(),
            hue_ranges,
            sat_min,
            val_min,
        };
        band.validate()?;
        Ok(band)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(format!("band {}: {msg}", self.label)));
        if self.label.is_empty() {
            return Err(Error::Config("band label must not be empty".into()));
        }
        if self.hue_ranges.is_empty() || self.hue_ranges.len() > 2 {
            return fail(format!(
                "needs one or two hue ranges, got {}",
                self.hue_ranges.len()
            ));
        }
        for &(lo, hi) in &self.hue_ranges {
            if !(0.0..360.0).contains(&lo) || !(hi > lo && hi <= 360.0) {
                return fail(format!("hue range [{lo}, {hi}) outside [0, 360)"));
            }
        }
        if !(0.0..=1.0).contains(&self.sat_min) || !(0.0..=1.0).contains(&self.val_min) {
            return fail(format!(
                "sat_min/val_min must lie in [0, 1], got {} / {}",
                self.sat_min, self.val_min
            ));
        }
        Ok(())
    }

    pub fn contains(&self, hsv: Hsv) -> bool {
        hsv.s >= self.sat_min
            && hsv.v >= self.val_min
            && self
                .hue_ranges
                .iter()
                .any(|&(lo, hi)| hsv.h >= lo && hsv.h < hi)
    }

    /// Fully saturated color at the middle of the first hue range, used for
    /// drawing.
    pub fn display_rgb(&self) -> [u8; 3] {
        let (lo, hi) = self.hue_ranges[0];
        hsv_to_rgb(Hsv {
            h: (lo + hi) / 2.0,
            s: 1.0,
            v: 1.0,
        })
    }

    /// Red, Yellow, Green, Blue.
    pub fn defaults() -> Vec<ColorBand> {
        let band = |label: &str, ranges: Vec<(f64, f64)>| ColorBand {
            label: label.into(),
            hue_ranges: ranges,
            sat_min: 0.30,
            val_min: 0.20,
        };
        vec![
            band("Red", vec![(0.0, 10.0), (350.0, 360.0)]),
            band("Yellow", vec![(40.0, 70.0)]),
            band("Green", vec![(70.0, 170.0)]),
            band("Blue", vec![(170.0, 260.0)]),
        ]
    }
}

pub fn color_mask(fframe: &Frame, band: &ColorBand) -> BinaryMask {
    let bits = fframe
        .pixels()
        .par_chunks_exact(3)
        .map(|p| band.contains(rgb_to_hsv([p[0], p[1], p[2]])))
        .collect();
    BinaryMask::from_bits(fframe.width(), fframe.height(), bits)
        .expect("mask sized from frame")
}

/// Rec. 601 luma, rounded half up, computed in integers.
#[inline]
pub fn luma(rgb: [u8; 3]) -> u8 {
    let [r, g, b] = rgb.map(|c| c as u32);
    ((299 * r + 587 * g + 114 * b + 500) / 1000) as u8
}

pub fn masked_to_gray(fframe: &Frame, mask: &BinaryMask) -> Result<GrayFrame> {
    if fframe.dims() != mask.dims() {
        return Err(Error::shape(fframe.dims(), mask.dims()));
    }
    let values = fframe
        .rgb()
        .zip(mask.bits())
        .map(|(px, &on)| if on { luma(px) } else { 0 })
        .collect();
    GrayFrame::new(fframe.width(), fframe.height(), values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primary_conversions() {
        assert_eq!(
            rgb_to_hsv([255, 0, 0]),
            Hsv {
                h: 0.0,
                s: 1.0,
                v: 1.0
            }
        );
        let gray = rgb_to_hsv([128, 128, 128]);
        assert_eq!((gray.h, gray.s), (0.0, 0.0));
        assert!((gray.v - 0.502).abs() < 1e-3);
        assert_eq!(rgb_to_hsv([0, 255, 0]).h, 120.0);
        assert_eq!(rgb_to_hsv([0, 0, 255]).h, 240.0);
        assert_eq!(rgb_to_hsv([255, 0, 1]).h.floor(), 359.0);
    }

    #[test]
    fn default_band_hits() {
        let bands = ColorBand::defaults();
        let label = |rgb| {
            bands
                .iter()
                .filter(|b| b.contains(rgb_to_hsv(rgb)))
                .map(|b| b.label.as_str())
                .collect::<Vec<_>>()
        };
        assert_eq!(label([255, 0, 0]), ["Red"]);
        assert_eq!(label([250, 0, 20]), ["Red"]);
        assert_eq!(label([230, 220, 30]), ["Yellow"]);
        assert_eq!(label([30, 200, 30]), ["Green"]);
        assert_eq!(label([30, 30, 220]), ["Blue"]);
        assert!(label([128, 128, 128]).is_empty());
        assert!(label([0, 0, 0]).is_empty());
    }

    #[test]
    fn red_frame_red_mask() {
        let f = Frame::filled(4, 4, 0, [255, 0, 0]).unwrap();
        let red = &ColorBand::defaults()[0];
        assert_eq!(color_mask(&f, red).count_ones(), 16);
        let black = Frame::filled(4, 4, 0, [0, 0, 0]).unwrap();
        for band in ColorBand::defaults() {
            assert_eq!(color_mask(&black, &band).count_ones(), 0);
        }
    }

    #[test]
    fn gray_values() {
        assert_eq!(luma([255, 255, 255]), 255);
        assert_eq!(luma([255, 0, 0]), 76);
        assert_eq!(luma([0, 0, 0]), 0);
        let f = Frame::new(2, 1, 0, vec![255, 0, 0, 255, 255, 255]).unwrap();
        let mask = BinaryMask::from_bits(2, 1, vec![true, false]).unwrap();
        assert_eq!(masked_to_gray(&f, &mask).unwrap().values(), &[76, 0]);
    }

    #[test]
    fn band_validation() {
        assert!(ColorBand::new("X", vec![], 0.3, 0.2).is_err());
        assert!(ColorBand::new("X", vec![(0.0, 10.0); 3], 0.3, 0.2).is_err());
        assert!(ColorBand::new("X", vec![(10.0, 5.0)], 0.3, 0.2).is_err());
        assert!(ColorBand::new("X", vec![(350.0, 361.0)], 0.3, 0.2).is_err());
        assert!(ColorBand::new("X", vec![(350.0, 360.0)], 1.5, 0.2).is_err());
        for band in ColorBand::defaults() {
            band.validate().unwrap();
        }
    }

    #[test]
    fn display_colors() {
        let bands = ColorBand::defaults();
        assert_eq!(bands[0].display_rgb(), [255, 21, 0]);
        assert_eq!(bands[3].display_rgb(), [0, 106, 255]);
    }
}
