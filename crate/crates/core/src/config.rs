//! Flat `key = value` configuration files.
//!
//! `#` starts a comment that runs to the end of the line. Keys are unique.
//! Color bands use repeated `band.<label>.<field>` keys; when any band key is
//! present the default band table is replaced, in order of first mention.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::bgsub::BackgroundConfig;
use crate::colorseg::ColorBand;
use crate::error::{Error, Result};
use crate::regions::StructuringElement;

/// Frame size the spatial defaults are tuned for.
pub const REFERENCE_DIMS: (usize, usize) = (944, 576);
pub const DEFAULT_MIN_AREA: f64 = 400.0;
pub const DEFAULT_GAP_THRESHOLD: f64 = 20.0;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeyValueError {
    pub line: usize,
    pub message: String,
}

impl std::fmt::Display for KeyValueError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

/// Splits a key/value document into entries, preserving order.
pub fn parse_key_values(text: &str) -> std::result::Result<Vec<Entry>, KeyValueError> {
    let mut entries: Vec<Entry> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(KeyValueError {
                line,
                message: format!("expected `key = value`, got {content:?}"),
            });
        };
        let key = key.trim();
        if key.is_empty() || key.chars().any(char::is_whitespace) {
            return Err(KeyValueError {
                line,
                message: format!("invalid key {key:?}"),
            });
        }
        if let Some(prev) = entries.iter().find(|e| e.key == key) {
            return Err(KeyValueError {
                line,
                message: format!("duplicate key {key:?} (first set on line {})", prev.line),
            });
        }
        entries.push(Entry {
            key: key.to_string(),
            value: value.trim().to_string(),
            line,
        });
    }
    Ok(entries)
}

pub fn parse_value<T: FromStr>(entry: &Entry) -> std::result::Result<T, KeyValueError> {
    entry.value.parse().map_err(|_| KeyValueError {
        line: entry.line,
        message: format!("invalid value {:?} for {}", entry.value, entry.key),
    })
}

/// Parses `lo-hi[, lo-hi]` hue intervals.
pub fn parse_hue_ranges(entry: &Entry) -> std::result::Result<Vec<(f64, f64)>, KeyValueError> {
    let bad = || KeyValueError {
        line: entry.line,
        message: format!("invalid hue ranges {:?}; expected `lo-hi[, lo-hi]`", entry.value),
    };
    entry
        .value
        .split(',')
        .map(|part| {
            let (lo, hi) = part.split_once('-').ok_or_else(bad)?;
            let lo = lo.trim().parse::<f64>().map_err(|_| bad())?;
            let hi = hi.trim().parse::<f64>().map_err(|_| bad())?;
            Ok((lo, hi))
        })
        .collect()
}

/// Every free parameter of the detection pipeline.
#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    pub background: BackgroundConfig,
    /// Gray level above which a G-frame pixel counts as set.
    pub binarize_threshold: u8,
    pub bands: Vec<ColorBand>,
    pub se_size: usize,
    /// Absolute minimum region area; `None` scales the 944x576 default.
    pub min_area: Option<f64>,
    /// Absolute clustering gap; `None` scales the 944x576 default.
    pub gap_threshold: Option<f64>,
    pub containment_min: f64,
    /// Frames before detections are emitted; `None` means `history`.
    pub warmup_frames: Option<u64>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            background: BackgroundConfig::default(),
            binarize_threshold: 40,
            bands: ColorBand::defaults(),
            se_size: 5,
            min_area: None,
            gap_threshold: None,
            containment_min: 0.5,
            warmup_frames: None,
        }
    }
}

fn area_ratio(width: usize, height: usize) -> f64 {
    (width * height) as f64 / (REFERENCE_DIMS.0 * REFERENCE_DIMS.1) as f64
}

impl PipelineConfig {
    pub fn structuring_element(&self) -> Result<StructuringElement> {
        StructuringElement::square(self.se_size)
    }

    pub fn warmup(&self) -> u64 {
        self.warmup_frames
            .unwrap_or(self.background.history as u64)
    }

    pub fn min_area_for(&self, width: usize, height: usize) -> f64 {
        self.min_area
            .unwrap_or(DEFAULT_MIN_AREA * area_ratio(width, height))
    }

    pub fn gap_threshold_for(&self, width: usize, height: usize) -> f64 {
        self.gap_threshold
            .unwrap_or(DEFAULT_GAP_THRESHOLD * area_ratio(width, height).sqrt())
    }

    pub fn validate(&self) -> Result<()> {
        self.background.validate()?;
        self.structuring_element()?;
        if self.bands.is_empty() {
            return Err(Error::Config("at least one color band is required".into()));
        }
        for (i, band) in self.bands.iter().enumerate() {
            band.validate()?;
            if self.bands[..i].iter().any(|b| b.label == band.label) {
                return Err(Error::Config(format!("duplicate band {}", band.label)));
            }
        }
        if let Some(a) = self.min_area {
            if !(a >= 0.0 && a.is_finite()) {
                return Err(Error::Config(format!("min_area must be >= 0, got {a}")));
            }
        }
        if let Some(g) = self.gap_threshold {
            if !(g >= 0.0 && g.is_finite()) {
                return Err(Error::Config(format!("gap_threshold must be >= 0, got {g}")));
            }
        }
        if !(0.0..=1.0).contains(&self.containment_min) {
            return Err(Error::Config(format!(
                "containment_min must lie in [0, 1], got {}",
                self.containment_min
            )));
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg_err = |e: KeyValueError| Error::Config(e.to_string());
        let entries = parse_key_values(text).map_err(cfg_err)?;
        let mut cfg = PipelineConfig::default();
        let mut bands: Vec<ColorBand> = Vec::new();
        for e in &entries {
            let bg = &mut cfg.background;
            match e.key.as_str() {
                "history" => bg.history = parse_value(e).map_err(cfg_err)?,
                "match_threshold" => bg.match_threshold = parse_value(e).map_err(cfg_err)?,
                "background_fraction" => bg.background_fraction = parse_value(e).map_err(cfg_err)?,
                "max_components" => bg.max_components = parse_value(e).map_err(cfg_err)?,
                "variance_init" => bg.variance_init = parse_value(e).map_err(cfg_err)?,
                "variance_min" => bg.variance_min = parse_value(e).map_err(cfg_err)?,
                "variance_max" => bg.variance_max = parse_value(e).map_err(cfg_err)?,
                "weight_init" => bg.weight_init = Some(parse_value(e).map_err(cfg_err)?),
                "binarize_threshold" => cfg.binarize_threshold = parse_value(e).map_err(cfg_err)?,
                "se_size" => cfg.se_size = parse_value(e).map_err(cfg_err)?,
                "min_area" => cfg.min_area = Some(parse_value(e).map_err(cfg_err)?),
                "gap_threshold" => cfg.gap_threshold = Some(parse_value(e).map_err(cfg_err)?),
                "containment_min" => cfg.containment_min = parse_value(e).map_err(cfg_err)?,
                "warmup_frames" => cfg.warmup_frames = Some(parse_value(e).map_err(cfg_err)?),
                key => {
                    let Some((label, field)) = key
                        .strip_prefix("band.")
                        .and_then(|rest| rest.rsplit_once('.'))
                    else {
                        return Err(Error::Config(format!("line {}: unknown key {key:?}", e.line)));
                    };
                    let idx = match bands.iter().position(|b| b.label == label) {
                        Some(i) => i,
                        None => {
                            let mut band = ColorBand::defaults()[0].clone();
                            band.label = label.to_string();
                            band.hue_ranges.clear();
                            bands.push(band);
                            bands.len() - 1
                        }
                    };
                    let band = &mut bands[idx];
                    match field {
                        "hue" => band.hue_ranges = parse_hue_ranges(e).map_err(cfg_err)?,
                        "sat_min" => band.sat_min = parse_value(e).map_err(cfg_err)?,
                        "val_min" => band.val_min = parse_value(e).map_err(cfg_err)?,
                        _ => {
                            return Err(Error::Config(format!(
                                "line {}: unknown band field {field:?}",
                                e.line
                            )))
                        }
                    }
                }
            }
        }
        if !bands.is_empty() {
            cfg.bands = bands;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Renders every parameter in the file format accepted by [`parse`].
    ///
    /// [`parse`]: PipelineConfig::parse
    pub fn to_config_string(&self) -> String {
        let bg = &self.background;
        let mut s = String::new();
        let _ = writeln!(s, "history = {}", bg.history);
        let _ = writeln!(s, "match_threshold = {}", bg.match_threshold);
        let _ = writeln!(s, "background_fraction = {}", bg.background_fraction);
        let _ = writeln!(s, "max_components = {}", bg.max_components);
        let _ = writeln!(s, "variance_init = {}", bg.variance_init);
        let _ = writeln!(s, "variance_min = {}", bg.variance_min);
        let _ = writeln!(s, "variance_max = {}", bg.variance_max);
        if let Some(w) = bg.weight_init {
            let _ = writeln!(s, "weight_init = {w}");
        }
        let _ = writeln!(s, "binarize_threshold = {}", self.binarize_threshold);
        let _ = writeln!(s, "se_size = {}", self.se_size);
        if let Some(a) = self.min_area {
            let _ = writeln!(s, "min_area = {a}");
        }
        if let Some(g) = self.gap_threshold {
            let _ = writeln!(s, "gap_threshold = {g}");
        }
        let _ = writeln!(s, "containment_min = {}", self.containment_min);
        if let Some(w) = self.warmup_frames {
            let _ = writeln!(s, "warmup_frames = {w}");
        }
        for band in &self.bands {
            let hue: Vec<String> = band
                .hue_ranges
                .iter()
                .map(|(lo, hi)| format!("{lo}-{hi}"))
                .collect();
            let _ = writeln!(s, "band.{}.hue = {}", band.label, hue.join(", "));
            let _ = writeln!(s, "band.{}.sat_min = {}", band.label, band.sat_min);
            let _ = writeln!(s, "band.{}.val_min = {}", band.label, band.val_min);
        }
        s
    }
}
