//! End-to-end per-frame detection: background subtraction, F-frame, per-band
//! color masks, G-frames, closing, contours, area filter, clustering, person
//! exclusion.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::bgsub::{apply_mask, BackgroundModel};
use crate::cluster::{cluster_contours, exclude_persons, to_detections, PersonBoxes};
use crate::colorseg::{color_mask, masked_to_gray, ColorBand};
use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::frameio::Detection;
use crate::regions::{binarize, close, filter_small, trace_contours, StructuringElement};

/// Stateful detector bound to one frame size.
#[derive(Debug)]
pub struct Pipeline {
    config: PipelineConfig,
    model: BackgroundModel,
    se: StructuringElement,
    min_area: f64,
    gap_threshold: f64,
}

impl Pipeline {
    pub fn new(width: usize, height: usize, config: PipelineConfig) -> Result<Self> {
        config.validate()?;
        let model = BackgroundModel::new(width, height, config.background.clone())?;
        Ok(Self {
            se: config.structuring_element()?,
            min_area: config.min_area_for(width, height),
            gap_threshold: config.gap_threshold_for(width, height),
            model,
            config,
        })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn model(&self) -> &BackgroundModel {
        &self.model
    }

    fn detect_band(&self, fframe: &Frame, band: &ColorBand, persons: Option<&PersonBoxes>) -> Result<Vec<Detection>> {
        let mask = color_mask(fframe, band);
        let gray = masked_to_gray(fframe, &mask)?;
        let closed = close(&binarize(&gray, self.config.binarize_threshold), self.se);
        let contours = filter_small(trace_contours(&closed), self.min_area);
        let mut clusters = cluster_contours(&contours, &band.label, self.gap_threshold);
        if let Some(p) = persons {
            clusters = exclude_persons(clusters, p, self.config.containment_min);
        }
        Ok(to_detections(&clusters, fframe.index, fframe.area() as u64))
    }

    /// Updates the background model with `frame` and returns its detections.
    /// Nothing is reported while `frame.index` is inside the warmup span.
    pub fn process_frame(&mut self, frame: &Frame, persons: Option<&PersonBoxes>) -> Result<Vec<Detection>> {
        let fg = self.model.update(frame)?;
        if frame.index < self.config.warmup() {
            return Ok(Vec::new());
        }
        let fframe = apply_mask(frame, &fg)?;
        let per_band: Vec<Vec<Detection>> = self
            .config
            .bands
            .par_iter()
            .map(|band| self.detect_band(&fframe, band, persons))
            .collect::<Result<_>>()?;
        Ok(per_band.into_iter().flatten().collect())
    }
}

/// Runs the pipeline over a frame stream. Person boxes are looked up by
/// frame index; frames without a sidecar entry have no persons.
pub fn process_sequence<I>(frames: I, persons: Option<&[PersonBoxes]>, config: &PipelineConfig) -> Result<Vec<Detection>>
where
    I: IntoIterator<Item = Result<Frame>>,
{
    let mut by_frame = BTreeMap::new();
    for p in persons.unwrap_or(&[]) {
        if by_frame.insert(p.frame_index, p).is_some() {
            return Err(Error::Input(format!(
                "person sidecar lists frame {} more than once",
                p.frame_index
            )));
        }
    }
    let mut pipeline: Option<Pipeline> = None;
    let mut out = Vec::new();
    for frame in frames {
        let frame = frame?;
        let p = match &mut pipeline {
            Some(p) => p,
            None => pipeline.insert(Pipeline::new(frame.width(), frame.height(), config.clone())?),
        };
        out.extend(p.process_frame(&frame, by_frame.get(&frame.index).copied())?);
    }
    Ok(out)
}

/// Draws each detection as a 2-pixel rectangle in its band's color.
pub fn draw_overlay(frame: &Frame, detections: &[Detection], bands: &[ColorBand]) -> Frame {
    let mut out = frame.clone();
    for d in detections {
        let rgb = bands
            .iter()
            .find(|b| b.label == d.color_label)
            .map(ColorBand::display_rgb)
            .unwrap_or([255, 255, 255]);
        out.draw_rect(d.bbox, 2, rgb);
    }
    out
}
