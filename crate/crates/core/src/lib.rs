//! Detection of garments of interest in fixed-camera surveillance footage.
//!
//! Frames pass through an adaptive mixture-of-Gaussians background model;
//! the foreground is split into color bands, cleaned with morphological
//! closing, traced into contours, clustered into garment regions, and
//! filtered against externally supplied person boxes. [`eval`] scores
//! detections against annotated boxes and [`synth`] generates scenes with
//! exact ground truth.

pub mod bgsub;
pub mod cluster;
pub mod colorseg;
pub mod config;
pub mod error;
pub mod eval;
pub mod frame;
pub mod frameio;
pub mod pipeline;
pub mod regions;
pub mod synth;

pub use error::{Error, Result};
pub use frame::{BinaryMask, BoundingBox, Frame, GrayFrame};
pub use frameio::{Annotation, Detection};
pub use config::PipelineConfig;
pub use pipeline::{process_sequence, Pipeline};
