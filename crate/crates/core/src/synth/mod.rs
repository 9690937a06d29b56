//! Synthetic surveillance scenes with exact ground truth.
//!
//! A scene is a fixed background (solid or seeded random texture) with
//! rectangular objects moving at constant integer velocity, optional person
//! boxes, and optional additive Gaussian noise. Ground truth is the painted
//! rectangle itself. Output is a pure function of the spec and its seed.

mod spec;

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub use spec::{load_scene, parse_scene};

use crate::cluster::PersonBoxes;
use crate::error::{Error, Result};
use crate::frame::{BoundingBox, Frame};
use crate::frameio::{self, Annotation};

/// Width of each band in striped objects.
pub const STRIPE_WIDTH: i64 = 4;

#[derive(Clone, Debug, PartialEq)]
pub enum Background {
    Solid([u8; 3]),
    /// Per-pixel uniform random RGB, fixed for the whole sequence.
    Texture,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Pattern {
    Solid,
    /// Vertical bands alternating between the object color and this one.
    Striped([u8; 3]),
}

/// Frame span `[appear, disappear)`; `None` runs to the end of the scene.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Span {
    pub appear: u64,
    pub disappear: Option<u64>,
}

impl Span {
    pub const ALWAYS: Span = Span {
        appear: 0,
        disappear: None,
    };

    pub fn contains(&self, frame: u64) -> bool {
        frame >= self.appear && self.disappear.is_none_or(|d| frame < d)
    }

    fn shifted(self, by: u64) -> Span {
        Span {
            appear: self.appear + by,
            disappear: self.disappear.map(|d| d + by),
        }
    }
}

/// A rectangle moving from `start` by `velocity` pixels per frame, counted
/// from its first visible frame.
#[derive(Clone, Debug, PartialEq)]
pub struct Track {
    pub start: (i64, i64),
    pub size: (u32, u32),
    pub velocity: (i64, i64),
    pub span: Span,
}

impl Track {
    pub fn origin_at(&self, frame: u64) -> (i64, i64) {
        let t = frame.saturating_sub(self.span.appear) as i64;
        (
            self.start.0 + t * self.velocity.0,
            self.start.1 + t * self.velocity.1,
        )
    }

    /// First frame in `[appear, end)` where the box is not fully inside a
    /// `width` x `height` frame. Motion is linear, so the valid frames form
    /// one run starting at `appear`.
    pub fn first_exit(&self, end: u64, width: usize, height: usize) -> Option<u64> {
        if self.span.appear >= end {
            return None;
        }
        let axes = [
            (self.start.0, self.velocity.0, self.size.0, width),
            (self.start.1, self.velocity.1, self.size.1, height),
        ];
        let mut last_ok = i128::MAX;
        for (s, v, size, limit) in axes {
            let (s, v) = (s as i128, v as i128);
            let room = limit as i128 - size as i128 - s;
            if s < 0 || room < 0 {
                return Some(self.span.appear);
            }
            let steps = match v {
                0 => i128::MAX,
                v if v > 0 => room / v,
                v => s / -v,
            };
            last_ok = last_ok.min(steps);
        }
        let exit = last_ok.saturating_add(self.span.appear as i128 + 1);
        (exit < end as i128).then_some(exit as u64)
    }

    /// Box at `frame`, if visible and inside a `width` x `height` frame.
    pub fn box_at(&self, frame: u64, width: usize, height: usize) -> Option<BoundingBox> {
        if !self.span.contains(frame) {
            return None;
        }
        let (x, y) = self.origin_at(frame);
        let (w, h) = self.size;
        let inside = x >= 0
            && y >= 0
            && x + w as i64 <= width as i64
            && y + h as i64 <= height as i64;
        inside.then(|| BoundingBox::new(x as u32, y as u32, w, h))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SceneObject {
    pub name: String,
    pub color: [u8; 3],
    pub pattern: Pattern,
    pub track: Track,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenePerson {
    pub name: String,
    pub track: Track,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    pub nframes: u64,
    pub fps: f64,
    pub background: Background,
    pub objects: Vec<SceneObject>,
    pub persons: Vec<ScenePerson>,
    /// Standard deviation of additive per-channel noise, in gray levels.
    pub noise_sigma: f64,
    pub seed: u64,
}

impl SceneSpec {
    pub fn new(width: usize, height: usize, nframes: u64) -> Self {
        Self {
            width,
            height,
            nframes,
            fps: 25.0,
            background: Background::Solid([128, 128, 128]),
            objects: Vec::new(),
            persons: Vec::new(),
            noise_sigma: 0.0,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::Spec(format!(
                "scene dimensions must be positive, got {}x{}",
                self.width, self.height
            )));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::Spec(format!(
                "noise_sigma must be >= 0, got {}",
                self.noise_sigma
            )));
        }
        if !(self.fps > 0.0 && self.fps.is_finite()) {
            return Err(Error::Spec(format!("fps must be positive, got {}", self.fps)));
        }
        let tracks = self
            .objects
            .iter()
            .map(|o| ("object", &o.name, &o.track))
            .chain(self.persons.iter().map(|p| ("person", &p.name, &p.track)));
        for (kind, name, track) in tracks {
            if track.size.0 == 0 || track.size.1 == 0 {
                return Err(Error::Spec(format!("{kind} {name}: size must be positive")));
            }
            let end = track.span.disappear.unwrap_or(self.nframes).min(self.nframes);
            if let Some(frame) = track.first_exit(end, self.width, self.height) {
                let (x, y) = track.origin_at(frame);
                return Err(Error::Spec(format!(
                    "{kind} {name} leaves the {}x{} frame at frame {frame} (origin {x},{y})",
                    self.width, self.height
                )));
            }
        }
        Ok(())
    }

    /// One record per frame listing every visible object's rectangle.
    pub fn ground_truth(&self) -> Vec<Annotation> {
        (0..self.nframes)
            .map(|frame| Annotation {
                frame_index: frame,
                boxes: self
                    .objects
                    .iter()
                    .filter_map(|o| o.track.box_at(frame, self.width, self.height))
                    .collect(),
            })
            .collect()
    }

    pub fn person_boxes(&self) -> Vec<PersonBoxes> {
        (0..self.nframes)
            .map(|frame| PersonBoxes {
                frame_index: frame,
                boxes: self
                    .persons
                    .iter()
                    .filter_map(|p| p.track.box_at(frame, self.width, self.height))
                    .collect(),
            })
            .collect()
    }

    pub fn frames(&self) -> Result<SceneRenderer<'_>> {
        SceneRenderer::new(self)
    }
}

/// Delays every object and person by `warmup_frames`, leaving a
/// background-only prefix.
pub fn warmup_prefix(spec: &SceneSpec, warmup_frames: u64) -> SceneSpec {
    let mut out = spec.clone();
    out.nframes += warmup_frames;
    for o in &mut out.objects {
        o.track.span = o.track.span.shifted(warmup_frames);
    }
    for p in &mut out.persons {
        p.track.span = p.track.span.shifted(warmup_frames);
    }
    out
}

/// Renders a scene frame by frame. Noise is drawn from one seeded stream in
/// frame order, so frames must be produced sequentially.
pub struct SceneRenderer<'a> {
    spec: &'a SceneSpec,
    background: Vec<u8>,
    rng: ChaCha8Rng,
    noise: Option<Normal<f64>>,
    next: u64,
}

impl<'a> SceneRenderer<'a> {
    fn new(spec: &'a SceneSpec) -> Result<Self> {
        spec.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let n = spec.width * spec.height * 3;
        let background = match spec.background {
            Background::Solid(rgb) => rgb.iter().copied().cycle().take(n).collect(),
            Background::Texture => (0..n).map(|_| rng.random::<u8>()).collect(),
        };
        let noise = (spec.noise_sigma > 0.0)
            .then(|| Normal::new(0.0, spec.noise_sigma).expect("finite positive sigma"));
        Ok(Self {
            spec,
            background,
            rng,
            noise,
            next: 0,
        })
    }

    fn render(&mut self, index: u64) -> Frame {
        let spec = self.spec;
        let mut frame = Frame::new(spec.width, spec.height, index, self.background.clone())
            .expect("validated dimensions");
        for obj in &spec.objects {
            let Some(b) = obj.track.box_at(index, spec.width, spec.height) else {
                continue;
            };
            for y in b.y..b.y + b.h {
                for x in b.x..b.x + b.w {
                    let rgb = match obj.pattern {
                        Pattern::Solid => obj.color,
                        Pattern::Striped(alt) => {
                            if ((x - b.x) as i64 / STRIPE_WIDTH) % 2 == 0 {
                                obj.color
                            } else {
                                alt
                            }
                        }
                    };
                    frame.set_pixel(x as usize, y as usize, rgb);
                }
            }
        }
        if let Some(noise) = self.noise {
            for v in frame.pixels_mut() {
                let sample = noise.sample(&mut self.rng).round();
                *v = (*v as f64 + sample).clamp(0.0, 255.0) as u8;
            }
        }
        frame
    }
}

impl Iterator for SceneRenderer<'_> {
    type Item = Frame;

    fn next(&mut self) -> Option<Frame> {
        if self.next >= self.spec.nframes {
            return None;
        }
        let frame = self.render(self.next);
        self.next += 1;
        Some(frame)
    }
}

/// Writes the PPM sequence, the ground-truth file, and optionally the person
/// sidecar.
pub fn generate(
    spec: &SceneSpec,
    out_dir: impl AsRef<Path>,
    gt_path: impl AsRef<Path>,
    persons_path: Option<&Path>,
) -> Result<()> {
    let out_dir = out_dir.as_ref();
    spec.validate()?;
    fs::create_dir_all(out_dir)?;
    for frame in spec.frames()? {
        frameio::write_frame(out_dir, &frame)?;
    }
    frameio::write_annotations(gt_path, &spec.ground_truth())?;
    if let Some(path) = persons_path {
        frameio::write_person_boxes(path, &spec.person_boxes())?;
    }
    Ok(())
}

/// Writes the scene as a single GWVS1 stream.
pub fn write_stream(spec: &SceneSpec, path: impl AsRef<Path>) -> Result<()> {
    let header = frameio::StreamHeader {
        width: spec.width,
        height: spec.height,
        fps: spec.fps,
        nframes: spec.nframes,
    };
    let frames: Vec<Frame> = spec.frames()?.collect();
    let file = std::io::BufWriter::new(fs::File::create(path)?);
    frameio::write_raw_stream(file, &header, &frames)
}
