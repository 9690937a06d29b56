//! Per-pixel adaptive mixture-of-Gaussians background model.
//!
//! Each pixel carries up to `max_components` isotropic Gaussians
//! `N(x; mean, variance * I)` over RGB, ordered by descending weight. Every
//! frame updates the mixture with exponential forgetting at rate
//! `eta = 1 / history`:
//!
//! * The background set is the shortest weight-ordered prefix whose cumulative
//!   weight exceeds `1 - background_fraction`.
//! * A component matches when `|x - mean|^2 <= k^2 * variance * 3`; the pixel
//!   is background iff a background component matches.
//! * The closest match (smallest `|x - mean|^2 / variance`, lowest index on
//!   ties) gains weight `w += eta * (1 - w)`, all others decay `w *= 1 - eta`.
//!   Its statistics move with `rho = eta / w` (post-update weight); the
//!   variance step uses the distance to the pre-update mean.
//! * With no match, a new component (mean `x`, `variance_init`, weight
//!   `weight_init`) is appended, or replaces the last one when full.
//!
//! Weights are renormalized and re-sorted after every step. Nothing in the
//! update is random, so replays are bit-identical regardless of how rows are
//! distributed across threads.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::frame::{BinaryMask, Frame};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianComponent {
    pub weight: f64,
    pub mean: [f64; 3],
    pub variance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BackgroundConfig {
    /// History window `T` in frames; the learning rate is `1 / T`.
    pub history: u32,
    /// Match radius in standard deviations (`k`).
    pub match_threshold: f64,
    /// Fraction of the weight mass allowed to describe foreground (`c_f`).
    pub background_fraction: f64,
    pub max_components: usize,
    pub variance_init: f64,
    pub variance_min: f64,
    pub variance_max: f64,
    /// Weight of a freshly created component. Defaults to the learning rate.
    pub weight_init: Option<f64>,
}

impl Default for BackgroundConfig {
    fn default() -> Self {
        Self {
            history: 500,
            match_threshold: 3.0,
            background_fraction: 0.1,
            max_components: 5,
            variance_init: 225.0,
            variance_min: 4.0,
            variance_max: 5000.0,
            weight_init: None,
        }
    }
}

impl BackgroundConfig {
    pub fn learning_rate(&self) -> f64 {
        1.0 / self.history as f64
    }

    pub fn initial_weight(&self) -> f64 {
        self.weight_init.unwrap_or_else(|| self.learning_rate())
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.history == 0 {
            return fail("history must be at least 1 frame".into());
        }
        if !(self.match_threshold > 0.0 && self.match_threshold.is_finite()) {
            return fail(format!(
                "match_threshold must be positive, got {}",
                self.match_threshold
            ));
        }
        if !(self.background_fraction > 0.0 && self.background_fraction < 1.0) {
            return fail(format!(
                "background_fraction must lie in (0, 1), got {}",
                self.background_fraction
            ));
        }
        if self.max_components == 0 || self.max_components > u8::MAX as usize {
            return fail(format!(
                "max_components must lie in [1, 255], got {}",
                self.max_components
            ));
        }
        if !(self.variance_min > 0.0
            && self.variance_min <= self.variance_init
            && self.variance_init <= self.variance_max
            && self.variance_max.is_finite())
        {
            return fail(format!(
                "need 0 < variance_min <= variance_init <= variance_max, got {} / {} / {}",
                self.variance_min, self.variance_init, self.variance_max
            ));
        }
        let w = self.initial_weight();
        if !(w > 0.0 && w <= 1.0) {
            return fail(format!("weight_init must lie in (0, 1], got {w}"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug)]
struct Params {
    eta: f64,
    match_k2x3: f64,
    bg_mass: f64,
    max_components: usize,
    variance_init: f64,
    variance_min: f64,
    variance_max: f64,
    weight_init: f64,
}

impl Params {
    fn new(c: &BackgroundConfig) -> Self {
        Self {
            eta: c.learning_rate(),
            match_k2x3: c.match_threshold * c.match_threshold * 3.0,
            bg_mass: 1.0 - c.background_fraction,
            max_components: c.max_components,
            variance_init: c.variance_init,
            variance_min: c.variance_min,
            variance_max: c.variance_max,
            weight_init: c.initial_weight(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct BackgroundModel {
    width: usize,
    height: usize,
    config: BackgroundConfig,
    params: Params,
    /// `max_components` slots per pixel, row-major.
    slots: Vec<GaussianComponent>,
    counts: Vec<u8>,
    frames_seen: u64,
}

impl BackgroundModel {
    pub fn new(width: usize, height: usize, config: BackgroundConfig) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Config(format!(
                "model dimensions must be positive, got {width}x{height}"
            )));
        }
        config.validate()?;
        let params = Params::new(&config);
        let seed = GaussianComponent {
            weight: 1.0,
            mean: [0.0; 3],
            variance: config.variance_init,
        };
        let n = width * height;
        Ok(Self {
            width,
            height,
            slots: vec![seed; n * config.max_components],
            counts: vec![1; n],
            config,
            params,
            frames_seen: 0,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn config(&self) -> &BackgroundConfig {
        &self.config
    }

    pub fn learning_rate(&self) -> f64 {
        self.params.eta
    }

    pub fn frames_seen(&self) -> u64 {
        self.frames_seen
    }

    /// Components of pixel `(x, y)`, by descending weight.
    pub fn pixel(&self, x: usize, y: usize) -> &[GaussianComponent] {
        let i = y * self.width + x;
        let m = self.config.max_components;
        &self.slots[i * m..i * m + self.counts[i] as usize]
    }

    /// Feeds one frame and returns its foreground mask.
    pub fn update(&mut self, frame: &Frame) -> Result<BinaryMask> {
        if frame.dims() != (self.width, self.height) {
            return Err(Error::shape((self.width, self.height), frame.dims()));
        }
        let params = self.params;
        let w = self.width;
        let m = self.config.max_components;
        let mut mask = BinaryMask::new(self.width, self.height);
        self.slots
            .par_chunks_mut(w * m)
            .zip(self.counts.par_chunks_mut(w))
            .zip(frame.pixels().par_chunks(w * 3))
            .zip(mask.bits_mut().par_chunks_mut(w))
            .for_each(|(((slots, counts), pixels), bits)| {
                for (x, bit) in bits.iter_mut().enumerate() {
                    let p = &pixels[x * 3..x * 3 + 3];
                    let sample = [p[0] as f64, p[1] as f64, p[2] as f64];
                    *bit = update_pixel(
                        &mut slots[x * m..(x + 1) * m],
                        &mut counts[x],
                        sample,
                        &params,
                    );
                }
            });
        self.frames_seen += 1;
        Ok(mask)
    }

    /// Mixture density `sum_m w_m N(x; mean_m, variance_m I)` at pixel `px`.
    pub fn background_likelihood(&self, x: [f64; 3], px: (usize, usize)) -> Result<f64> {
        if px.0 >= self.width || px.1 >= self.height {
            return Err(Error::Input(format!(
                "pixel ({}, {}) outside {}x{} model",
                px.0, px.1, self.width, self.height
            )));
        }
        Ok(mixture_density(self.pixel(px.0, px.1), x))
    }
}

pub fn mixture_density(components: &[GaussianComponent], x: [f64; 3]) -> f64 {
    components
        .iter()
        .map(|c| {
            let d2 = dist2(x, c.mean);
            let norm = (2.0 * std::f64::consts::PI * c.variance).powf(-1.5);
            c.weight * norm * (-d2 / (2.0 * c.variance)).exp()
        })
        .sum()
}

#[inline]
fn dist2(a: [f64; 3], b: [f64; 3]) -> f64 {
    let d0 = a[0] - b[0];
    let d1 = a[1] - b[1];
    let d2 = a[2] - b[2];
    d0 * d0 + d1 * d1 + d2 * d2
}

/// Updates one pixel mixture in place; returns `true` for foreground.
fn update_pixel(comps: &mut [GaussianComponent], count: &mut u8, x: [f64; 3], p: &Params) -> bool {
    let n = *count as usize;

    let mut n_bg = n;
    let mut mass = 0.0;
    for (i, c) in comps[..n].iter().enumerate() {
        mass += c.weight;
        if mass > p.bg_mass {
            n_bg = i + 1;
            break;
        }
    }

    let mut background = false;
    let mut best: Option<(usize, f64, f64)> = None;
    for (i, c) in comps[..n].iter().enumerate() {
        let d2 = dist2(x, c.mean);
        if d2 <= p.match_k2x3 * c.variance {
            background |= i < n_bg;
            let scaled = d2 / c.variance;
            if best.is_none_or(|(_, s, _)| scaled < s) {
                best = Some((i, scaled, d2));
            }
        }
    }

    match best {
        Some((j, _, d2)) => {
            for (i, c) in comps[..n].iter_mut().enumerate() {
                if i == j {
                    c.weight += p.eta * (1.0 - c.weight);
                } else {
                    c.weight *= 1.0 - p.eta;
                }
            }
            let c = &mut comps[j];
            let rho = p.eta / c.weight;
            c.variance =
                (c.variance + rho * (d2 / 3.0 - c.variance)).clamp(p.variance_min, p.variance_max);
            for (mu, v) in c.mean.iter_mut().zip(x) {
                *mu += rho * (v - *mu);
            }
        }
        None => {
            let slot = if n < p.max_components {
                *count += 1;
                n
            } else {
                n - 1
            };
            comps[slot] = GaussianComponent {
                weight: p.weight_init,
                mean: x,
                variance: p.variance_init,
            };
        }
    }

    let n = *count as usize;
    let total: f64 = comps[..n].iter().map(|c| c.weight).sum();
    for c in &mut comps[..n] {
        c.weight /= total;
    }
    // stable insertion sort, descending weight
    for i in 1..n {
        let mut j = i;
        while j > 0 && comps[j - 1].weight < comps[j].weight {
            comps.swap(j - 1, j);
            j -= 1;
        }
    }

    !background
}

/// Keeps pixels where `mask` is set and blacks out the rest.
pub fn apply_mask(frame: &Frame, mask: &BinaryMask) -> Result<Frame> {
    if frame.dims() != mask.dims() {
        return Err(Error::shape(frame.dims(), mask.dims()));
    }
    let mut out = frame.clone();
    for (px, &keep) in out.pixels_mut().chunks_exact_mut(3).zip(mask.bits()) {
        if !keep {
            px.fill(0);
        }
    }
    Ok(out)
}
