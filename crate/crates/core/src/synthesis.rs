//! Seeded synthetic images with ellipse masks, and the label-corruption
//! protocol that simulates systematic under- and over-segmentation.
//!
//! Generation is a pure function of [`SynthConfig`]. The random stream is
//! xoshiro256** seeded through SplitMix64, and draws are consumed in a fixed
//! order so that other implementations can reproduce datasets byte for byte:
//!
//! 1. per item, shape count `k` (uniform over the configured range);
//! 2. per ellipse, centre x, centre y, semi-axis a, semi-axis b;
//! 3. if the mask's foreground fraction falls outside `(0, 0.6)`, steps 1-2
//!    are repeated (at most 10 re-draws);
//! 4. one Gaussian per pixel in row-major order, each from two uniforms via
//!    Box–Muller (cosine branch only).
//!
//! Uniforms are `(next_u64 >> 11) * 2^-53`.

use std::fmt::Write as _;
use std::path::Path;

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

use crate::error::{Error, Result};
use crate::files::write_atomic;
use crate::morphology::{iterate, MorphOp, StructuringElement};
use crate::raster::{read_gray_pfm, read_mask_pgm, write_gray_pfm, write_mask_pgm, BinaryMask, GrayImage};

/// Minimum distance in pixels between an ellipse centre and the frame.
pub const CENTER_MARGIN: f64 = 4.0;
/// Accepted foreground fraction is the open interval `(0, MAX_FOREGROUND_FRACTION)`.
pub const MAX_FOREGROUND_FRACTION: f64 = 0.6;
/// Re-draws allowed per item after the first attempt.
pub const MAX_REDRAWS: usize = 10;

#[derive(Clone, Debug, PartialEq)]
pub struct SynthConfig {
    pub seed: u64,
    pub count: usize,
    pub width: usize,
    pub height: usize,
    /// Inclusive range of ellipses per image.
    pub shapes_per_image: (usize, usize),
    pub fg_mean: f64,
    pub bg_mean: f64,
    pub noise_sd: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            count: 50,
            width: 64,
            height: 64,
            shapes_per_image: (1, 3),
            fg_mean: 0.7,
            bg_mean: 0.3,
            noise_sd: 0.1,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::ConfigInvalid(m));
        if self.count == 0 {
            return bad("count must be positive".into());
        }
        let min_side = 2 * CENTER_MARGIN as usize + 1;
        if self.width < min_side || self.height < min_side {
            return bad(format!(
                "image must be at least {min_side}x{min_side}, got {}x{}",
                self.width, self.height
            ));
        }
        let (lo, hi) = self.shapes_per_image;
        if lo == 0 || lo > hi {
            return bad(format!("shape range {lo}..={hi} must satisfy 1 <= lo <= hi"));
        }
        for (name, v) in [("fg_mean", self.fg_mean), ("bg_mean", self.bg_mean)] {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("{name} must lie in [0, 1], got {v}"));
            }
        }
        if self.fg_mean.partial_cmp(&self.bg_mean) != Some(std::cmp::Ordering::Greater) {
            return bad(format!("fg_mean {} must exceed bg_mean {}", self.fg_mean, self.bg_mean));
        }
        if !self.noise_sd.is_finite() || self.noise_sd < 0.0 {
            return bad(format!(
                "noise_sd must be finite and non-negative, got {}",
                self.noise_sd
            ));
        }
        Ok(())
    }
}

/// One image, its mask, and an identifier unique within the dataset.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub id: String,
    pub image: GrayImage,
    pub mask: BinaryMask,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Dataset {
    pub items: Vec<Sample>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// First `n` items and the rest, in index order.
    pub fn split_at(&self, n: usize) -> (Dataset, Dataset) {
        let n = n.min(self.items.len());
        (
            Dataset {
                items: self.items[..n].to_vec(),
            },
            Dataset {
                items: self.items[n..].to_vec(),
            },
        )
    }
}

/// The documented random stream.
pub struct SynthRng(Xoshiro256StarStar);

impl SynthRng {
    pub fn new(seed: u64) -> Self {
        Self(Xoshiro256StarStar::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform in `[0, 1)` with 53 bits of resolution.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform integer in `lo..=hi`.
    pub fn integer_in(&mut self, lo: usize, hi: usize) -> usize {
        let span = (hi - lo + 1) as f64;
        (lo + (self.uniform() * span) as usize).min(hi)
    }

    /// Standard normal from two uniforms.
    pub fn gaussian(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}

#[derive(Clone, Copy, Debug)]
struct Ellipse {
    cx: f64,
    cy: f64,
    a: f64,
    b: f64,
}

impl Ellipse {
    fn contains(&self, x: usize, y: usize) -> bool {
        let u = (x as f64 - self.cx) / self.a;
        let v = (y as f64 - self.cy) / self.b;
        u * u + v * v <= 1.0
    }
}

fn draw_mask(rng: &mut SynthRng, cfg: &SynthConfig) -> BinaryMask {
    let (w, h) = (cfg.width as f64, cfg.height as f64);
    let k = rng.integer_in(cfg.shapes_per_image.0, cfg.shapes_per_image.1);
    let ellipses: Vec<Ellipse> = (0..k)
        .map(|_| Ellipse {
            cx: rng.uniform_in(CENTER_MARGIN, w - 1.0 - CENTER_MARGIN),
            cy: rng.uniform_in(CENTER_MARGIN, h - 1.0 - CENTER_MARGIN),
            a: rng.uniform_in(w / 10.0, w / 4.0),
            b: rng.uniform_in(h / 10.0, h / 4.0),
        })
        .collect();
    BinaryMask::from_fn(cfg.width, cfg.height, |x, y| ellipses.iter().any(|e| e.contains(x, y)))
        .expect("dimensions validated")
}

/// Generates a dataset; deterministic in `config`.
pub fn generate(config: &SynthConfig) -> Result<Dataset> {
    config.validate()?;
    let mut rng = SynthRng::new(config.seed);
    let mut items = Vec::with_capacity(config.count);
    for index in 0..config.count {
        let mut attempt = 0;
        let mask = loop {
            let mask = draw_mask(&mut rng, config);
            let frac = mask.foreground_fraction();
            if frac > 0.0 && frac < MAX_FOREGROUND_FRACTION {
                break mask;
            }
            if attempt == MAX_REDRAWS {
                return Err(Error::ConfigInvalid(format!(
                    "item {index}: foreground fraction {frac} outside (0, {MAX_FOREGROUND_FRACTION}) after {MAX_REDRAWS} re-draws"
                )));
            }
            attempt += 1;
        };
        let contrast = config.fg_mean - config.bg_mean;
        let pixels = mask
            .as_slice()
            .iter()
            .map(|&m| {
                let noise = config.noise_sd * rng.gaussian();
                (config.bg_mean + contrast * f64::from(m) + noise).clamp(0.0, 1.0)
            })
            .collect();
        let image = GrayImage::new(config.width, config.height, pixels)?;
        items.push(Sample {
            id: format!("{index:04}"),
            image,
            mask,
        });
    }
    Ok(Dataset { items })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, clap::ValueEnum)]
pub enum Corruption {
    /// Erode the labels (simulated under-segmentation).
    Under,
    /// Dilate the labels (simulated over-segmentation).
    Over,
}

/// `k`-fold erosion (`Under`) or dilation (`Over`) of `mask`.
pub fn corrupt(mask: &BinaryMask, kind: Corruption, k: usize, se: &StructuringElement) -> Result<BinaryMask> {
    if k == 0 {
        return Err(Error::ConstraintViolation("corruption depth must be at least 1".into()));
    }
    let op = match kind {
        Corruption::Under => MorphOp::Erode,
        Corruption::Over => MorphOp::Dilate,
    };
    Ok(iterate(op, mask, se, k))
}

pub const MANIFEST_NAME: &str = "manifest.csv";
pub const MANIFEST_HEADER: &str = "image_id,image_path,mask_path";

/// Writes `img_<id>.pfm`, `gt_<id>.pgm` and `manifest.csv` into `dir`.
/// Manifest paths are relative to `dir`.
pub fn write_dataset(dataset: &Dataset, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut manifest = String::from(MANIFEST_HEADER);
    manifest.push('\n');
    for s in &dataset.items {
        let img = format!("img_{}.pfm", s.id);
        let gt = format!("gt_{}.pgm", s.id);
        write_atomic(&dir.join(&img), &write_gray_pfm(&s.image))?;
        write_atomic(&dir.join(&gt), &write_mask_pgm(&s.mask))?;
        writeln!(manifest, "{},{img},{gt}", s.id).expect("String write");
    }
    write_atomic(&dir.join(MANIFEST_NAME), manifest.as_bytes())
}

/// Loads a dataset from a manifest; relative paths resolve against the
/// manifest's directory.
pub fn read_dataset(manifest_path: &Path) -> Result<Dataset> {
    let text = std::fs::read_to_string(manifest_path)?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let mut lines = text.lines();
    if lines.next() != Some(MANIFEST_HEADER) {
        return Err(Error::BadHeader(format!(
            "manifest must start with {MANIFEST_HEADER:?}"
        )));
    }
    let mut items = Vec::new();
    for (lineno, line) in lines.enumerate().filter(|(_, l)| !l.is_empty()) {
        let fields: Vec<&str> = line.split(',').collect();
        let [id, img, gt] = fields[..] else {
            return Err(Error::BadHeader(format!(
                "manifest line {}: expected 3 fields, got {}",
                lineno + 2,
                fields.len()
            )));
        };
        let image = read_gray_pfm(&std::fs::read(base.join(img))?)?;
        let mask = read_mask_pgm(&std::fs::read(base.join(gt))?)?;
        if image.dims() != mask.dims() {
            return Err(Error::ShapeMismatch {
                left_width: image.width(),
                left_height: image.height(),
                right_width: mask.width(),
                right_height: mask.height(),
            });
        }
        items.push(Sample {
            id: id.to_string(),
            image,
            mask,
        });
    }
    Ok(Dataset { items })
}
