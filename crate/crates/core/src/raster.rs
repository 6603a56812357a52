//! Grid types and their on-disk encodings.
//!
//! Masks are stored as binary PGM (`P5`, maxval 255) and floating-point maps
//! as grayscale PFM (`Pf`, little-endian, rows bottom-to-top). Both readers
//! accept only the canonical single-whitespace header layout that the
//! writers produce; header comments are rejected.

use crate::error::{Error, Result};

/// Slack allowed when reading PFM payloads before clamping into `[0, 1]`.
pub const PFM_RANGE_TOLERANCE: f64 = 1e-9;

macro_rules! grid_accessors {
    ($ty:ty, $elem:ty) => {
        impl $ty {
            pub fn width(&self) -> usize {
                self.width
            }

            pub fn height(&self) -> usize {
                self.height
            }

            /// `(width, height)`
            pub fn dims(&self) -> (usize, usize) {
                (self.width, self.height)
            }

            pub fn len(&self) -> usize {
                self.data.len()
            }

            pub fn is_empty(&self) -> bool {
                self.data.is_empty()
            }

            /// Row-major samples.
            pub fn as_slice(&self) -> &[$elem] {
                &self.data
            }

            pub fn into_vec(self) -> Vec<$elem> {
                self.data
            }

            pub fn get(&self, x: usize, y: usize) -> $elem {
                self.data[y * self.width + x]
            }
        }
    };
}

fn check_dims(width: usize, height: usize, len: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidGrid(format!(
            "dimensions must be positive, got {width}x{height}"
        )));
    }
    if width.checked_mul(height) != Some(len) {
        return Err(Error::InvalidGrid(format!(
            "{width}x{height} grid needs {} samples, got {len}",
            width.saturating_mul(height)
        )));
    }
    Ok(())
}

/// Binary ground-truth labels, one byte per pixel, each exactly 0 or 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

grid_accessors!(BinaryMask, u8);

impl BinaryMask {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        check_dims(width, height, data.len())?;
        if let Some(offset) = data.iter().position(|&v| v > 1) {
            return Err(Error::InvalidGrid(format!(
                "label {} at offset {offset} is not 0 or 1",
                data[offset]
            )));
        }
        Ok(Self { width, height, data })
    }

    /// Mask with every pixel set to `label` (0 or 1).
    pub fn filled(width: usize, height: usize, label: u8) -> Result<Self> {
        Self::new(width, height, vec![label; width * height])
    }

    /// Builds a mask from a predicate over `(x, y)`.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(u8::from(f(x, y)));
            }
        }
        Self::new(width, height, data)
    }

    /// Builds a mask from nested rows; all rows must have equal length.
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.as_ref().len());
        if rows.iter().any(|r| r.as_ref().len() != width) {
            return Err(Error::InvalidGrid("ragged rows".into()));
        }
        let data = rows.iter().flat_map(|r| r.as_ref().iter().copied()).collect();
        Self::new(width, height, data)
    }

    /// Caller guarantees every element of `data` is 0 or 1 and the length matches.
    pub(crate) fn from_raw(width: usize, height: usize, data: Vec<u8>) -> Self {
        debug_assert_eq!(data.len(), width * height);
        debug_assert!(data.iter().all(|&v| v <= 1));
        Self { width, height, data }
    }

    pub fn is_set(&self, x: usize, y: usize) -> bool {
        self.get(x, y) == 1
    }

    pub fn count_ones(&self) -> usize {
        self.data.iter().map(|&v| v as usize).sum()
    }

    pub fn foreground_fraction(&self) -> f64 {
        self.count_ones() as f64 / self.data.len() as f64
    }

    /// Swaps foreground and background.
    pub fn complement(&self) -> Self {
        Self::from_raw(self.width, self.height, self.data.iter().map(|&v| v ^ 1).collect())
    }

    /// True when every foreground pixel of `self` is also foreground in `other`.
    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.dims() == other.dims() && self.data.iter().zip(&other.data).all(|(&a, &b)| a <= b)
    }
}

/// Per-pixel foreground probabilities in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbMap {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

grid_accessors!(ProbMap, f64);

impl ProbMap {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        check_dims(width, height, data.len())?;
        if let Some(offset) = data.iter().position(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::OutOfRange {
                offset,
                value: data[offset],
            });
        }
        Ok(Self { width, height, data })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub(crate) fn from_raw(width: usize, height: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), width * height);
        debug_assert!(data.iter().all(|v| (0.0..=1.0).contains(v)));
        Self { width, height, data }
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    /// Foreground where the probability is at least `threshold`.
    pub fn threshold(&self, threshold: f64) -> BinaryMask {
        BinaryMask::from_raw(
            self.width,
            self.height,
            self.data.iter().map(|&p| u8::from(p >= threshold)).collect(),
        )
    }
}

/// Input intensities in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

grid_accessors!(GrayImage, f64);

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        check_dims(width, height, data.len())?;
        if let Some(offset) = data.iter().position(|v| !v.is_finite() || !(0.0..=1.0).contains(v)) {
            return Err(Error::OutOfRange {
                offset,
                value: data[offset],
            });
        }
        Ok(Self { width, height, data })
    }
}

/// Euclidean distances, unsigned or signed.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMap {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

grid_accessors!(DistanceMap, f64);

impl DistanceMap {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        check_dims(width, height, data.len())?;
        if let Some(offset) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid(format!("distance at offset {offset} is not finite")));
        }
        Ok(Self { width, height, data })
    }

    pub(crate) fn from_raw(width: usize, height: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), width * height);
        Self { width, height, data }
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }
}

/// Hard labels as probabilities: 0 → 0.0, 1 → 1.0.
pub fn mask_to_prob(mask: &BinaryMask) -> ProbMap {
    ProbMap::from_raw(
        mask.width,
        mask.height,
        mask.data.iter().map(|&v| f64::from(v)).collect(),
    )
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderCursor<'a> {
    /// Reads a token terminated by exactly one ASCII whitespace byte.
    fn token(&mut self, what: &str) -> Result<&'a str> {
        let rest = &self.bytes[self.pos..];
        let end = rest
            .iter()
            .position(|b| b.is_ascii_whitespace())
            .ok_or_else(|| Error::BadHeader(format!("truncated before {what}")))?;
        if end == 0 {
            return Err(Error::BadHeader(format!("expected {what}, found whitespace")));
        }
        self.pos += end + 1;
        std::str::from_utf8(&rest[..end]).map_err(|_| Error::BadHeader(format!("{what} is not ASCII")))
    }

    fn dimension(&mut self, what: &str) -> Result<usize> {
        let tok = self.token(what)?;
        if !tok.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::BadHeader(format!("{what} {tok:?} is not a decimal integer")));
        }
        match tok.parse::<usize>() {
            Ok(0) | Err(_) => Err(Error::BadHeader(format!("{what} must be positive, got {tok:?}"))),
            Ok(v) => Ok(v),
        }
    }

    fn payload(&self) -> &'a [u8] {
        &self.bytes[self.pos..]
    }
}

fn check_payload(payload: &[u8], expected: usize) -> Result<()> {
    match payload.len().cmp(&expected) {
        std::cmp::Ordering::Less => Err(Error::BadHeader(format!(
            "truncated payload: expected {expected} bytes, got {}",
            payload.len()
        ))),
        std::cmp::Ordering::Greater => Err(Error::BadHeader(format!(
            "{} trailing bytes after payload",
            payload.len() - expected
        ))),
        std::cmp::Ordering::Equal => Ok(()),
    }
}

/// Decodes a binary PGM mask (samples 0 and 255 only).
pub fn read_mask_pgm(bytes: &[u8]) -> Result<BinaryMask> {
    if bytes.len() < 3 || &bytes[..2] != b"P5" || !bytes[2].is_ascii_whitespace() {
        return Err(Error::NotP5);
    }
    let mut cur = HeaderCursor { bytes, pos: 3 };
    let width = cur.dimension("width")?;
    let height = cur.dimension("height")?;
    let maxval = cur.token("maxval")?;
    if maxval != "255" {
        return Err(Error::BadHeader(format!("maxval must be 255, got {maxval:?}")));
    }
    let n = width
        .checked_mul(height)
        .ok_or_else(|| Error::BadHeader("dimensions overflow".into()))?;
    let payload = cur.payload();
    check_payload(payload, n)?;
    let mut data = Vec::with_capacity(n);
    for (offset, &value) in payload.iter().enumerate() {
        match value {
            0 => data.push(0),
            255 => data.push(1),
            _ => return Err(Error::NotBinary { offset, value }),
        }
    }
    Ok(BinaryMask::from_raw(width, height, data))
}

/// Encodes a mask as canonical binary PGM.
pub fn write_mask_pgm(mask: &BinaryMask) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", mask.width, mask.height).into_bytes();
    out.extend(mask.data.iter().map(|&v| if v == 1 { 255u8 } else { 0 }));
    out
}

fn encode_pfm(width: usize, height: usize, data: &[f64]) -> Vec<u8> {
    let mut out = format!("Pf\n{width} {height}\n-1.0\n").into_bytes();
    out.reserve(data.len() * 4);
    for row in data.chunks_exact(width).rev() {
        for &v in row {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    out
}

fn decode_pfm(bytes: &[u8]) -> Result<(usize, usize, Vec<f64>)> {
    if bytes.len() < 3 || &bytes[..2] != b"Pf" || !bytes[2].is_ascii_whitespace() {
        return Err(Error::NotPf);
    }
    let mut cur = HeaderCursor { bytes, pos: 3 };
    let width = cur.dimension("width")?;
    let height = cur.dimension("height")?;
    let scale_tok = cur.token("scale")?;
    let scale: f64 = scale_tok
        .parse()
        .map_err(|_| Error::BadHeader(format!("scale {scale_tok:?} is not a number")))?;
    if scale.is_nan() || scale >= 0.0 {
        return Err(Error::BadHeader(format!(
            "scale {scale_tok:?} is not negative; only little-endian PFM is supported"
        )));
    }
    let n = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(4).map(|b| (n, b)))
        .ok_or_else(|| Error::BadHeader("dimensions overflow".into()))?;
    let payload = cur.payload();
    check_payload(payload, n.1)?;
    let mut data = vec![0.0; n.0];
    for (file_row, chunk) in payload.chunks_exact(width * 4).enumerate() {
        let y = height - 1 - file_row;
        for (x, b) in chunk.chunks_exact(4).enumerate() {
            data[y * width + x] = f64::from(f32::from_le_bytes([b[0], b[1], b[2], b[3]]));
        }
    }
    Ok((width, height, data))
}

fn clamp_unit(data: &mut [f64]) -> Result<()> {
    let lo = -PFM_RANGE_TOLERANCE;
    let hi = 1.0 + PFM_RANGE_TOLERANCE;
    for (offset, v) in data.iter_mut().enumerate() {
        if !(lo..=hi).contains(v) {
            return Err(Error::OutOfRange { offset, value: *v });
        }
        *v = v.clamp(0.0, 1.0);
    }
    Ok(())
}

/// Decodes a grayscale PFM into a probability map.
pub fn read_pfm(bytes: &[u8]) -> Result<ProbMap> {
    let (w, h, mut data) = decode_pfm(bytes)?;
    clamp_unit(&mut data)?;
    Ok(ProbMap::from_raw(w, h, data))
}

/// Encodes a probability map as PFM, truncating samples to 32-bit floats.
pub fn write_pfm(map: &ProbMap) -> Vec<u8> {
    encode_pfm(map.width, map.height, &map.data)
}

/// Same as [`read_pfm`], for image intensities.
pub fn read_gray_pfm(bytes: &[u8]) -> Result<GrayImage> {
    let (w, h, mut data) = decode_pfm(bytes)?;
    clamp_unit(&mut data)?;
    Ok(GrayImage {
        width: w,
        height: h,
        data,
    })
}

pub fn write_gray_pfm(image: &GrayImage) -> Vec<u8> {
    encode_pfm(image.width, image.height, &image.data)
}
