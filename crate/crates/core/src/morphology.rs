//! Binary dilation and erosion with flat structuring elements.
//!
//! Dilation treats pixels outside the frame as background and erosion treats
//! them as foreground, so the frame itself never creates or removes an edge.

use std::fmt;
use std::ops::Range;

use crate::error::{Error, Result};
use crate::raster::BinaryMask;

/// A flat structuring element: a point-symmetric set of `(dx, dy)` offsets
/// containing the origin.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructuringElement {
    offsets: Vec<(isize, isize)>,
}

impl StructuringElement {
    /// Validates and normalizes an offset set (sorted, deduplicated).
    pub fn from_offsets(offsets: impl IntoIterator<Item = (isize, isize)>) -> Result<Self> {
        let mut offsets: Vec<_> = offsets.into_iter().collect();
        offsets.sort_unstable();
        offsets.dedup();
        if offsets.binary_search(&(0, 0)).is_err() {
            return Err(Error::ConstraintViolation(
                "structuring element must contain the origin".into(),
            ));
        }
        if let Some(&(dx, dy)) = offsets
            .iter()
            .find(|&&(dx, dy)| offsets.binary_search(&(-dx, -dy)).is_err())
        {
            return Err(Error::ConstraintViolation(format!(
                "structuring element is not point-symmetric: ({dx}, {dy}) has no mirror"
            )));
        }
        // Point symmetry plus the origin already forces odd bounding-box sides.
        Ok(Self { offsets })
    }

    /// All offsets with `|dx|, |dy| <= (k - 1) / 2`; `k` must be odd.
    pub fn square(k: usize) -> Result<Self> {
        let r = odd_radius(k)?;
        Self::from_offsets((-r..=r).flat_map(|dy| (-r..=r).map(move |dx| (dx, dy))))
    }

    /// The plus-shaped element of side `k` (odd).
    pub fn cross(k: usize) -> Result<Self> {
        let r = odd_radius(k)?;
        Self::from_offsets(
            (-r..=r)
                .map(|d| (d, 0))
                .chain((-r..=r).filter(|&d| d != 0).map(|d| (0, d))),
        )
    }

    pub fn offsets(&self) -> &[(isize, isize)] {
        &self.offsets
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    /// Half-extent of the bounding box along each axis.
    pub fn radius(&self) -> (usize, usize) {
        let rx = self.offsets.iter().map(|o| o.0.unsigned_abs()).max().unwrap_or(0);
        let ry = self.offsets.iter().map(|o| o.1.unsigned_abs()).max().unwrap_or(0);
        (rx, ry)
    }
}

impl Default for StructuringElement {
    fn default() -> Self {
        Self::square(3).expect("3 is odd")
    }
}

fn odd_radius(k: usize) -> Result<isize> {
    if k.is_multiple_of(2) {
        return Err(Error::ConstraintViolation(format!(
            "structuring element side must be odd, got {k}"
        )));
    }
    Ok((k / 2) as isize)
}

/// Named elements accepted on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, clap::ValueEnum)]
pub enum NamedElement {
    #[default]
    Square3,
    Cross3,
    Square5,
}

impl NamedElement {
    pub fn build(self) -> StructuringElement {
        match self {
            Self::Square3 => StructuringElement::square(3),
            Self::Cross3 => StructuringElement::cross(3),
            Self::Square5 => StructuringElement::square(5),
        }
        .expect("built-in sides are odd")
    }
}

impl fmt::Display for NamedElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Square3 => "square3",
            Self::Cross3 => "cross3",
            Self::Square5 => "square5",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MorphOp {
    Dilate,
    Erode,
}

/// A binary mask packed 64 pixels per word, one padded run of words per
/// row. Pixel `x` is bit `x % 64` of word `x / 64`; bits past the width are
/// kept clear.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct BitMask {
    width: usize,
    height: usize,
    words_per_row: usize,
    words: Vec<u64>,
}

impl BitMask {
    pub(crate) fn from_mask(mask: &BinaryMask) -> Self {
        let (width, height) = mask.dims();
        let words_per_row = width.div_ceil(64);
        let mut words = vec![0u64; words_per_row * height];
        for (row, bits) in mask
            .as_slice()
            .chunks_exact(width)
            .zip(words.chunks_exact_mut(words_per_row))
        {
            for (chunk, word) in row.chunks(64).zip(bits.iter_mut()) {
                *word = pack_word(chunk);
            }
        }
        Self {
            width,
            height,
            words_per_row,
            words,
        }
    }

    pub(crate) fn to_mask(&self) -> BinaryMask {
        let mut data = vec![0u8; self.width * self.height];
        for (row, bits) in data
            .chunks_exact_mut(self.width)
            .zip(self.words.chunks_exact(self.words_per_row))
        {
            for (k, out) in row.chunks_mut(8).enumerate() {
                let byte = (bits[k / 8] >> (8 * (k % 8))) as u8;
                out.copy_from_slice(&SPREAD[byte as usize].to_le_bytes()[..out.len()]);
            }
        }
        BinaryMask::from_raw(self.width, self.height, data)
    }

    pub(crate) fn row(&self, y: usize) -> &[u64] {
        &self.words[y * self.words_per_row..][..self.words_per_row]
    }

    /// Mask of the valid bits in the last word of a row.
    fn tail_mask(&self) -> u64 {
        match self.width % 64 {
            0 => !0,
            r => (1u64 << r) - 1,
        }
    }

    /// Folds every shifted copy of `self` into a new mask with `combine`.
    /// Pixels read from outside the frame take the value `fill` (0 or !0),
    /// and copies shifted entirely out of the frame are skipped, which is
    /// equivalent as long as `fill` is the identity of `combine`.
    fn fold_shifts(&self, se: &StructuringElement, sign: isize, fill: u64, combine: impl Fn(u64, u64) -> u64) -> Self {
        let n = self.words_per_row;
        let total = self.words.len();
        let mut out = vec![fill; total];
        let mut shifted = vec![0u64; total];
        let mut shifted_by = None;
        // Offsets are sorted by dx, so each horizontal shift is built once.
        for &(dx, dy) in se.offsets() {
            // Output (x, y) reads source (x - sx, y - sy).
            let (sx, sy) = (sign * dx, sign * dy);
            if sx.unsigned_abs() >= self.width || sy.unsigned_abs() >= self.height {
                continue;
            }
            if shifted_by != Some(sx) {
                self.shift_rows(sx, fill, &mut shifted);
                shifted_by = Some(sx);
            }
            let skip = sy.unsigned_abs() * n;
            let (dst, src) = if sy >= 0 {
                (&mut out[skip..], &shifted[..total - skip])
            } else {
                (&mut out[..total - skip], &shifted[skip..])
            };
            for (o, &v) in dst.iter_mut().zip(src) {
                *o = combine(*o, v);
            }
        }
        let tail = self.tail_mask();
        for row in out.chunks_exact_mut(n) {
            row[n - 1] &= tail;
        }
        Self {
            width: self.width,
            height: self.height,
            words_per_row: n,
            words: out,
        }
    }

    /// Writes every row shifted by `shift` pixels (toward larger `x` when
    /// positive) into `out`, with `fill` entering at the edge. Padding bits
    /// of `out` are left unspecified.
    fn shift_rows(&self, shift: isize, fill: u64, out: &mut [u64]) {
        // Shift the whole buffer as one bit stream, then overwrite the pixels
        // that crossed a row boundary.
        let words = &self.words;
        let total = words.len() as isize;
        let word_shift = shift.div_euclid(64);
        let bit_shift = shift.rem_euclid(64) as u32;
        let at = |j: isize| {
            if (0..total).contains(&j) {
                words[j as usize]
            } else {
                fill
            }
        };
        if bit_shift == 0 {
            for (i, o) in out.iter_mut().enumerate() {
                *o = at(i as isize - word_shift);
            }
        } else {
            for (i, o) in out.iter_mut().enumerate() {
                let j = i as isize - word_shift;
                *o = (at(j) << bit_shift) | (at(j - 1) >> (64 - bit_shift));
            }
        }
        let edge = if shift >= 0 {
            0..shift as usize
        } else {
            self.width - shift.unsigned_abs()..self.width
        };
        for row in out.chunks_exact_mut(self.words_per_row) {
            fill_bits(row, edge.clone(), fill);
        }
    }

    pub(crate) fn dilate(&self, se: &StructuringElement) -> Self {
        self.fold_shifts(se, 1, 0, |a, b| a | b)
    }

    pub(crate) fn erode(&self, se: &StructuringElement) -> Self {
        self.fold_shifts(se, -1, !0, |a, b| a & b)
    }

    pub(crate) fn iterate(&self, op: MorphOp, se: &StructuringElement, n: usize) -> Self {
        let mut cur = self.clone();
        for _ in 0..n {
            cur = match op {
                MorphOp::Dilate => cur.dilate(se),
                MorphOp::Erode => cur.erode(se),
            };
        }
        cur
    }
}

/// `SPREAD[b]` holds bit `i` of `b` in byte `i`, so its little-endian bytes
/// are the eight 0/1 pixels encoded by `b`.
pub(crate) const SPREAD: [u64; 256] = {
    let mut table = [0u64; 256];
    let mut b = 0;
    while b < 256 {
        let mut i = 0;
        while i < 8 {
            table[b] |= (((b >> i) & 1) as u64) << (8 * i);
            i += 1;
        }
        b += 1;
    }
    table
};

/// Packs eight little-endian 0/1 bytes into one byte, first byte lowest.
fn pack8(bytes: [u8; 8]) -> u64 {
    // Each byte's low bit lands on bit 56 + i of the product without carries.
    u64::from_le_bytes(bytes).wrapping_mul(0x0102_0408_1020_4080) >> 56
}

/// Packs up to 64 0/1 bytes into a word, first byte in the lowest bit.
fn pack_word(bytes: &[u8]) -> u64 {
    let mut groups = bytes.chunks_exact(8);
    let mut word = 0;
    for (k, group) in (&mut groups).enumerate() {
        word |= pack8(group.try_into().expect("chunk of 8")) << (8 * k);
    }
    let rest = groups.remainder();
    if !rest.is_empty() {
        let mut group = [0u8; 8];
        group[..rest.len()].copy_from_slice(rest);
        word |= pack8(group) << (8 * (bytes.len() / 8));
    }
    word
}

/// Sets the bits in `range` of a multi-word row to those of `fill`.
fn fill_bits(row: &mut [u64], range: Range<usize>, fill: u64) {
    if range.is_empty() {
        return;
    }
    let first = range.start / 64;
    for (i, word) in row.iter_mut().enumerate().take((range.end - 1) / 64 + 1).skip(first) {
        let lo = range.start.max(64 * i) - 64 * i;
        let hi = range.end.min(64 * i + 64) - 64 * i;
        let mask = if hi - lo == 64 {
            !0
        } else {
            ((1u64 << (hi - lo)) - 1) << lo
        };
        *word = (*word & !mask) | (fill & mask);
    }
}

/// Flat dilation: `out(x, y) = max over (i, j) in se of in(x - i, y - j)`,
/// background outside the frame.
pub fn dilate(mask: &BinaryMask, se: &StructuringElement) -> BinaryMask {
    BitMask::from_mask(mask).dilate(se).to_mask()
}

/// Flat erosion: `out(x, y) = min over (i, j) in se of in(x + i, y + j)`,
/// foreground outside the frame.
pub fn erode(mask: &BinaryMask, se: &StructuringElement) -> BinaryMask {
    BitMask::from_mask(mask).erode(se).to_mask()
}

/// Applies `op` `n` times; `n == 0` returns a copy of the input.
pub fn iterate(op: MorphOp, mask: &BinaryMask, se: &StructuringElement, n: usize) -> BinaryMask {
    BitMask::from_mask(mask).iterate(op, se, n).to_mask()
}
