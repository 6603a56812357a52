//! Brute-force reference implementations used by the test suites.
//!
//! Nothing here shares code with the production paths it is compared
//! against. Everything is quadratic or worse; keep inputs small.

use crate::morphology::StructuringElement;
use crate::raster::{BinaryMask, DistanceMap, ProbMap};

fn sample(mask: &BinaryMask, x: isize, y: isize, outside: u8) -> u8 {
    if x < 0 || y < 0 || x >= mask.width() as isize || y >= mask.height() as isize {
        outside
    } else {
        mask.get(x as usize, y as usize)
    }
}

/// Sliding-window maximum, background outside the frame.
pub fn dilate(mask: &BinaryMask, se: &StructuringElement) -> BinaryMask {
    BinaryMask::from_fn(mask.width(), mask.height(), |x, y| {
        let mut best = 0;
        for &(i, j) in se.offsets() {
            best = best.max(sample(mask, x as isize - i, y as isize - j, 0));
        }
        best == 1
    })
    .unwrap()
}

/// Sliding-window minimum, foreground outside the frame.
pub fn erode(mask: &BinaryMask, se: &StructuringElement) -> BinaryMask {
    BinaryMask::from_fn(mask.width(), mask.height(), |x, y| {
        let mut worst = 1;
        for &(i, j) in se.offsets() {
            worst = worst.min(sample(mask, x as isize + i, y as isize + j, 1));
        }
        worst == 1
    })
    .unwrap()
}

/// Distance from every pixel to the nearest set pixel by exhaustive search.
/// Returns `None` when no pixel is set.
pub fn edt(mask: &BinaryMask) -> Option<DistanceMap> {
    let (w, h) = mask.dims();
    let sites: Vec<(f64, f64)> = (0..h)
        .flat_map(|y| (0..w).map(move |x| (x, y)))
        .filter(|&(x, y)| mask.is_set(x, y))
        .map(|(x, y)| (x as f64, y as f64))
        .collect();
    if sites.is_empty() {
        return None;
    }
    let mut data = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let best = sites
                .iter()
                .map(|&(sx, sy)| (sx - x as f64).powi(2) + (sy - y as f64).powi(2))
                .fold(f64::INFINITY, f64::min);
            data.push(best.sqrt());
        }
    }
    Some(DistanceMap::new(w, h, data).unwrap())
}

/// Pixels with a 4-neighbor of the other class.
pub fn boundary_set(mask: &BinaryMask) -> BinaryMask {
    let (w, h) = mask.dims();
    BinaryMask::from_fn(w, h, |x, y| {
        let here = mask.get(x, y);
        [(-1isize, 0isize), (1, 0), (0, -1), (0, 1)].iter().any(|&(dx, dy)| {
            let (nx, ny) = (x as isize + dx, y as isize + dy);
            nx >= 0 && ny >= 0 && nx < w as isize && ny < h as isize && mask.get(nx as usize, ny as usize) != here
        })
    })
    .unwrap()
}

/// Signed distance to the boundary set: negative inside, positive outside.
pub fn signed_distance_map(mask: &BinaryMask) -> Option<DistanceMap> {
    let dist = edt(&boundary_set(mask))?;
    let data = dist
        .as_slice()
        .iter()
        .zip(mask.as_slice())
        .map(|(&d, &m)| if m == 1 { -d } else { d })
        .map(|v| if v == 0.0 { 0.0 } else { v })
        .collect();
    Some(DistanceMap::new(mask.width(), mask.height(), data).unwrap())
}

/// Soft Dice loss with plain index-order accumulation.
pub fn soft_dice_loss(pred: &[f64], target: &[f64], eps: f64) -> f64 {
    let mut inter = 0.0;
    let mut sp = 0.0;
    let mut sg = 0.0;
    for i in 0..pred.len() {
        inter += pred[i] * target[i];
        sp += pred[i];
        sg += target[i];
    }
    1.0 - (2.0 * inter + eps) / (sp + sg + eps)
}

/// Central finite-difference gradient of `f` at `x` with step `h`.
pub fn central_difference(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + h;
            let up = f(&probe);
            probe[i] = x[i] - h;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Per-pixel 3x3 mean with edge-replicate padding, computed directly.
pub fn box_mean(data: &[f64], w: usize, h: usize) -> Vec<f64> {
    let clampi = |v: isize, n: usize| v.clamp(0, n as isize - 1) as usize;
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let mut s = 0.0;
            for dy in -1..=1isize {
                for dx in -1..=1isize {
                    s += data[clampi(y as isize + dy, h) * w + clampi(x as isize + dx, w)];
                }
            }
            out.push(s / 9.0);
        }
    }
    out
}

/// Logistic of `w · f` evaluated one pixel at a time.
pub fn logistic_pixel(weights: &[f64; 4], features: &[f64; 4]) -> f64 {
    let z: f64 = weights.iter().zip(features).map(|(a, b)| a * b).sum();
    1.0 / (1.0 + (-z).exp())
}

/// Uniform random mask from a small xorshift stream.
pub fn random_mask(w: usize, h: usize, density: f64, seed: u64) -> BinaryMask {
    let mut s = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
    BinaryMask::from_fn(w, h, |_, _| {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        (s >> 11) as f64 / (1u64 << 53) as f64 > 1.0 - density
    })
    .unwrap()
}

/// Random probability map from the same xorshift stream.
pub fn random_prob(w: usize, h: usize, seed: u64) -> ProbMap {
    let mut s = seed.wrapping_mul(0xD1B5_4A32_D192_ED03) | 1;
    let data = (0..w * h)
        .map(|_| {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s >> 11) as f64 / (1u64 << 53) as f64
        })
        .collect();
    ProbMap::new(w, h, data).unwrap()
}
