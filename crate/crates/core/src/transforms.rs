//! Ground-truth transformations: global soft labels, boundary uncertainty,
//! and the signed distance map behind the distance-penalty baseline.

use std::fmt;

use crate::error::{Error, Result};
use crate::morphology::{BitMask, MorphOp, StructuringElement, SPREAD};
use crate::raster::{mask_to_prob, BinaryMask, DistanceMap, ProbMap};

/// Tolerance on `alpha + beta == 1` for the balanced mode.
pub const BALANCE_TOLERANCE: f64 = 1e-12;

fn check_probability(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::ConstraintViolation(format!(
            "{name} must lie in [0, 1], got {v}"
        )))
    }
}

/// Replaces every foreground label with `p_fg` and every background label
/// with `p_bg`.
pub fn soft_label(mask: &BinaryMask, p_fg: f64, p_bg: f64) -> Result<ProbMap> {
    check_probability("p_fg", p_fg)?;
    check_probability("p_bg", p_bg)?;
    if p_bg > p_fg {
        return Err(Error::ConstraintViolation(format!(
            "background label {p_bg} exceeds foreground label {p_fg}"
        )));
    }
    let lut = [p_bg, p_fg];
    let data = mask.as_slice().iter().map(|&v| lut[v as usize]).collect();
    Ok(ProbMap::from_raw(mask.width(), mask.height(), data))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, clap::ValueEnum)]
pub enum BuMode {
    /// `alpha + beta = 1`, `alpha >= beta`.
    #[default]
    Balanced,
    /// `0 <= alpha + beta <= 2`.
    Unbalanced,
}

/// Parameters of the boundary-uncertainty transform.
///
/// `alpha` labels the band just inside the object boundary (pixels removed by
/// erosion) and `beta` the band just outside it (pixels added by dilation).
/// With `alpha = 1, beta = 0` the transform is the identity on hard labels;
/// `alpha = beta = 1` reproduces dilation and `alpha = beta = 0` erosion.
#[derive(Clone, Debug, PartialEq)]
pub struct BuParams {
    alpha: f64,
    beta: f64,
    n_iter: usize,
    se: StructuringElement,
    mode: BuMode,
}

impl BuParams {
    pub fn new(alpha: f64, beta: f64, n_iter: usize, se: StructuringElement, mode: BuMode) -> Result<Self> {
        check_probability("alpha", alpha)?;
        check_probability("beta", beta)?;
        if n_iter == 0 {
            return Err(Error::ConstraintViolation("iterations must be at least 1".into()));
        }
        match mode {
            BuMode::Balanced => {
                if (alpha + beta - 1.0).abs() > BALANCE_TOLERANCE {
                    return Err(Error::ConstraintViolation(format!(
                        "balanced requires alpha+beta=1, got {alpha}+{beta}={}",
                        alpha + beta
                    )));
                }
                if alpha < beta {
                    return Err(Error::ConstraintViolation(format!(
                        "balanced requires alpha>=beta, got alpha={alpha} beta={beta}"
                    )));
                }
            }
            BuMode::Unbalanced => {
                let s = alpha + beta;
                if !(0.0..=2.0).contains(&s) {
                    return Err(Error::ConstraintViolation(format!(
                        "unbalanced requires 0<=alpha+beta<=2, got {s}"
                    )));
                }
            }
        }
        Ok(Self {
            alpha,
            beta,
            n_iter,
            se,
            mode,
        })
    }

    /// Balanced parameters on the default 3x3 square with one iteration.
    pub fn balanced(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(alpha, beta, 1, StructuringElement::default(), BuMode::Balanced)
    }

    /// Unbalanced parameters on the default 3x3 square.
    pub fn unbalanced(alpha: f64, beta: f64, n_iter: usize) -> Result<Self> {
        Self::new(alpha, beta, n_iter, StructuringElement::default(), BuMode::Unbalanced)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn n_iter(&self) -> usize {
        self.n_iter
    }

    pub fn se(&self) -> &StructuringElement {
        &self.se
    }

    pub fn mode(&self) -> BuMode {
        self.mode
    }
}

/// Boundary-uncertainty soft target.
///
/// With `D` the `n`-fold dilation and `E` the `n`-fold erosion of `mask`:
/// pixels in `E` map to 1, `mask \ E` to `alpha`, `D \ mask` to `beta`, and
/// everything outside `D` to 0.
pub fn boundary_uncertainty(mask: &BinaryMask, params: &BuParams) -> ProbMap {
    let (w, h) = mask.dims();
    let bits = BitMask::from_mask(mask);
    let dilated = bits.iterate(MorphOp::Dilate, &params.se, params.n_iter);
    let eroded = bits.iterate(MorphOp::Erode, &params.se, params.n_iter);
    // E ⊆ mask ⊆ D, so `2 * mask + (D ^ mask ^ E)` is the number of those
    // sets containing a pixel: 0 outside D, 1 in D \ mask, 2 in mask \ E,
    // 3 in E.
    let lut = [0.0, params.beta, params.alpha, 1.0];
    let mut data = Vec::with_capacity(w * h);
    let mut levels = vec![0u8; w.next_multiple_of(8)];
    for y in 0..h {
        let (d, m, e) = (dilated.row(y), bits.row(y), eroded.row(y));
        for (k, chunk) in levels.chunks_exact_mut(8).enumerate() {
            let (i, shift) = (k / 8, 8 * (k % 8));
            let hi = (m[i] >> shift) as u8;
            let lo = ((d[i] ^ m[i] ^ e[i]) >> shift) as u8;
            chunk.copy_from_slice(&(2 * SPREAD[hi as usize] + SPREAD[lo as usize]).to_le_bytes());
        }
        data.extend(levels[..w].iter().map(|&level| lut[level as usize]));
    }
    ProbMap::from_raw(w, h, data)
}

/// Squared distance transform of a sampled 1D function via the lower
/// envelope of parabolas. Entries of `f` equal to `INFINITY` are not sites.
/// `v` and `z` are scratch buffers of at least `f.len()` and `f.len() + 1`.
fn squared_dt_1d(f: &[f64], out: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let mut k: isize = -1;
    for q in 0..n {
        if f[q] == f64::INFINITY {
            continue;
        }
        let fq = f[q] + (q * q) as f64;
        loop {
            if k < 0 {
                k = 0;
                v[0] = q;
                z[0] = f64::NEG_INFINITY;
                z[1] = f64::INFINITY;
                break;
            }
            let p = v[k as usize];
            let s = (fq - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
            if s <= z[k as usize] {
                k -= 1;
                continue;
            }
            k += 1;
            v[k as usize] = q;
            z[k as usize] = s;
            z[k as usize + 1] = f64::INFINITY;
            break;
        }
    }
    if k < 0 {
        out.fill(f64::INFINITY);
        return;
    }
    let mut k = 0usize;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let d = q as f64 - v[k] as f64;
        *o = d * d + f[v[k]];
    }
}

/// Exact squared Euclidean distance to the nearest set pixel.
fn squared_edt(mask: &BinaryMask) -> Vec<f64> {
    let (w, h) = mask.dims();
    let n = w.max(h);
    let mut v = vec![0usize; n];
    let mut z = vec![0.0; n + 1];
    let mut f = vec![0.0; n];
    let mut g = vec![0.0; n];

    let mut grid: Vec<f64> = mask
        .as_slice()
        .iter()
        .map(|&m| if m == 1 { 0.0 } else { f64::INFINITY })
        .collect();

    for x in 0..w {
        for y in 0..h {
            f[y] = grid[y * w + x];
        }
        squared_dt_1d(&f[..h], &mut g[..h], &mut v, &mut z);
        for y in 0..h {
            grid[y * w + x] = g[y];
        }
    }
    for row in grid.chunks_exact_mut(w) {
        f[..w].copy_from_slice(row);
        squared_dt_1d(&f[..w], row, &mut v, &mut z);
    }
    grid
}

/// Exact Euclidean distance from each pixel centre to the nearest foreground
/// pixel centre (0 on foreground).
pub fn edt(mask: &BinaryMask) -> Result<DistanceMap> {
    if mask.count_ones() == 0 {
        return Err(Error::EmptyMask);
    }
    let data = squared_edt(mask).into_iter().map(f64::sqrt).collect();
    Ok(DistanceMap::from_raw(mask.width(), mask.height(), data))
}

/// Pixels having at least one 4-neighbour of the opposite class.
pub fn boundary_set(mask: &BinaryMask) -> BinaryMask {
    let (w, h) = mask.dims();
    let m = mask.as_slice();
    let mut out = vec![0u8; w * h];
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let here = m[i];
            let differs = (x > 0 && m[i - 1] != here)
                || (x + 1 < w && m[i + 1] != here)
                || (y > 0 && m[i - w] != here)
                || (y + 1 < h && m[i + w] != here);
            out[i] = u8::from(differs);
        }
    }
    BinaryMask::from_raw(w, h, out)
}

/// Signed Euclidean distance to the boundary set: negative inside the
/// target, positive outside, zero on the boundary pixels themselves.
pub fn signed_distance_map(mask: &BinaryMask) -> Result<DistanceMap> {
    let ones = mask.count_ones();
    if ones == 0 || ones == mask.len() {
        return Err(Error::DegenerateMask);
    }
    let boundary = boundary_set(mask);
    let dist = edt(&boundary)?;
    let data = dist
        .into_vec()
        .into_iter()
        .zip(mask.as_slice())
        .map(|(d, &m)| if m == 1 && d > 0.0 { -d } else { d })
        .collect();
    Ok(DistanceMap::from_raw(mask.width(), mask.height(), data))
}

/// Distance-penalty target: the untouched hard labels plus their signed
/// distance map, consumed together by the boundary-penalty loss.
pub fn dpt_transform(mask: &BinaryMask) -> Result<(ProbMap, DistanceMap)> {
    let sdm = signed_distance_map(mask)?;
    Ok((mask_to_prob(mask), sdm))
}

/// A ground-truth transformation as used for training targets.
#[derive(Clone, Debug, PartialEq)]
pub enum Transform {
    /// Hard labels.
    None,
    SoftLabel {
        p_fg: f64,
        p_bg: f64,
    },
    BoundaryUncertainty(BuParams),
    /// Hard labels plus a signed-distance penalty weighted by `lambda`.
    DistancePenalty {
        lambda: f64,
    },
}

impl Transform {
    /// Soft target for `mask`. The distance penalty leaves labels hard.
    pub fn target(&self, mask: &BinaryMask) -> Result<ProbMap> {
        match self {
            Transform::None | Transform::DistancePenalty { .. } => Ok(mask_to_prob(mask)),
            Transform::SoftLabel { p_fg, p_bg } => soft_label(mask, *p_fg, *p_bg),
            Transform::BoundaryUncertainty(p) => Ok(boundary_uncertainty(mask, p)),
        }
    }

    /// Short method name used in CSV output.
    pub fn name(&self) -> &'static str {
        match self {
            Transform::None => "none",
            Transform::SoftLabel { .. } => "sl",
            Transform::BoundaryUncertainty(_) => "bu",
            Transform::DistancePenalty { .. } => "dpt",
        }
    }
}

impl fmt::Display for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Transform::None => f.write_str("none"),
            Transform::SoftLabel { p_fg, p_bg } => write!(f, "sl(p_fg={p_fg}, p_bg={p_bg})"),
            Transform::BoundaryUncertainty(p) => write!(
                f,
                "bu(alpha={}, beta={}, n={}, {:?})",
                p.alpha, p.beta, p.n_iter, p.mode
            ),
            Transform::DistancePenalty { lambda } => write!(f, "dpt(lambda={lambda})"),
        }
    }
}
