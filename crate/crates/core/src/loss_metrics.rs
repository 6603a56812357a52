//! Soft Dice loss and its gradient, the boundary-penalty loss, and per-image
//! DSC / precision / recall.

use std::fmt::Write as _;

use crate::error::{check_shape, Error, Result};
use crate::raster::{BinaryMask, DistanceMap, ProbMap};

/// Default smoothing constant added to both Dice numerator and denominator.
pub const DEFAULT_EPS: f64 = 1e-6;

/// Binarization threshold for predictions (`>=` goes to foreground).
pub const DEFAULT_THRESHOLD: f64 = 0.5;

struct DiceSums {
    intersection: f64,
    pred: f64,
    target: f64,
}

fn dice_sums(pred: &[f64], target: &[f64]) -> DiceSums {
    let mut s = DiceSums {
        intersection: 0.0,
        pred: 0.0,
        target: 0.0,
    };
    for (&p, &g) in pred.iter().zip(target) {
        s.intersection += p * g;
        s.pred += p;
        s.target += g;
    }
    s
}

/// `1 - (2 Σ p g + eps) / (Σ p + Σ g + eps)` over raw slices of equal length.
pub fn soft_dice_loss_slice(pred: &[f64], target: &[f64], eps: f64) -> f64 {
    let s = dice_sums(pred, target);
    1.0 - (2.0 * s.intersection + eps) / (s.pred + s.target + eps)
}

/// Writes `∂L/∂pᵢ` into `grad` and returns the loss.
pub fn soft_dice_grad_slice(pred: &[f64], target: &[f64], eps: f64, grad: &mut [f64]) -> f64 {
    let s = dice_sums(pred, target);
    let num = 2.0 * s.intersection + eps;
    let den = s.pred + s.target + eps;
    let den2 = den * den;
    for (gi, &t) in grad.iter_mut().zip(target) {
        *gi = -(2.0 * t * den - num) / den2;
    }
    1.0 - num / den
}

pub fn soft_dice_loss(pred: &ProbMap, target: &ProbMap, eps: f64) -> Result<f64> {
    check_shape(pred.dims(), target.dims())?;
    Ok(soft_dice_loss_slice(pred.as_slice(), target.as_slice(), eps))
}

/// Per-pixel gradient of [`soft_dice_loss`] with respect to the prediction.
pub fn soft_dice_grad(pred: &ProbMap, target: &ProbMap, eps: f64) -> Result<Vec<f64>> {
    check_shape(pred.dims(), target.dims())?;
    let mut grad = vec![0.0; pred.len()];
    soft_dice_grad_slice(pred.as_slice(), target.as_slice(), eps, &mut grad);
    Ok(grad)
}

/// `base + lambda * mean(sdm · pred)`, where `base` is the caller's Dice loss.
pub fn boundary_penalty_loss(pred: &ProbMap, sdm: &DistanceMap, lambda: f64, base: f64) -> Result<f64> {
    check_shape(pred.dims(), sdm.dims())?;
    if lambda.is_nan() || lambda < 0.0 {
        return Err(Error::ConstraintViolation(format!(
            "lambda must be non-negative, got {lambda}"
        )));
    }
    let dot: f64 = pred.as_slice().iter().zip(sdm.as_slice()).map(|(p, d)| p * d).sum();
    Ok(base + lambda * dot / pred.len() as f64)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionCounts {
    pub fn from_masks(pred: &BinaryMask, gt: &BinaryMask) -> Result<Self> {
        check_shape(pred.dims(), gt.dims())?;
        let mut c = Self::default();
        for (&p, &g) in pred.as_slice().iter().zip(gt.as_slice()) {
            match (p, g) {
                (1, 1) => c.tp += 1,
                (1, 0) => c.fp += 1,
                (0, 1) => c.fn_ += 1,
                _ => c.tn += 1,
            }
        }
        Ok(c)
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// DSC, precision and recall; a zero denominator yields 1.0 and sets the
    /// returned flag.
    pub fn scores(&self) -> (f64, f64, f64, bool) {
        let mut degenerate = false;
        let mut ratio = |num: u64, den: u64| {
            if den == 0 {
                degenerate = true;
                1.0
            } else {
                num as f64 / den as f64
            }
        };
        let dsc = ratio(2 * self.tp, 2 * self.tp + self.fp + self.fn_);
        let precision = ratio(self.tp, self.tp + self.fp);
        let recall = ratio(self.tp, self.tp + self.fn_);
        (dsc, precision, recall, degenerate)
    }
}

/// Metrics for one image (or the mean over several).
#[derive(Clone, Debug, PartialEq)]
pub struct MetricRecord {
    pub image_id: String,
    pub dsc: f64,
    pub precision: f64,
    pub recall: f64,
    /// Set when some metric had a zero denominator and was defined as 1.0.
    pub degenerate: bool,
}

impl MetricRecord {
    pub fn from_counts(image_id: impl Into<String>, counts: &ConfusionCounts) -> Self {
        let (dsc, precision, recall, degenerate) = counts.scores();
        Self {
            image_id: image_id.into(),
            dsc,
            precision,
            recall,
            degenerate,
        }
    }
}

/// Thresholds `pred` and scores it against `gt`.
pub fn evaluate_image(
    image_id: impl Into<String>,
    pred: &ProbMap,
    gt: &BinaryMask,
    threshold: f64,
) -> Result<MetricRecord> {
    check_shape(pred.dims(), gt.dims())?;
    let counts = ConfusionCounts::from_masks(&pred.threshold(threshold), gt)?;
    Ok(MetricRecord::from_counts(image_id, &counts))
}

/// Unweighted mean of every metric, accumulated in list order. The result is
/// labelled `mean` and flagged degenerate if any input was.
pub fn aggregate(records: &[MetricRecord]) -> Result<MetricRecord> {
    if records.is_empty() {
        return Err(Error::EmptyList);
    }
    let n = records.len() as f64;
    let (mut dsc, mut precision, mut recall) = (0.0, 0.0, 0.0);
    for r in records {
        dsc += r.dsc;
        precision += r.precision;
        recall += r.recall;
    }
    Ok(MetricRecord {
        image_id: "mean".into(),
        dsc: dsc / n,
        precision: precision / n,
        recall: recall / n,
        degenerate: records.iter().any(|r| r.degenerate),
    })
}

pub const METRICS_CSV_HEADER: &str = "image_id,dsc,precision,recall,degenerate_flag";

/// Renders records with the `image_id,dsc,precision,recall,degenerate_flag` schema.
pub fn metrics_csv(records: &[MetricRecord]) -> String {
    let mut out = String::from(METRICS_CSV_HEADER);
    out.push('\n');
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.image_id,
            r.dsc,
            r.precision,
            r.recall,
            u8::from(r.degenerate)
        )
        .expect("writing to a String cannot fail");
    }
    out
}
