//! A linear-logistic pixel classifier trained with full-batch gradient
//! descent on the soft Dice loss against transformed targets.
//!
//! Each pixel is described by four features: a constant 1, its intensity,
//! the 3x3 box mean, and the central-difference gradient magnitude (both
//! with edge-replicate padding). The prediction is `logistic(w · f)`.

use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loss_metrics::{
    aggregate, evaluate_image, soft_dice_grad_slice, MetricRecord, DEFAULT_EPS, DEFAULT_THRESHOLD,
};
use crate::morphology::StructuringElement;
use crate::raster::{GrayImage, ProbMap};
use crate::synthesis::{corrupt, generate, Corruption, Dataset, SynthConfig};
use crate::transforms::{signed_distance_map, Transform};

pub const NUM_FEATURES: usize = 4;

/// Default weight of the distance penalty term.
pub const DEFAULT_DPT_LAMBDA: f64 = 0.01;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PixelModel {
    pub weights: [f64; NUM_FEATURES],
}

impl PixelModel {
    pub fn zeros() -> Self {
        Self::default()
    }

    fn probability(&self, f: &[f64; NUM_FEATURES]) -> f64 {
        let z = self.weights[0] * f[0] + self.weights[1] * f[1] + self.weights[2] * f[2] + self.weights[3] * f[3];
        logistic(z)
    }
}

fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Per-pixel feature vectors of one image.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureField {
    width: usize,
    height: usize,
    data: Vec<[f64; NUM_FEATURES]>,
}

impl FeatureField {
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn as_slice(&self) -> &[[f64; NUM_FEATURES]] {
        &self.data
    }
}

pub fn extract_features(image: &GrayImage) -> FeatureField {
    let (w, h) = image.dims();
    let px = image.as_slice();
    let at = |x: isize, y: isize| {
        let x = x.clamp(0, w as isize - 1) as usize;
        let y = y.clamp(0, h as isize - 1) as usize;
        px[y * w + x]
    };
    let mut data = Vec::with_capacity(w * h);
    for y in 0..h as isize {
        for x in 0..w as isize {
            let mut sum = 0.0;
            for dy in -1..=1 {
                for dx in -1..=1 {
                    sum += at(x + dx, y + dy);
                }
            }
            let gx = (at(x + 1, y) - at(x - 1, y)) / 2.0;
            let gy = (at(x, y + 1) - at(x, y - 1)) / 2.0;
            data.push([1.0, at(x, y), sum / 9.0, (gx * gx + gy * gy).sqrt()]);
        }
    }
    FeatureField {
        width: w,
        height: h,
        data,
    }
}

pub fn predict_features(model: &PixelModel, features: &FeatureField) -> ProbMap {
    let data = features.data.iter().map(|f| model.probability(f)).collect();
    ProbMap::from_raw(features.width, features.height, data)
}

pub fn predict(model: &PixelModel, image: &GrayImage) -> ProbMap {
    predict_features(model, &extract_features(image))
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub eps: f64,
    pub transform: Transform,
    /// Recorded for provenance; training itself is deterministic (zero
    /// initialisation, full batch).
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 300,
            learning_rate: 2.0,
            eps: DEFAULT_EPS,
            transform: Transform::None,
            seed: 42,
        }
    }
}

/// One training image with precomputed features and its target.
#[derive(Clone, Debug)]
pub struct TrainItem {
    pub features: FeatureField,
    pub target: Vec<f64>,
    /// Signed distance map, present only for the distance-penalty transform
    /// on non-degenerate masks.
    pub sdm: Option<Vec<f64>>,
}

/// Applies the transform to every mask and extracts features.
pub fn prepare(dataset: &Dataset, transform: &Transform) -> Result<Vec<TrainItem>> {
    dataset
        .items
        .iter()
        .map(|s| {
            let target = transform.target(&s.mask)?.into_vec();
            let sdm = match transform {
                Transform::DistancePenalty { .. } => signed_distance_map(&s.mask).ok().map(|d| d.into_vec()),
                _ => None,
            };
            Ok(TrainItem {
                features: extract_features(&s.image),
                target,
                sdm,
            })
        })
        .collect()
}

/// Mean training loss over `items` and its gradient with respect to the
/// model weights.
pub fn objective(model: &PixelModel, items: &[TrainItem], eps: f64, lambda: f64) -> (f64, [f64; NUM_FEATURES]) {
    let mut loss = 0.0;
    let mut grad = [0.0; NUM_FEATURES];
    let mut pred = Vec::new();
    let mut dl_dp = Vec::new();
    for item in items {
        let n = item.target.len();
        pred.clear();
        pred.extend(item.features.data.iter().map(|f| model.probability(f)));
        dl_dp.resize(n, 0.0);
        loss += soft_dice_grad_slice(&pred, &item.target, eps, &mut dl_dp);
        if let Some(sdm) = &item.sdm {
            let scale = lambda / n as f64;
            let mut dot = 0.0;
            for i in 0..n {
                dot += sdm[i] * pred[i];
                dl_dp[i] += scale * sdm[i];
            }
            loss += scale * dot;
        }
        for ((f, &p), &g) in item.features.data.iter().zip(&pred).zip(&dl_dp) {
            let dz = g * p * (1.0 - p);
            for k in 0..NUM_FEATURES {
                grad[k] += dz * f[k];
            }
        }
    }
    let m = items.len() as f64;
    (loss / m, grad.map(|g| g / m))
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainOutcome {
    pub model: PixelModel,
    /// Loss evaluated at the start of each epoch.
    pub history: Vec<f64>,
}

pub fn train(dataset: &Dataset, config: &TrainConfig) -> Result<TrainOutcome> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if config.learning_rate.is_nan() || config.learning_rate <= 0.0 {
        return Err(Error::ConstraintViolation(format!(
            "learning rate must be positive, got {}",
            config.learning_rate
        )));
    }
    let items = prepare(dataset, &config.transform)?;
    Ok(train_prepared(&items, config))
}

/// Gradient descent from zero weights on already prepared items.
pub fn train_prepared(items: &[TrainItem], config: &TrainConfig) -> TrainOutcome {
    let lambda = match config.transform {
        Transform::DistancePenalty { lambda } => lambda,
        _ => 0.0,
    };
    let mut model = PixelModel::zeros();
    let mut history = Vec::with_capacity(config.epochs);
    for _ in 0..config.epochs {
        let (loss, grad) = objective(&model, items, config.eps, lambda);
        history.push(loss);
        for (w, g) in model.weights.iter_mut().zip(grad) {
            *w -= config.learning_rate * g;
        }
    }
    TrainOutcome { model, history }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, clap::ValueEnum)]
pub enum Scenario {
    Clean,
    Under,
    Over,
}

impl Scenario {
    fn corruption(self) -> Option<Corruption> {
        match self {
            Scenario::Clean => None,
            Scenario::Under => Some(Corruption::Under),
            Scenario::Over => Some(Corruption::Over),
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scenario::Clean => "clean",
            Scenario::Under => "under",
            Scenario::Over => "over",
        })
    }
}

/// Everything about an experiment except the scenario, transform and seeds.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    /// Data template; its seed is replaced by each experiment seed.
    pub synth: SynthConfig,
    pub train_fraction: f64,
    pub corrupt_k: usize,
    pub corrupt_se: StructuringElement,
    pub epochs: usize,
    pub learning_rate: f64,
    pub eps: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let train = TrainConfig::default();
        Self {
            synth: SynthConfig::default(),
            train_fraction: 0.8,
            corrupt_k: 2,
            corrupt_se: StructuringElement::default(),
            epochs: train.epochs,
            learning_rate: train.learning_rate,
            eps: train.eps,
        }
    }
}

/// One CSV row: a single seed, or the mean over seeds when `seed` is `None`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentRow {
    pub scenario: Scenario,
    pub transform: String,
    pub seed: Option<u64>,
    pub metrics: MetricRecord,
}

/// Trains on (possibly corrupted) training labels and evaluates on clean
/// test labels, once per seed. Returns one row per seed followed by the mean.
pub fn run_experiment(
    scenario: Scenario,
    transform: &Transform,
    seeds: &[u64],
    config: &ExperimentConfig,
) -> Result<Vec<ExperimentRow>> {
    if seeds.is_empty() {
        return Err(Error::EmptyList);
    }
    let mut rows = Vec::with_capacity(seeds.len() + 1);
    for &seed in seeds {
        let data = generate(&SynthConfig {
            seed,
            ..config.synth.clone()
        })?;
        let n_train = (data.len() as f64 * config.train_fraction).round() as usize;
        let (mut train_set, test_set) = data.split_at(n_train);
        if let Some(kind) = scenario.corruption() {
            for s in &mut train_set.items {
                s.mask = corrupt(&s.mask, kind, config.corrupt_k, &config.corrupt_se)?;
            }
        }
        let outcome = train(
            &train_set,
            &TrainConfig {
                epochs: config.epochs,
                learning_rate: config.learning_rate,
                eps: config.eps,
                transform: transform.clone(),
                seed,
            },
        )?;
        let records = test_set
            .items
            .iter()
            .map(|s| evaluate_image(&s.id, &predict(&outcome.model, &s.image), &s.mask, DEFAULT_THRESHOLD))
            .collect::<Result<Vec<_>>>()?;
        let mut metrics = aggregate(&records)?;
        metrics.image_id = seed.to_string();
        rows.push(ExperimentRow {
            scenario,
            transform: transform.name().into(),
            seed: Some(seed),
            metrics,
        });
    }
    let per_seed: Vec<MetricRecord> = rows.iter().map(|r| r.metrics.clone()).collect();
    rows.push(ExperimentRow {
        scenario,
        transform: transform.name().into(),
        seed: None,
        metrics: aggregate(&per_seed)?,
    });
    Ok(rows)
}

pub const EXPERIMENT_CSV_HEADER: &str = "scenario,transform,seed,dsc,precision,recall";

pub fn experiment_csv(rows: &[ExperimentRow]) -> String {
    let mut out = String::from(EXPERIMENT_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let seed = r.seed.map_or_else(|| "mean".to_string(), |s| s.to_string());
        writeln!(
            out,
            "{},{},{seed},{},{},{}",
            r.scenario, r.transform, r.metrics.dsc, r.metrics.precision, r.metrics.recall
        )
        .expect("String write");
    }
    out
}
