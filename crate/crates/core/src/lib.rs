//! Boundary-aware soft labelling for binary segmentation targets.
//!
//! Boundary uncertainty softens a hard ground-truth mask only near the object
//! boundary: morphological erosion and dilation carve out a thin interior
//! band (labelled `alpha`) and exterior band (labelled `beta`), while every
//! other pixel keeps its hard label. The crate also carries the two
//! baselines it is compared against (global soft labels and a signed
//! distance penalty), the soft Dice loss with its analytic gradient,
//! per-image DSC / precision / recall, a seeded synthetic dataset generator
//! with a label-corruption protocol, and a small pixel classifier for
//! end-to-end experiments.
//!
//! ```
//! use boundary_uncertainty::{boundary_uncertainty, BinaryMask, BuParams};
//!
//! let mask = BinaryMask::from_fn(5, 5, |x, y| (1..=3).contains(&x) && (1..=3).contains(&y))?;
//! let target = boundary_uncertainty(&mask, &BuParams::balanced(0.9, 0.1)?);
//! assert_eq!(target.get(2, 2), 1.0); // deep interior
//! assert_eq!(target.get(1, 1), 0.9); // interior band
//! assert_eq!(target.get(0, 0), 0.1); // exterior band
//! # Ok::<(), boundary_uncertainty::Error>(())
//! ```

pub mod bench;
pub mod cli;
pub mod error;
pub mod files;
pub mod loss_metrics;
pub mod morphology;
#[doc(hidden)]
pub mod oracle;
pub mod raster;
pub mod synthesis;
pub mod trainer;
pub mod transforms;

pub use error::{Error, Result};
pub use loss_metrics::{
    aggregate, boundary_penalty_loss, evaluate_image, soft_dice_grad, soft_dice_loss, ConfusionCounts, MetricRecord,
};
pub use morphology::{dilate, erode, iterate, MorphOp, NamedElement, StructuringElement};
pub use raster::{
    mask_to_prob, read_mask_pgm, read_pfm, write_mask_pgm, write_pfm, BinaryMask, DistanceMap, GrayImage, ProbMap,
};
pub use synthesis::{corrupt, generate, Corruption, Dataset, Sample, SynthConfig};
pub use trainer::{
    extract_features, predict, run_experiment, train, ExperimentConfig, PixelModel, Scenario, TrainConfig,
};
pub use transforms::{
    boundary_uncertainty, dpt_transform, edt, signed_distance_map, soft_label, BuMode, BuParams, Transform,
};
