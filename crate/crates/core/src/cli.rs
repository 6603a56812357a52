//! The `bu` command line.
//!
//! Exit codes: 0 on success, 2 for bad flags or violated constraints, 3 for
//! I/O and file-format errors. Every output file is written atomically.

use std::ffi::OsString;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bench::{bench_csv, run_bench};
use crate::error::{Error, Result};
use crate::files::write_atomic;
use crate::loss_metrics::{aggregate, evaluate_image, metrics_csv, DEFAULT_EPS, DEFAULT_THRESHOLD};
use crate::morphology::NamedElement;
use crate::raster::{read_mask_pgm, read_pfm, write_pfm, DistanceMap, ProbMap};
use crate::synthesis::{corrupt, generate, read_dataset, write_dataset, SynthConfig};
use crate::trainer::{
    experiment_csv, predict, run_experiment, train, ExperimentConfig, Scenario, TrainConfig, DEFAULT_DPT_LAMBDA,
};
use crate::transforms::{boundary_uncertainty, dpt_transform, soft_label, BuMode, BuParams, Transform};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "bu", version, about = "Boundary-aware soft labels for binary segmentation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Transform a PGM mask into a PFM training target.
    Transform(TransformCmd),
    /// Generate a synthetic dataset.
    Synth(SynthCmd),
    /// Train the pixel classifier on a manifest.
    Train(TrainCmd),
    /// Score PFM predictions against PGM ground truths.
    Eval(EvalCmd),
    /// Time the three transformations per image.
    Bench(BenchCmd),
    /// Run a robustness experiment over several seeds.
    Experiment(ExperimentCmd),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Sl,
    Bu,
    Dpt,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TransformArg {
    None,
    Sl,
    Bu,
    Dpt,
}

/// Parameters shared by every command that builds a transform.
///
/// Boundary uncertainty assigns `--alpha` to the band just inside the object
/// boundary and `--beta` to the band just outside it. `--alpha 1 --beta 0`
/// leaves hard labels unchanged; `--alpha 1 --beta 1` equals dilation and
/// `--alpha 0 --beta 0` erosion (both need `--mode unbalanced`).
#[derive(Debug, Clone, Args)]
pub struct TransformParams {
    /// Soft-label value for foreground pixels.
    #[arg(long, default_value_t = 0.9)]
    pub pfg: f64,
    /// Soft-label value for background pixels.
    #[arg(long, default_value_t = 0.1)]
    pub pbg: f64,
    /// Boundary uncertainty: value of the interior band.
    #[arg(long, default_value_t = 0.9)]
    pub alpha: f64,
    /// Boundary uncertainty: value of the exterior band.
    #[arg(long, default_value_t = 0.1)]
    pub beta: f64,
    /// Boundary uncertainty: morphological iterations.
    #[arg(long, default_value_t = 1)]
    pub iters: usize,
    #[arg(long, value_enum, default_value_t = NamedElement::Square3)]
    pub se: NamedElement,
    #[arg(long, value_enum, default_value_t = BuMode::Balanced)]
    pub mode: BuMode,
    /// Distance penalty weight.
    #[arg(long, default_value_t = DEFAULT_DPT_LAMBDA)]
    pub lambda: f64,
}

impl TransformParams {
    pub fn bu_params(&self) -> Result<BuParams> {
        BuParams::new(self.alpha, self.beta, self.iters, self.se.build(), self.mode)
    }

    pub fn build(&self, kind: TransformArg) -> Result<Transform> {
        Ok(match kind {
            TransformArg::None => Transform::None,
            TransformArg::Sl => {
                // Validate eagerly so bad values fail before any work is done.
                soft_label(&crate::raster::BinaryMask::filled(1, 1, 0)?, self.pfg, self.pbg)?;
                Transform::SoftLabel {
                    p_fg: self.pfg,
                    p_bg: self.pbg,
                }
            }
            TransformArg::Bu => Transform::BoundaryUncertainty(self.bu_params()?),
            TransformArg::Dpt => {
                if self.lambda.is_nan() || self.lambda < 0.0 {
                    return Err(Error::ConstraintViolation(format!(
                        "lambda must be non-negative, got {}",
                        self.lambda
                    )));
                }
                Transform::DistancePenalty { lambda: self.lambda }
            }
        })
    }
}

#[derive(Debug, Args)]
pub struct TransformCmd {
    #[arg(long, value_enum)]
    pub method: MethodArg,
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub params: TransformParams,
}

#[derive(Debug, Args)]
pub struct SynthCmd {
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 50)]
    pub count: usize,
    /// Image side length in pixels.
    #[arg(long, default_value_t = 64)]
    pub size: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainCmd {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long, value_enum, default_value_t = TransformArg::None)]
    pub transform: TransformArg,
    #[command(flatten)]
    pub params: TransformParams,
    #[arg(long, default_value_t = TrainConfig::default().epochs)]
    pub epochs: usize,
    #[arg(long, default_value_t = TrainConfig::default().learning_rate)]
    pub lr: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Corruption applied to the manifest's labels before training.
    #[arg(long, value_enum, default_value_t = Scenario::Clean)]
    pub scenario: Scenario,
    #[arg(long, default_value_t = 2)]
    pub corrupt_k: usize,
    /// Model file (JSON).
    #[arg(long)]
    pub out: PathBuf,
    /// Also write `pred_<id>.pfm` for every manifest item here.
    #[arg(long)]
    pub pred_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalCmd {
    #[arg(long)]
    pub pred_dir: PathBuf,
    #[arg(long)]
    pub gt_dir: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchCmd {
    #[arg(long, value_delimiter = ',', default_value = "128,256,512")]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 30)]
    pub reps: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExperimentCmd {
    #[arg(long, value_enum)]
    pub scenario: Scenario,
    #[arg(long, value_enum, default_value_t = TransformArg::None)]
    pub transform: TransformArg,
    #[command(flatten)]
    pub params: TransformParams,
    #[arg(long, value_delimiter = ',', default_value = "42,43,44,45,46")]
    pub seeds: Vec<u64>,
    #[arg(long, default_value_t = ExperimentConfig::default().epochs)]
    pub epochs: usize,
    #[arg(long, default_value_t = ExperimentConfig::default().learning_rate)]
    pub lr: f64,
    #[arg(long, default_value_t = 2)]
    pub corrupt_k: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Affine map used to store a signed distance map as a `[0, 1]` PFM:
/// `stored = (sdm - min) / (max - min)`, or 0 everywhere when `max == min`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct SdmScaling {
    pub min: f64,
    pub max: f64,
}

impl SdmScaling {
    pub fn encode(sdm: &DistanceMap) -> (ProbMap, Self) {
        let (min, max) = (sdm.min(), sdm.max());
        let range = max - min;
        let data = sdm
            .as_slice()
            .iter()
            .map(|&v| {
                if range > 0.0 {
                    ((v - min) / range).clamp(0.0, 1.0)
                } else {
                    0.0
                }
            })
            .collect();
        let map = ProbMap::new(sdm.width(), sdm.height(), data).expect("values clamped to [0, 1]");
        (map, Self { min, max })
    }

    pub fn decode(&self, stored: f64) -> f64 {
        self.min + stored * (self.max - self.min)
    }
}

/// `target.pfm` → `target.sdm.pfm` / `target.sdm.json`.
pub fn sidecar_paths(out: &Path) -> (PathBuf, PathBuf) {
    let stem = if out.extension().is_some_and(|e| e == "pfm") {
        out.with_extension("")
    } else {
        out.to_path_buf()
    };
    let base = stem.into_os_string();
    let mut pfm = base.clone();
    pfm.push(".sdm.pfm");
    let mut json = base;
    json.push(".sdm.json");
    (pfm.into(), json.into())
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::ConstraintViolation(_)
        | Error::ConfigInvalid(_)
        | Error::EmptyMask
        | Error::DegenerateMask
        | Error::EmptyList
        | Error::EmptyDataset => EXIT_USAGE,
        Error::NotP5
        | Error::NotPf
        | Error::BadHeader(_)
        | Error::NotBinary { .. }
        | Error::OutOfRange { .. }
        | Error::InvalidGrid(_)
        | Error::ShapeMismatch { .. }
        | Error::Io(_) => EXIT_IO,
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

pub fn cmd_transform(cmd: &TransformCmd) -> Result<()> {
    let target = match cmd.method {
        MethodArg::Sl => {
            let mask = read_mask_pgm(&read_file(&cmd.input)?)?;
            soft_label(&mask, cmd.params.pfg, cmd.params.pbg)?
        }
        MethodArg::Bu => {
            let params = cmd.params.bu_params()?;
            let mask = read_mask_pgm(&read_file(&cmd.input)?)?;
            boundary_uncertainty(&mask, &params)
        }
        MethodArg::Dpt => {
            let mask = read_mask_pgm(&read_file(&cmd.input)?)?;
            let (labels, sdm) = dpt_transform(&mask)?;
            let (stored, scaling) = SdmScaling::encode(&sdm);
            let (sdm_pfm, sdm_json) = sidecar_paths(&cmd.out);
            write_atomic(&sdm_pfm, &write_pfm(&stored))?;
            let json = serde_json::to_string_pretty(&scaling).expect("plain struct serializes");
            write_atomic(&sdm_json, json.as_bytes())?;
            labels
        }
    };
    write_atomic(&cmd.out, &write_pfm(&target))
}

pub fn cmd_synth(cmd: &SynthCmd) -> Result<()> {
    let ds = generate(&SynthConfig {
        seed: cmd.seed,
        count: cmd.count,
        width: cmd.size,
        height: cmd.size,
        ..SynthConfig::default()
    })?;
    write_dataset(&ds, &cmd.out)
}

pub fn cmd_train(cmd: &TrainCmd) -> Result<()> {
    let transform = cmd.params.build(cmd.transform)?;
    let mut ds = read_dataset(&cmd.manifest)?;
    let se = cmd.params.se.build();
    let kind = match cmd.scenario {
        Scenario::Clean => None,
        Scenario::Under => Some(crate::synthesis::Corruption::Under),
        Scenario::Over => Some(crate::synthesis::Corruption::Over),
    };
    if let Some(kind) = kind {
        for s in &mut ds.items {
            s.mask = corrupt(&s.mask, kind, cmd.corrupt_k, &se)?;
        }
    }
    let model = train(
        &ds,
        &TrainConfig {
            epochs: cmd.epochs,
            learning_rate: cmd.lr,
            eps: DEFAULT_EPS,
            transform,
            seed: cmd.seed,
        },
    )?
    .model;
    let json = serde_json::to_string_pretty(&model).expect("plain struct serializes");
    write_atomic(&cmd.out, json.as_bytes())?;
    if let Some(dir) = &cmd.pred_dir {
        std::fs::create_dir_all(dir)?;
        for s in &ds.items {
            let pred = predict(&model, &s.image);
            write_atomic(&dir.join(format!("pred_{}.pfm", s.id)), &write_pfm(&pred))?;
        }
    }
    Ok(())
}

/// Scores `pred_<id>.pfm` against every `gt_<id>.pgm`, in id order, and
/// appends the mean row.
pub fn cmd_eval(cmd: &EvalCmd) -> Result<()> {
    let mut ids: Vec<String> = std::fs::read_dir(&cmd.gt_dir)?
        .filter_map(|e| e.ok())
        .filter_map(|e| {
            let name = e.file_name().into_string().ok()?;
            Some(name.strip_prefix("gt_")?.strip_suffix(".pgm")?.to_string())
        })
        .collect();
    ids.sort();
    if ids.is_empty() {
        return Err(Error::EmptyList);
    }
    let mut records = Vec::with_capacity(ids.len() + 1);
    for id in &ids {
        let gt = read_mask_pgm(&read_file(&cmd.gt_dir.join(format!("gt_{id}.pgm")))?)?;
        let pred = read_pfm(&read_file(&cmd.pred_dir.join(format!("pred_{id}.pfm")))?)?;
        records.push(evaluate_image(id.as_str(), &pred, &gt, DEFAULT_THRESHOLD)?);
    }
    let mean = aggregate(&records)?;
    records.push(mean);
    write_atomic(&cmd.out, metrics_csv(&records).as_bytes())
}

pub fn cmd_bench(cmd: &BenchCmd) -> Result<()> {
    let records = run_bench(&cmd.sizes, cmd.reps, cmd.seed)?;
    emit(cmd.out.as_deref(), &bench_csv(&records))
}

pub fn cmd_experiment(cmd: &ExperimentCmd) -> Result<()> {
    let transform = cmd.params.build(cmd.transform)?;
    let config = ExperimentConfig {
        corrupt_k: cmd.corrupt_k,
        corrupt_se: cmd.params.se.build(),
        epochs: cmd.epochs,
        learning_rate: cmd.lr,
        ..ExperimentConfig::default()
    };
    let rows = run_experiment(cmd.scenario, &transform, &cmd.seeds, &config)?;
    emit(cmd.out.as_deref(), &experiment_csv(&rows))
}

pub fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Transform(c) => cmd_transform(c),
        Command::Synth(c) => cmd_synth(c),
        Command::Train(c) => cmd_train(c),
        Command::Eval(c) => cmd_eval(c),
        Command::Bench(c) => cmd_bench(c),
        Command::Experiment(c) => cmd_experiment(c),
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code. Errors are reported on stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
