//! Acceptance criteria, run sequentially with one PASS/FAIL line each.
//!
//! `cargo test -p boundary-uncertainty --test acceptance`

use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use boundary_uncertainty::bench::{lookup, run_bench, Method};
use boundary_uncertainty::loss_metrics::{soft_dice_grad_slice, DEFAULT_EPS};
use boundary_uncertainty::oracle;
use boundary_uncertainty::trainer::{objective, prepare, ExperimentConfig, ExperimentRow};
use boundary_uncertainty::{
    boundary_uncertainty as bu, cli, dilate, edt, erode, iterate, mask_to_prob, run_experiment, signed_distance_map,
    BinaryMask, BuMode, BuParams, Dataset, GrayImage, MorphOp, PixelModel, Sample, Scenario, StructuringElement,
    Transform,
};

const SEEDS: [u64; 5] = [42, 43, 44, 45, 46];

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

/// Seeded random masks with varying density and aspect.
fn sweep_masks(count: u64, w: usize, h: usize) -> impl Iterator<Item = BinaryMask> {
    (0..count).map(move |i| {
        let density = 0.1 + 0.8 * ((i * 37) % 100) as f64 / 100.0;
        oracle::random_mask(w, h, density, 1_000 + i)
    })
}

fn elements() -> [(&'static str, StructuringElement); 2] {
    [
        ("square3", StructuringElement::square(3).unwrap()),
        ("cross3", StructuringElement::cross(3).unwrap()),
    ]
}

fn hard_label_degeneracy() -> Outcome {
    let mut cases = 0;
    for (i, m) in sweep_masks(500, 24, 20).enumerate() {
        for (name, se) in elements() {
            for n in [1, 2] {
                for mode in [BuMode::Balanced, BuMode::Unbalanced] {
                    let p = BuParams::new(1.0, 0.0, n, se.clone(), mode).unwrap();
                    if bu(&m, &p) != mask_to_prob(&m) {
                        return check(false, format!("mask {i}, {name}, n={n}, {mode:?}"));
                    }
                    cases += 1;
                }
            }
        }
    }
    check(true, format!("{cases} cases identical to hard labels"))
}

fn unbalanced_extremes() -> Outcome {
    let mut cases = 0;
    for (i, m) in sweep_masks(500, 24, 20).enumerate() {
        for (name, se) in elements() {
            for n in [1, 2] {
                let up = BuParams::new(1.0, 1.0, n, se.clone(), BuMode::Unbalanced).unwrap();
                let down = BuParams::new(0.0, 0.0, n, se.clone(), BuMode::Unbalanced).unwrap();
                // Reference via the brute-force morphology, composed n times.
                let (mut d, mut e) = (m.clone(), m.clone());
                for _ in 0..n {
                    d = oracle::dilate(&d, &se);
                    e = oracle::erode(&e, &se);
                }
                if bu(&m, &up) != mask_to_prob(&d) || bu(&m, &down) != mask_to_prob(&e) {
                    return check(false, format!("mask {i}, {name}, n={n}"));
                }
                cases += 1;
            }
        }
    }
    check(true, format!("{cases} cases equal dilation / erosion"))
}

fn morphology_oracle() -> Outcome {
    let ses = [
        ("square3", StructuringElement::square(3).unwrap()),
        ("cross3", StructuringElement::cross(3).unwrap()),
        ("square5", StructuringElement::square(5).unwrap()),
    ];
    for (i, m) in sweep_masks(500, 32, 32).enumerate() {
        for (name, se) in &ses {
            let d = dilate(&m, se);
            let e = erode(&m, se);
            if d != oracle::dilate(&m, se) || e != oracle::erode(&m, se) {
                return check(false, format!("oracle mismatch: mask {i}, {name}"));
            }
            if !m.is_subset_of(&d) || !e.is_subset_of(&m) {
                return check(false, format!("extensivity: mask {i}, {name}"));
            }
            if e != dilate(&m.complement(), se).complement() {
                return check(false, format!("duality: mask {i}, {name}"));
            }
        }
        let sq3 = &ses[0].1;
        if iterate(MorphOp::Erode, &m, sq3, 2) != oracle::erode(&m, &ses[2].1) {
            return check(false, format!("composition: mask {i}"));
        }
    }
    check(true, "500 masks x 3 elements exact, duality and extensivity hold")
}

fn edt_oracle() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut sdm_checked = 0;
    for (i, m) in sweep_masks(200, 24, 24).enumerate() {
        match (edt(&m), oracle::edt(&m)) {
            (Ok(fast), Some(slow)) => {
                for (a, b) in fast.as_slice().iter().zip(slow.as_slice()) {
                    worst = worst.max((a - b).abs());
                }
            }
            (Err(_), None) => {}
            _ => return check(false, format!("empty-mask disagreement at mask {i}")),
        }
        if let Ok(s) = signed_distance_map(&m) {
            let c = signed_distance_map(&m.complement()).unwrap();
            if s.as_slice().iter().zip(c.as_slice()).any(|(a, b)| *a != -*b) {
                return check(false, format!("antisymmetry fails at mask {i}"));
            }
            let slow = oracle::signed_distance_map(&m).unwrap();
            for (a, b) in s.as_slice().iter().zip(slow.as_slice()) {
                worst = worst.max((a - b).abs());
            }
            sdm_checked += 1;
        }
    }
    check(
        worst <= 1e-9,
        format!("max |edt - brute force| = {worst:.3e} (tol 1e-9); {sdm_checked} signed maps antisymmetric"),
    )
}

fn max_rel(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let scale = b.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1e-300);
    diff / scale
}

fn gradient_checks() -> Outcome {
    // Soft Dice: analytic vs central differences, per element (abs) and as a
    // max-norm relative error.
    let mut dice_abs: f64 = 0.0;
    let mut dice_rel: f64 = 0.0;
    for seed in 0..100 {
        let pred = oracle::random_prob(8, 8, seed);
        let target = oracle::random_prob(8, 8, 7_000 + seed);
        let mut grad = vec![0.0; 64];
        soft_dice_grad_slice(pred.as_slice(), target.as_slice(), DEFAULT_EPS, &mut grad);
        let fd = oracle::central_difference(
            |p| oracle::soft_dice_loss(p, target.as_slice(), DEFAULT_EPS),
            pred.as_slice(),
            1e-6,
        );
        for (a, b) in grad.iter().zip(&fd) {
            dice_abs = dice_abs.max((a - b).abs());
        }
        dice_rel = dice_rel.max(max_rel(&grad, &fd));
    }

    // End-to-end: loss w.r.t. the four model weights on random small images.
    let transforms = [
        Transform::None,
        Transform::SoftLabel { p_fg: 0.9, p_bg: 0.1 },
        Transform::BoundaryUncertainty(BuParams::balanced(0.8, 0.2).unwrap()),
        Transform::BoundaryUncertainty(BuParams::unbalanced(1.0, 1.0, 2).unwrap()),
        Transform::DistancePenalty { lambda: 0.3 },
    ];
    let mut model_rel: f64 = 0.0;
    for seed in 0..100u64 {
        let items: Vec<Sample> = (0..2)
            .map(|k| {
                let s = seed * 10 + k;
                let image = GrayImage::new(9, 7, oracle::random_prob(9, 7, s).into_vec()).unwrap();
                let mask = oracle::random_mask(9, 7, 0.45, s + 500);
                Sample {
                    id: k.to_string(),
                    image,
                    mask,
                }
            })
            .collect();
        let transform = &transforms[seed as usize % transforms.len()];
        let lambda = match transform {
            Transform::DistancePenalty { lambda } => *lambda,
            _ => 0.0,
        };
        let prepared = prepare(&Dataset { items }, transform).unwrap();
        let w = oracle::random_prob(4, 1, 9_000 + seed)
            .into_vec()
            .iter()
            .map(|v| 4.0 * v - 2.0)
            .collect::<Vec<_>>();
        let model = PixelModel {
            weights: [w[0], w[1], w[2], w[3]],
        };
        let (_, grad) = objective(&model, &prepared, DEFAULT_EPS, lambda);
        let fd = oracle::central_difference(
            |v| {
                objective(
                    &PixelModel {
                        weights: [v[0], v[1], v[2], v[3]],
                    },
                    &prepared,
                    DEFAULT_EPS,
                    lambda,
                )
                .0
            },
            &w,
            1e-6,
        );
        model_rel = model_rel.max(max_rel(&grad, &fd));
    }
    check(
        dice_abs < 1e-6 && dice_rel < 1e-6 && model_rel < 1e-5,
        format!("dice max abs {dice_abs:.2e}, rel {dice_rel:.2e} (tol 1e-6); trainer rel {model_rel:.2e} (tol 1e-5)"),
    )
}

fn mean_row(rows: &[ExperimentRow]) -> &ExperimentRow {
    rows.iter().find(|r| r.seed.is_none()).expect("mean row present")
}

fn robustness_and_comparison() -> (Outcome, Outcome) {
    let cfg = ExperimentConfig::default();
    let run = |s: Scenario, t: &Transform| run_experiment(s, t, &SEEDS, &cfg).unwrap();

    let under_none = run(Scenario::Under, &Transform::None);
    let under_bu = run(
        Scenario::Under,
        &Transform::BoundaryUncertainty(BuParams::unbalanced(1.0, 1.0, 2).unwrap()),
    );
    let over_none = run(Scenario::Over, &Transform::None);
    let over_bu = run(
        Scenario::Over,
        &Transform::BoundaryUncertainty(BuParams::unbalanced(0.0, 0.0, 2).unwrap()),
    );
    let (un, ub) = (&mean_row(&under_none).metrics, &mean_row(&under_bu).metrics);
    let (on, ob) = (&mean_row(&over_none).metrics, &mean_row(&over_bu).metrics);
    let robust = check(
        ub.dsc > un.dsc && ob.precision > on.precision,
        format!(
            "under DSC: bu {:.4} vs none {:.4}; over precision: bu {:.4} vs none {:.4}",
            ub.dsc, un.dsc, ob.precision, on.precision
        ),
    );

    let clean_bu = run(
        Scenario::Clean,
        &Transform::BoundaryUncertainty(BuParams::balanced(0.9, 0.1).unwrap()),
    );
    let clean_sl = run(Scenario::Clean, &Transform::SoftLabel { p_fg: 0.9, p_bg: 0.1 });
    let (cb, cs) = (&mean_row(&clean_bu).metrics, &mean_row(&clean_sl).metrics);
    let compare = check(
        cb.dsc >= cs.dsc - 0.01,
        format!("clean DSC: bu {:.4} vs sl {:.4} (band 0.01)", cb.dsc, cs.dsc),
    );
    (robust, compare)
}

fn efficiency_ordering() -> Outcome {
    let sizes = [128, 256, 512];
    let mut notes = Vec::new();
    let mut pass = true;
    for run in 0..3 {
        let recs = run_bench(&sizes, 30, 42 + run).unwrap();
        for &size in &sizes {
            let sl = lookup(&recs, Method::Sl, size).unwrap() as f64;
            let b = lookup(&recs, Method::Bu, size).unwrap() as f64;
            let dpt = lookup(&recs, Method::Dpt, size).unwrap() as f64;
            if size >= 256 && b >= dpt {
                pass = false;
            }
            let ratio = (b / sl).max(sl / b);
            if ratio > 5.0 {
                pass = false;
            }
            if run == 0 {
                notes.push(format!("{size}: sl {sl:.0}ns bu {b:.0}ns dpt {dpt:.0}ns"));
            }
        }
    }
    check(pass, notes.join("; "))
}

fn golden_files() -> Outcome {
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/synth_seed42");
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("synth");
    let code = cli::run([
        "bu",
        "synth",
        "--seed",
        "42",
        "--count",
        "3",
        "--size",
        "32",
        "--out",
        out.to_str().unwrap(),
    ]);
    if code != 0 {
        return check(false, format!("synth exited with {code}"));
    }
    let mut names: Vec<String> = std::fs::read_dir(&golden)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    let mut produced: Vec<String> = std::fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    produced.sort();
    if names != produced {
        return check(false, format!("file sets differ: {names:?} vs {produced:?}"));
    }
    for name in &names {
        if std::fs::read(golden.join(name)).unwrap() != std::fs::read(out.join(name)).unwrap() {
            return check(false, format!("{name} differs"));
        }
    }
    check(true, format!("{} files byte-identical", names.len()))
}

fn main() -> ExitCode {
    type Criterion = (&'static str, Duration, fn() -> Outcome);
    let criteria: [Criterion; 6] = [
        (
            "1 hard-label degeneracy",
            Duration::from_secs(10),
            hard_label_degeneracy,
        ),
        ("2 unbalanced extremes", Duration::from_secs(10), unbalanced_extremes),
        ("3 morphology oracle", Duration::from_secs(20), morphology_oracle),
        ("4 edt oracle", Duration::from_secs(30), edt_oracle),
        ("5 gradient checks", Duration::from_secs(30), gradient_checks),
        ("9 golden files", Duration::from_secs(5), golden_files),
    ];

    let mut failures = 0;
    let mut report = |name: &str, budget: Duration, elapsed: Duration, o: Outcome| {
        let ok = o.pass && elapsed <= budget;
        if !ok {
            failures += 1;
        }
        println!(
            "[{}] criterion {name}: {} ({:.2}s, budget {}s)",
            if ok { "PASS" } else { "FAIL" },
            o.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    };

    for (name, budget, f) in criteria {
        let start = Instant::now();
        let o = f();
        report(name, budget, start.elapsed(), o);
    }

    // 6 and 7 share one training budget.
    let start = Instant::now();
    let (robust, compare) = robustness_and_comparison();
    let elapsed = start.elapsed();
    report("6 robustness trend", Duration::from_secs(300), elapsed, robust);
    report("7 transform comparison", Duration::from_secs(300), elapsed, compare);

    let start = Instant::now();
    let o = efficiency_ordering();
    report("8 efficiency ordering", Duration::from_secs(120), start.elapsed(), o);

    if failures == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failures} criteria failed");
        ExitCode::FAILURE
    }
}
