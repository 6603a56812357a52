use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use boundary_uncertainty::cli::SdmScaling;
use boundary_uncertainty::{read_pfm, signed_distance_map, write_mask_pgm, write_pfm, BinaryMask, ProbMap};
use tempfile::TempDir;

fn bu(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bu"))
        .args(args)
        .output()
        .expect("spawn bu")
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

fn ring_mask() -> BinaryMask {
    BinaryMask::from_fn(9, 7, |x, y| {
        (2..=6).contains(&x) && (1..=5).contains(&y) && (x, y) != (4, 3)
    })
    .unwrap()
}

fn write_mask(dir: &Path, name: &str, mask: &BinaryMask) -> String {
    let p = dir.join(name);
    fs::write(&p, write_mask_pgm(mask)).unwrap();
    path_str(&p).to_owned()
}

fn read_map(p: &Path) -> ProbMap {
    read_pfm(&fs::read(p).unwrap()).unwrap()
}

#[test]
fn bu_with_hard_parameters_reproduces_the_mask() {
    let dir = TempDir::new().unwrap();
    let mask = ring_mask();
    let input = write_mask(dir.path(), "m.pgm", &mask);
    let out = dir.path().join("t.pfm");
    let o = bu(&[
        "transform",
        "--method",
        "bu",
        "--in",
        &input,
        "--out",
        path_str(&out),
        "--alpha",
        "1",
        "--beta",
        "0",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let t = read_map(&out);
    let expected: Vec<f64> = mask.as_slice().iter().map(|&v| f64::from(v)).collect();
    assert_eq!(t.as_slice(), expected.as_slice());
}

#[test]
fn soft_labels_take_exactly_two_values() {
    let dir = TempDir::new().unwrap();
    let mask = ring_mask();
    let input = write_mask(dir.path(), "m.pgm", &mask);
    let out = dir.path().join("t.pfm");
    let o = bu(&[
        "transform",
        "--method",
        "sl",
        "--in",
        &input,
        "--out",
        path_str(&out),
        "--pfg",
        "0.9",
        "--pbg",
        "0.1",
    ]);
    assert!(o.status.success());
    for (&p, &m) in read_map(&out).as_slice().iter().zip(mask.as_slice()) {
        // PFM stores single precision.
        let expected = if m == 1 { 0.9f32 } else { 0.1f32 };
        assert_eq!(p, f64::from(expected));
    }
}

#[test]
fn unbalanced_parameters_in_balanced_mode_are_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let input = write_mask(dir.path(), "m.pgm", &ring_mask());
    let out = dir.path().join("t.pfm");
    let o = bu(&[
        "transform",
        "--method",
        "bu",
        "--in",
        &input,
        "--out",
        path_str(&out),
        "--alpha",
        "0.8",
        "--beta",
        "0.3",
        "--mode",
        "balanced",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("balanced requires alpha+beta=1"));
    assert!(!out.exists());

    let o = bu(&[
        "transform",
        "--method",
        "bu",
        "--in",
        &input,
        "--out",
        path_str(&out),
        "--alpha",
        "0.8",
        "--beta",
        "0.3",
        "--mode",
        "unbalanced",
    ]);
    assert!(o.status.success());
}

#[test]
fn missing_and_malformed_inputs() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("t.pfm");
    let missing = dir.path().join("absent.pgm");
    let o = bu(&[
        "transform",
        "--method",
        "sl",
        "--in",
        path_str(&missing),
        "--out",
        path_str(&out),
    ]);
    assert_eq!(o.status.code(), Some(3));

    let bad = dir.path().join("bad.pgm");
    fs::write(&bad, b"P2\n1 1\n255\n0").unwrap();
    let o = bu(&[
        "transform",
        "--method",
        "sl",
        "--in",
        path_str(&bad),
        "--out",
        path_str(&out),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(!out.exists());

    assert_eq!(bu(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(bu(&["bench", "--sizes", "16", "--reps", "5"]).status.code(), Some(2));
}

#[test]
fn dpt_writes_labels_and_a_rescalable_distance_map() {
    let dir = TempDir::new().unwrap();
    let mask = ring_mask();
    let input = write_mask(dir.path(), "m.pgm", &mask);
    let out = dir.path().join("target.pfm");
    let o = bu(&["transform", "--method", "dpt", "--in", &input, "--out", path_str(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let labels = read_map(&out);
    assert!(labels
        .as_slice()
        .iter()
        .zip(mask.as_slice())
        .all(|(&p, &m)| p == f64::from(m)));

    let stored = read_map(&dir.path().join("target.sdm.pfm"));
    let scaling: SdmScaling = serde_json::from_slice(&fs::read(dir.path().join("target.sdm.json")).unwrap()).unwrap();
    let sdm = signed_distance_map(&mask).unwrap();
    assert_eq!(scaling.min, sdm.min());
    assert_eq!(scaling.max, sdm.max());
    for (&s, &d) in stored.as_slice().iter().zip(sdm.as_slice()) {
        let restored = scaling.min + s * (scaling.max - scaling.min);
        assert!((restored - d).abs() < 1e-5, "{restored} vs {d}");
    }

    // An all-background mask has no boundary.
    let empty = write_mask(dir.path(), "e.pgm", &BinaryMask::filled(4, 4, 0).unwrap());
    let o = bu(&["transform", "--method", "dpt", "--in", &empty, "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn transform_is_repeatable_byte_for_byte() {
    let dir = TempDir::new().unwrap();
    let input = write_mask(dir.path(), "m.pgm", &ring_mask());
    let a = dir.path().join("a.pfm");
    let b = dir.path().join("b.pfm");
    for out in [&a, &b] {
        let o = bu(&[
            "transform",
            "--method",
            "bu",
            "--in",
            &input,
            "--out",
            path_str(out),
            "--iters",
            "2",
            "--se",
            "cross3",
        ]);
        assert!(o.status.success());
    }
    assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());
}

#[test]
fn synth_is_deterministic_and_matches_golden_files() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let o = bu(&[
            "synth",
            "--seed",
            "42",
            "--count",
            "3",
            "--size",
            "32",
            "--out",
            path_str(out),
        ]);
        assert!(o.status.success());
    }
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/synth_seed42");
    let mut names: Vec<_> = fs::read_dir(&golden).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 7);
    for name in names {
        let g = fs::read(golden.join(&name)).unwrap();
        assert_eq!(fs::read(a.join(&name)).unwrap(), g, "{name:?}");
        assert_eq!(fs::read(b.join(&name)).unwrap(), g, "{name:?}");
    }
}

#[test]
fn eval_of_perfect_predictions_scores_one() {
    let dir = TempDir::new().unwrap();
    let data = dir.path().join("data");
    let preds = dir.path().join("preds");
    fs::create_dir(&preds).unwrap();
    assert!(bu(&["synth", "--count", "4", "--size", "24", "--out", path_str(&data)])
        .status
        .success());
    for id in ["0000", "0001", "0002", "0003"] {
        let mask = boundary_uncertainty::read_mask_pgm(&fs::read(data.join(format!("gt_{id}.pgm"))).unwrap()).unwrap();
        let prob = boundary_uncertainty::mask_to_prob(&mask);
        fs::write(preds.join(format!("pred_{id}.pfm")), write_pfm(&prob)).unwrap();
    }
    let csv = dir.path().join("metrics.csv");
    let o = bu(&[
        "eval",
        "--pred-dir",
        path_str(&preds),
        "--gt-dir",
        path_str(&data),
        "--out",
        path_str(&csv),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "image_id,dsc,precision,recall,degenerate_flag");
    assert_eq!(lines.len(), 6);
    assert!(lines[5].starts_with("mean,"));
    for line in &lines[1..] {
        let fields: Vec<&str> = line.split(',').collect();
        for v in &fields[1..4] {
            assert_eq!(v.parse::<f64>().unwrap(), 1.0, "{line}");
        }
    }
}

#[test]
fn train_with_zero_epochs_saves_the_zero_model() {
    let dir = TempDir::new().unwrap();
    let data = dir.path().join("data");
    assert!(bu(&["synth", "--count", "3", "--size", "16", "--out", path_str(&data)])
        .status
        .success());
    let manifest = data.join("manifest.csv");
    let model = dir.path().join("model.json");
    let preds = dir.path().join("preds");
    let o = bu(&[
        "train",
        "--manifest",
        path_str(&manifest),
        "--epochs",
        "0",
        "--out",
        path_str(&model),
        "--pred-dir",
        path_str(&preds),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m: boundary_uncertainty::PixelModel = serde_json::from_slice(&fs::read(&model).unwrap()).unwrap();
    assert_eq!(m.weights, [0.0; 4]);
    // sigmoid(0) everywhere.
    let p = read_map(&preds.join("pred_0000.pfm"));
    assert!(p.as_slice().iter().all(|&v| v == 0.5));
}

#[test]
fn train_then_eval_round_trip() {
    let dir = TempDir::new().unwrap();
    let data = dir.path().join("data");
    assert!(bu(&["synth", "--count", "6", "--size", "32", "--out", path_str(&data)])
        .status
        .success());
    let model = dir.path().join("model.json");
    let preds = dir.path().join("preds");
    let o = bu(&[
        "train",
        "--manifest",
        path_str(&data.join("manifest.csv")),
        "--transform",
        "bu",
        "--alpha",
        "0.8",
        "--beta",
        "0.2",
        "--epochs",
        "200",
        "--out",
        path_str(&model),
        "--pred-dir",
        path_str(&preds),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = dir.path().join("metrics.csv");
    let o = bu(&[
        "eval",
        "--pred-dir",
        path_str(&preds),
        "--gt-dir",
        path_str(&data),
        "--out",
        path_str(&csv),
    ]);
    assert!(o.status.success());
    let text = fs::read_to_string(csv).unwrap();
    let mean = text.lines().last().unwrap();
    let dsc: f64 = mean.split(',').nth(1).unwrap().parse().unwrap();
    assert!(dsc > 0.85, "{mean}");
}

#[test]
fn bench_and_experiment_emit_csv() {
    let o = bu(&["bench", "--sizes", "16,24", "--reps", "10"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("method,size,reps,median_ns"));
    assert_eq!(text.lines().count(), 7);

    let o = bu(&[
        "experiment",
        "--scenario",
        "under",
        "--transform",
        "sl",
        "--seeds",
        "1,2",
        "--epochs",
        "5",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "scenario,transform,seed,dsc,precision,recall");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("under,sl,1,"));
    assert!(lines[3].starts_with("under,sl,mean,"));
}
