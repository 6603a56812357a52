use boundary_uncertainty::trainer::{objective, prepare, train_prepared};
use boundary_uncertainty::{
    corrupt, generate, run_experiment, train, BuParams, Corruption, ExperimentConfig, PixelModel, Scenario,
    StructuringElement, SynthConfig, TrainConfig, Transform,
};

#[test]
fn small_learning_rate_descends_monotonically() {
    let data = generate(&SynthConfig::default()).unwrap();
    let outcome = train(
        &data,
        &TrainConfig {
            epochs: 100,
            learning_rate: 0.1,
            ..TrainConfig::default()
        },
    )
    .unwrap();
    let h = &outcome.history;
    assert_eq!(h.len(), 100);
    for pair in h.windows(2) {
        assert!(pair[1] <= pair[0] + 1e-12, "{pair:?}");
    }
    assert!(h[99] < h[0]);
}

#[test]
fn history_starts_at_the_zero_model() {
    let data = generate(&SynthConfig {
        count: 4,
        width: 20,
        height: 20,
        ..SynthConfig::default()
    })
    .unwrap();
    let items = prepare(&data, &Transform::None).unwrap();
    let outcome = train_prepared(&items, &TrainConfig::default());
    let (initial, _) = objective(&PixelModel::zeros(), &items, TrainConfig::default().eps, 0.0);
    assert_eq!(outcome.history[0], initial);
}

#[test]
fn clean_training_segments_well() {
    let rows = run_experiment(Scenario::Clean, &Transform::None, &[42], &ExperimentConfig::default()).unwrap();
    let mean = rows.last().unwrap();
    assert!(mean.seed.is_none());
    assert!(mean.metrics.dsc > 0.85, "{:?}", mean.metrics);
}

#[test]
fn under_segmentation_shrinks_target_mass() {
    let data = generate(&SynthConfig::default()).unwrap();
    let se = StructuringElement::default();
    let clean_mass: usize = data.items.iter().map(|s| s.mask.count_ones()).sum();
    let under_mass: usize = data
        .items
        .iter()
        .map(|s| corrupt(&s.mask, Corruption::Under, 2, &se).unwrap().count_ones())
        .sum();
    assert!(under_mass < clean_mass);

    // Boundary uncertainty on the corrupted labels restores part of it.
    let mut corrupted = data.clone();
    for s in &mut corrupted.items {
        s.mask = corrupt(&s.mask, Corruption::Under, 2, &se).unwrap();
    }
    let hard: f64 = prepare(&corrupted, &Transform::None)
        .unwrap()
        .iter()
        .map(|i| i.target.iter().sum::<f64>())
        .sum();
    let bu = Transform::BoundaryUncertainty(BuParams::balanced(0.8, 0.2).unwrap());
    let soft: f64 = prepare(&corrupted, &bu)
        .unwrap()
        .iter()
        .map(|i| i.target.iter().sum::<f64>())
        .sum();
    assert!(soft > hard);
}

#[test]
fn training_is_deterministic() {
    let data = generate(&SynthConfig {
        count: 6,
        width: 24,
        height: 24,
        ..SynthConfig::default()
    })
    .unwrap();
    let config = TrainConfig {
        epochs: 30,
        transform: Transform::DistancePenalty { lambda: 0.01 },
        ..TrainConfig::default()
    };
    assert_eq!(train(&data, &config).unwrap(), train(&data, &config).unwrap());
}
