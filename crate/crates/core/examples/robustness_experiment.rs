//! Trains the pixel classifier on clean, under- and over-segmented labels
//! with each target transformation and reports mean test metrics.
//!
//! Run with `cargo run --release --example robustness_experiment`. The full
//! grid (14 scenario / target pairs x 5 seeds) takes about a minute.

use boundary_uncertainty::trainer::experiment_csv;
use boundary_uncertainty::{run_experiment, BuParams, ExperimentConfig, Result, Scenario, Transform};

/// Labelled transforms to try on each scenario. Besides the shared set,
/// corrupted scenarios get an unbalanced boundary-uncertainty target that
/// leans against the direction of the corruption.
pub fn transforms(scenario: Scenario) -> Result<Vec<(&'static str, Transform)>> {
    let mut list = vec![
        ("none", Transform::None),
        ("sl 0.9/0.1", Transform::SoftLabel { p_fg: 0.9, p_bg: 0.1 }),
        (
            "bu 0.9/0.1",
            Transform::BoundaryUncertainty(BuParams::balanced(0.9, 0.1)?),
        ),
        ("dpt 0.01", Transform::DistancePenalty { lambda: 0.01 }),
    ];
    match scenario {
        Scenario::Clean => {}
        Scenario::Under => list.push((
            "bu 1/1 n=2",
            Transform::BoundaryUncertainty(BuParams::unbalanced(1.0, 1.0, 2)?),
        )),
        Scenario::Over => list.push((
            "bu 0/0 n=2",
            Transform::BoundaryUncertainty(BuParams::unbalanced(0.0, 0.0, 2)?),
        )),
    }
    Ok(list)
}

pub fn run_example(config: &ExperimentConfig, seeds: &[u64]) -> Result<String> {
    let mut report = String::from("scenario  target      dsc     precision  recall\n");
    let mut rows = Vec::new();
    for scenario in [Scenario::Clean, Scenario::Under, Scenario::Over] {
        for (label, transform) in transforms(scenario)? {
            let result = run_experiment(scenario, &transform, seeds, config)?;
            let mean = &result.last().expect("mean row").metrics;
            report.push_str(&format!(
                "{:<9} {:<11} {:.4}  {:.4}     {:.4}\n",
                scenario.to_string(),
                label,
                mean.dsc,
                mean.precision,
                mean.recall
            ));
            rows.extend(result);
        }
    }
    report.push('\n');
    report.push_str(&experiment_csv(&rows));
    Ok(report)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    print!("{}", run_example(&ExperimentConfig::default(), &[42, 43, 44, 45, 46])?);
    Ok(())
}
