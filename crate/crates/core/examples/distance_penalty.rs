//! Exact distance transforms and the distance-penalty loss term.
//!
//! Run with `cargo run --example distance_penalty`.

use boundary_uncertainty::{
    boundary_penalty_loss, edt, mask_to_prob, signed_distance_map, soft_dice_loss, BinaryMask, ProbMap, Result,
};

pub fn run_example() -> Result<String> {
    let gt = BinaryMask::from_fn(20, 20, |x, y| (6..14).contains(&x) && (6..14).contains(&y))?;
    let mut report = String::new();

    let dist = edt(&gt)?;
    report.push_str(&format!(
        "distance to the object: corner {:.3}, edge midpoint {:.3}\n",
        dist.get(0, 0),
        dist.get(10, 0)
    ));

    let sdm = signed_distance_map(&gt)?;
    report.push_str(&format!(
        "signed distance: centre {:.3}, boundary {:.3}, far corner {:.3}\n",
        sdm.get(10, 10),
        sdm.get(6, 10),
        sdm.get(0, 0)
    ));

    // The penalty credits mass inside the object by its depth and charges
    // mass outside by its distance from the boundary.
    let exact = mask_to_prob(&gt);
    let shifted = ProbMap::new(
        20,
        20,
        (0..400)
            .map(|i| {
                let (x, y) = (i % 20, i / 20);
                if (8..16).contains(&x) && (6..14).contains(&y) {
                    1.0
                } else {
                    0.0
                }
            })
            .collect(),
    )?;
    let spread = ProbMap::new(
        20,
        20,
        (0..400)
            .map(|i| {
                let (x, y) = (i % 20, i / 20);
                if (4..16).contains(&x) && (4..16).contains(&y) {
                    1.0
                } else {
                    0.0
                }
            })
            .collect(),
    )?;
    let lambda = 0.01;
    for (name, pred) in [("exact", &exact), ("shifted by 2", &shifted), ("grown by 2", &spread)] {
        let dice = soft_dice_loss(pred, &exact, 1e-6)?;
        let total = boundary_penalty_loss(pred, &sdm, lambda, dice)?;
        report.push_str(&format!(
            "{name:>13}: dice {dice:.4}  penalty {:+.4}  total {total:.4}\n",
            total - dice
        ));
    }
    Ok(report)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    print!("{}", run_example()?);
    Ok(())
}
