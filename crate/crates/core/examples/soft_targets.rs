//! Compares the three soft targets on a small two-object mask.
//!
//! Run with `cargo run --example soft_targets`.

use boundary_uncertainty::{
    boundary_uncertainty, dpt_transform, soft_label, BinaryMask, BuMode, BuParams, ProbMap, Result, StructuringElement,
};

fn render(map: &ProbMap) -> String {
    let mut out = String::new();
    for y in 0..map.height() {
        let row: Vec<String> = (0..map.width()).map(|x| format!("{:.1}", map.get(x, y))).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn run_example() -> Result<String> {
    let mask = BinaryMask::from_fn(12, 8, |x, y| {
        let block = (1..=5).contains(&x) && (1..=5).contains(&y);
        let bar = (8..=10).contains(&x) && (2..=6).contains(&y);
        block || bar
    })?;

    let mut report = String::new();

    let sl = soft_label(&mask, 0.9, 0.1)?;
    report.push_str("global soft labels (0.9 / 0.1):\n");
    report.push_str(&render(&sl));

    // Only the first ring inside and outside each object is softened.
    let bu = boundary_uncertainty(&mask, &BuParams::balanced(0.8, 0.2)?);
    report.push_str("\nboundary uncertainty, balanced 0.8 / 0.2:\n");
    report.push_str(&render(&bu));

    // Unbalanced parameters can lean the target outward; two iterations of
    // a cross widen the band without touching the far background.
    let cross = StructuringElement::cross(3)?;
    let wide = BuParams::new(0.9, 0.6, 2, cross, BuMode::Unbalanced)?;
    let bu_wide = boundary_uncertainty(&mask, &wide);
    report.push_str("\nboundary uncertainty, unbalanced 0.9 / 0.6, cross, n=2:\n");
    report.push_str(&render(&bu_wide));

    let (_, sdm) = dpt_transform(&mask)?;
    report.push_str(&format!(
        "\ndistance-penalty target keeps hard labels; signed distances span [{:.2}, {:.2}]\n",
        sdm.min(),
        sdm.max()
    ));

    let changed = |m: &ProbMap| {
        m.as_slice()
            .iter()
            .zip(mask.as_slice())
            .filter(|&(&p, &g)| p != f64::from(g))
            .count()
    };
    report.push_str(&format!(
        "pixels changed from the hard mask: sl {}, bu {}, bu wide {}\n",
        changed(&sl),
        changed(&bu),
        changed(&bu_wide)
    ));
    Ok(report)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    print!("{}", run_example()?);
    Ok(())
}
