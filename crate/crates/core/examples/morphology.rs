//! Dilation, erosion and their iterates on a noisy blob.
//!
//! Run with `cargo run --example morphology`.

use boundary_uncertainty::{dilate, erode, iterate, BinaryMask, MorphOp, Result, StructuringElement};

fn render(mask: &BinaryMask) -> String {
    (0..mask.height())
        .map(|y| {
            let mut line: String = (0..mask.width())
                .map(|x| if mask.is_set(x, y) { '#' } else { '.' })
                .collect();
            line.push('\n');
            line
        })
        .collect()
}

pub fn run_example() -> Result<String> {
    let mask = BinaryMask::from_fn(16, 10, |x, y| {
        let (dx, dy) = (x as f64 - 7.5, y as f64 - 4.5);
        dx * dx / 30.0 + dy * dy / 12.0 <= 1.0 || (x, y) == (14, 1)
    })?;
    let square = StructuringElement::square(3)?;
    let cross = StructuringElement::cross(3)?;

    let mut report = format!("input ({} foreground pixels):\n{}", mask.count_ones(), render(&mask));

    for (name, se) in [("square3", &square), ("cross3", &cross)] {
        let d = dilate(&mask, se);
        let e = erode(&mask, se);
        report.push_str(&format!(
            "\n{name}: dilation {} px, erosion {} px\n",
            d.count_ones(),
            e.count_ones()
        ));
        report.push_str(&render(&e));
    }

    // Opening removes the isolated pixel; the frame never erodes the object.
    let opened = dilate(&erode(&mask, &square), &square);
    report.push_str(&format!(
        "\nopening keeps {} of {} pixels:\n",
        opened.count_ones(),
        mask.count_ones()
    ));
    report.push_str(&render(&opened));

    // Two steps of the 3x3 square equal one step of the 5x5 square.
    let twice = iterate(MorphOp::Dilate, &mask, &square, 2);
    let once = dilate(&mask, &StructuringElement::square(5)?);
    report.push_str(&format!(
        "\ndilate(square3) twice == dilate(square5): {}\n",
        twice == once
    ));

    let duality = erode(&mask, &cross) == dilate(&mask.complement(), &cross).complement();
    report.push_str(&format!("erosion is the dual of dilation: {duality}\n"));
    Ok(report)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    print!("{}", run_example()?);
    Ok(())
}
