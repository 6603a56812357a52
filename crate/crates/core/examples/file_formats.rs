//! Round-trips a mask through binary PGM and its soft target through PFM,
//! the formats the `bu` command line tool reads and writes.
//!
//! Run with `cargo run --example file_formats`.

use boundary_uncertainty::{
    boundary_uncertainty, read_mask_pgm, read_pfm, write_mask_pgm, write_pfm, BinaryMask, BuParams, Error, Result,
};

pub fn run_example() -> Result<String> {
    let mask = BinaryMask::from_fn(7, 5, |x, y| x + y >= 4 && x >= 2)?;
    let pgm = write_mask_pgm(&mask);
    let header_end = pgm.len() - mask.len();
    let mut report = format!(
        "PGM header {:?}, {} payload bytes\n",
        String::from_utf8_lossy(&pgm[..header_end]),
        mask.len()
    );
    report.push_str(&format!("mask round trip exact: {}\n", read_mask_pgm(&pgm)? == mask));

    let target = boundary_uncertainty(&mask, &BuParams::balanced(0.7, 0.3)?);
    let pfm = write_pfm(&target);
    let back = read_pfm(&pfm)?;
    // PFM stores f32, so compare at single precision.
    let max_gap = back
        .as_slice()
        .iter()
        .zip(target.as_slice())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    report.push_str(&format!("PFM round trip max error {max_gap:.1e}\n"));

    // Mask samples must be 0 or 255; anything else is rejected with its offset.
    let mut bad = pgm.clone();
    bad[header_end + 3] = 128;
    match read_mask_pgm(&bad) {
        Err(Error::NotBinary { offset, value }) => {
            report.push_str(&format!("non-binary byte {value} rejected at offset {offset}\n"))
        }
        other => report.push_str(&format!("unexpected: {other:?}\n")),
    }
    Ok(report)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    print!("{}", run_example()?);
    Ok(())
}
