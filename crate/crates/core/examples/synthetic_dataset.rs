//! Generates a seeded synthetic dataset, corrupts its labels, and writes it
//! to disk as PGM / PFM files with a CSV manifest.
//!
//! Run with `cargo run --example synthetic_dataset [output-dir]`; without an
//! argument the files go to a temporary directory.

use std::path::Path;

use boundary_uncertainty::synthesis::{read_dataset, write_dataset};
use boundary_uncertainty::{corrupt, generate, Corruption, Result, StructuringElement, SynthConfig};

pub fn run_example(out_dir: &Path) -> Result<String> {
    let config = SynthConfig {
        count: 6,
        width: 48,
        height: 48,
        ..SynthConfig::default()
    };
    let dataset = generate(&config)?;
    let again = generate(&config)?;
    let mut report = format!(
        "{} images of {}x{}, regenerated identically: {}\n",
        dataset.len(),
        config.width,
        config.height,
        dataset == again
    );

    let se = StructuringElement::square(3)?;
    for sample in &dataset.items {
        let under = corrupt(&sample.mask, Corruption::Under, 2, &se)?;
        let over = corrupt(&sample.mask, Corruption::Over, 2, &se)?;
        report.push_str(&format!(
            "{}: foreground {:5.1}%  under {:4} px  clean {:4} px  over {:4} px\n",
            sample.id,
            100.0 * sample.mask.foreground_fraction(),
            under.count_ones(),
            sample.mask.count_ones(),
            over.count_ones()
        ));
    }

    write_dataset(&dataset, out_dir)?;
    let reloaded = read_dataset(&out_dir.join("manifest.csv"))?;
    let masks_match = reloaded.items.iter().zip(&dataset.items).all(|(a, b)| a.mask == b.mask);
    report.push_str(&format!(
        "wrote {} samples to {}; masks survive the round trip: {masks_match}\n",
        reloaded.len(),
        out_dir.display()
    ));
    Ok(report)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    let tmp;
    let out_dir = match std::env::args_os().nth(1) {
        Some(dir) => std::path::PathBuf::from(dir),
        None => {
            tmp = tempfile::tempdir()?;
            tmp.path().to_path_buf()
        }
    };
    print!("{}", run_example(&out_dir)?);
    Ok(())
}
