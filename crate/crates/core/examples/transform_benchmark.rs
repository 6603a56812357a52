//! Times the three target transformations on synthetic masks.
//!
//! Run with `cargo run --release --example transform_benchmark`.

use boundary_uncertainty::bench::{bench_csv, lookup, run_bench, Method};
use boundary_uncertainty::Result;

pub fn run_example(sizes: &[usize], reps: usize) -> Result<String> {
    let records = run_bench(sizes, reps, 42)?;
    let mut report = bench_csv(&records);
    for &size in sizes {
        let sl = lookup(&records, Method::Sl, size).unwrap_or(1).max(1) as f64;
        let ratio = |m| lookup(&records, m, size).unwrap_or(0) as f64 / sl;
        report.push_str(&format!(
            "{size}x{size}: bu {:.1}x, dpt {:.1}x the cost of soft labels\n",
            ratio(Method::Bu),
            ratio(Method::Dpt)
        ));
    }
    Ok(report)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    print!("{}", run_example(&[128, 256, 512], 30)?);
    Ok(())
}
