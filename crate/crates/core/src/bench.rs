//! Per-image timing of the three ground-truth transformations.

use std::fmt::{self, Write as _};
use std::hint::black_box;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::raster::BinaryMask;
use crate::synthesis::{generate, SynthConfig};
use crate::transforms::{boundary_uncertainty, dpt_transform, soft_label, BuParams};

pub const WARMUP_RUNS: usize = 3;
pub const MIN_REPS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Sl,
    Bu,
    Dpt,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Sl, Method::Bu, Method::Dpt];
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Sl => "sl",
            Method::Bu => "bu",
            Method::Dpt => "dpt",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRecord {
    pub method: Method,
    pub image_size: usize,
    pub reps: usize,
    pub median_ns_per_image: u64,
}

/// Median of `reps` timed calls after [`WARMUP_RUNS`] untimed ones.
pub fn median_ns<T>(reps: usize, mut f: impl FnMut() -> T) -> u64 {
    for _ in 0..WARMUP_RUNS {
        black_box(f());
    }
    let mut samples: Vec<u64> = (0..reps)
        .map(|_| {
            let start = Instant::now();
            black_box(f());
            start.elapsed().as_nanos() as u64
        })
        .collect();
    samples.sort_unstable();
    let mid = samples.len() / 2;
    if samples.len() % 2 == 1 {
        samples[mid]
    } else {
        (samples[mid - 1] + samples[mid]) / 2
    }
}

/// A synthetic mask of the given side drawn from the synthesis stream.
pub fn bench_mask(size: usize, seed: u64) -> Result<BinaryMask> {
    let ds = generate(&SynthConfig {
        seed,
        count: 1,
        width: size,
        height: size,
        ..SynthConfig::default()
    })?;
    Ok(ds.items.into_iter().next().expect("count is 1").mask)
}

/// Times soft labels (0.9/0.1), boundary uncertainty (square 3x3, n=1,
/// alpha=0.9, beta=0.1) and the distance-penalty transform at each size.
pub fn run_bench(sizes: &[usize], reps: usize, seed: u64) -> Result<Vec<BenchRecord>> {
    if reps < MIN_REPS {
        return Err(Error::ConstraintViolation(format!(
            "reps must be at least {MIN_REPS}, got {reps}"
        )));
    }
    if sizes.is_empty() {
        return Err(Error::ConstraintViolation("at least one size is required".into()));
    }
    let params = BuParams::balanced(0.9, 0.1)?;
    let mut out = Vec::with_capacity(sizes.len() * 3);
    for &size in sizes {
        let mask = bench_mask(size, seed)?;
        for method in Method::ALL {
            let median = match method {
                Method::Sl => median_ns(reps, || soft_label(&mask, 0.9, 0.1)),
                Method::Bu => median_ns(reps, || boundary_uncertainty(&mask, &params)),
                Method::Dpt => median_ns(reps, || dpt_transform(&mask)),
            };
            out.push(BenchRecord {
                method,
                image_size: size,
                reps,
                median_ns_per_image: median,
            });
        }
    }
    Ok(out)
}

pub const BENCH_CSV_HEADER: &str = "method,size,reps,median_ns";

pub fn bench_csv(records: &[BenchRecord]) -> String {
    let mut out = String::from(BENCH_CSV_HEADER);
    out.push('\n');
    for r in records {
        writeln!(
            out,
            "{},{},{},{}",
            r.method, r.image_size, r.reps, r.median_ns_per_image
        )
        .expect("String write");
    }
    out
}

/// Median for `(method, size)`, if present.
pub fn lookup(records: &[BenchRecord], method: Method, size: usize) -> Option<u64> {
    records
        .iter()
        .find(|r| r.method == method && r.image_size == size)
        .map(|r| r.median_ns_per_image)
}
