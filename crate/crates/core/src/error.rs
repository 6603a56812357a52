use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("not a binary PGM (expected magic \"P5\")")]
    NotP5,
    #[error("not a grayscale PFM (expected magic \"Pf\")")]
    NotPf,
    #[error("bad header: {0}")]
    BadHeader(String),
    #[error("mask sample {value} at offset {offset} is neither 0 nor 255")]
    NotBinary { offset: usize, value: u8 },
    #[error("value {value} at offset {offset} lies outside [0, 1]")]
    OutOfRange { offset: usize, value: f64 },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("constraint violated: {0}")]
    ConstraintViolation(String),
    #[error("mask has no foreground pixel")]
    EmptyMask,
    #[error("mask is entirely foreground or entirely background")]
    DegenerateMask,
    #[error("shape mismatch: {left_width}x{left_height} vs {right_width}x{right_height}")]
    ShapeMismatch {
        left_width: usize,
        left_height: usize,
        right_width: usize,
        right_height: usize,
    },
    #[error("cannot aggregate an empty list of records")]
    EmptyList,
    #[error("invalid synthesis config: {0}")]
    ConfigInvalid(String),
    #[error("dataset is empty")]
    EmptyDataset,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_shape(a: (usize, usize), b: (usize, usize)) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::ShapeMismatch {
            left_width: a.0,
            left_height: a.1,
            right_width: b.0,
            right_height: b.1,
        })
    }
}
