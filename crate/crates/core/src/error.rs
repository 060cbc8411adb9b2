use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{samples} samples cannot resolve band {band} (need at least {needed})")]
    TooFewSamples { samples: usize, band: usize, needed: usize },

    #[error("discarded Fourier tail mass {mass:.3e} exceeds tolerance {tolerance:.1e}")]
    TailMass { mass: f64, tolerance: f64 },

    #[error("logarithm requested on the branch cut (elliptic element of rotation angle π)")]
    BranchCut,

    #[error("weight {weight} outside 0..={max}")]
    WeightRange { weight: i64, max: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("mode {mode} at source weight {weight} depends on components discarded by truncation")]
    Truncation { mode: i64, weight: usize },

    #[error("field annihilates the vacuum in every mode e_-n, 0 <= n <= {0}")]
    DegenerateField(usize),

    #[error("inconclusive: {0}")]
    Inconclusive(String),

    #[error("structural error: {0}")]
    Structural(String),

    #[error("expected a {expected} form")]
    KindMismatch { expected: &'static str },

    #[error("every sampled pairing vanishes; nothing to fit")]
    UndefinedFit,
}

pub type Result<T> = std::result::Result<T, Error>;
