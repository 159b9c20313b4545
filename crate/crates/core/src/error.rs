use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("singular configuration: sin(phi) = {sin_phi:e}")]
    Singular { sin_phi: f64 },

    #[error("dispersion pole: cos(k) = cos(phi) at k = {k}")]
    Pole { k: f64 },

    #[error("two-excitation space needs at least 2 qubits, got {0}")]
    NoPairSpace(usize),

    #[error("eigensolver failed for a {size}x{size} operator (|M|_F = {frobenius:.3e}): {reason}")]
    Eigensolver {
        size: usize,
        frobenius: f64,
        reason: String,
    },

    #[error("index {index} out of range for {len} states")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("Fourier grid n_k = {n_k} undersamples an array of {n} qubits")]
    Undersampled { n_k: usize, n: usize },

    #[error("empty isoenergy contour")]
    EmptyContour,

    #[error("zero-norm input")]
    ZeroNorm,

    #[error("degenerate momenta: k1 = k2 = {0}")]
    DegenerateMomenta(f64),

    #[error("degenerate quartic: pair energy is zero")]
    ZeroEnergy,

    #[error("degenerate Bethe configuration: |denominator| = {0:e}")]
    DegenerateBethe(f64),

    #[error("root pairs are not two inequivalent +/- pairs")]
    RootPairing,

    #[error("r_max = {0} is too small, need at least 4")]
    RelativeRangeTooSmall(usize),

    #[error("archive format: {0}")]
    Archive(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
