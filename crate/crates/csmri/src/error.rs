use thiserror::Error;

#[derive(Debug, Error)]
pub enum CsError {
    #[error("grid side {0} is not a power of two >= 8")]
    BadSide(usize),

    #[error("decomposition depth {levels} out of range for side {side} (need 1 <= J <= log2(N)-2)")]
    BadDepth { levels: usize, side: usize },

    #[error("unsupported wavelet: {0}")]
    UnsupportedWavelet(String),

    #[error("grid side mismatch: {0} vs {1}")]
    SideMismatch(usize, usize),

    #[error("wavelet spec mismatch between operands")]
    SpecMismatch,

    #[error("mask index {index} out of range for side {side}")]
    IndexOutOfRange { index: usize, side: usize },

    #[error("mask is empty")]
    EmptyMask,

    #[error("mask contains duplicate indices (basis pursuit requires AA* = I)")]
    DuplicateIndices,

    #[error("density has zero mass at frequency {index} where the row norm is positive (K is infinite)")]
    ZeroMassAtActiveFrequency { index: usize },

    #[error("density support ({support}) is smaller than the requested distinct count ({requested})")]
    SupportTooSmall { support: usize, requested: usize },

    #[error("omega covers the entire grid; restricted density is undefined")]
    OmegaCoversGrid,

    #[error("tau = 0 with symmlet atoms degenerates omega to the full grid; use tau > 0")]
    DegenerateTau,

    #[error("low_levels {low_levels} exceeds decomposition depth {levels}")]
    LowLevelsTooDeep { low_levels: usize, levels: usize },

    #[error("omega size {omega} exceeds the measurement budget {budget}")]
    OmegaExceedsBudget { omega: usize, budget: usize },

    #[error("mask does not contain all omega indices (missing index {0})")]
    MaskMissingOmega(usize),

    #[error("requested budget fraction {requested} is unreachable (max achievable {achievable})")]
    UnreachableBudget { requested: f64, achievable: f64 },

    #[error("measurement vector length {got} does not match mask size {expected}")]
    MeasurementLength { got: usize, expected: usize },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("no m <= n satisfies the bound: bound vacuous at this n")]
    BoundVacuous,

    #[error("pgm depth must be 8 or 16 bits, got {0}")]
    BadBitDepth(u8),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("malformed file: {0}")]
    Format(String),

    #[error("{0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, CsError>;
