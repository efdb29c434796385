use thiserror::Error;

/// Errors produced by the sampling library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degree sum {0} is odd")]
    OddDegreeSum(u64),
    #[error("degree {degree} at vertex {vertex} exceeds n-1 = {max}")]
    DegreeOutOfRange {
        vertex: usize,
        degree: usize,
        max: usize,
    },
    #[error("degree sequence is not graphical")]
    NotGraphical,
    #[error("degree product {0} exceeds 4m = {1}; pair factor would be negative")]
    NegativePairFactor(usize, usize),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("{0}")]
    InvalidParameter(String),
    #[error("distance {0} outside the analytic validity window [0, 1/2]")]
    OutsideValidityWindow(f64),
    #[error("empty sample set")]
    EmptySamples,
    #[error("sample {0} outside the declared support [{1}, {2}]")]
    SampleOutsideSupport(f64, f64, f64),
    #[error("target support carries no mass under the base density")]
    VanishingMass,
    #[error("target demands length {0} where the reference density vanishes")]
    SupportMismatch(f64),
    #[error("instance too large for enumeration: n = {n}, m = {m}")]
    OracleInstanceTooLarge { n: usize, m: usize },
    #[error("degenerate discrete law: all atom tuples have zero total weight")]
    DegenerateLaw,
    #[error("weight table has {0} vertices but degree sequence has {1}")]
    SizeMismatch(usize, usize),
    #[error("malformed {kind} input: {detail}")]
    Parse { kind: &'static str, detail: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
