use alloc::string::String;

/// Errors raised by the evaluation routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{what}: input is empty")]
    Empty { what: &'static str },

    #[error("record {id:?}: {field} is not finite")]
    NonFinite { id: String, field: &'static str },

    #[error("record {id:?}: label must be 0 or 1, got {label}")]
    InvalidLabel { id: String, label: u8 },

    #[error("duplicate id {id:?} at {first} and {second}")]
    DuplicateId { id: String, first: usize, second: usize },

    #[error("record {id:?}: member seeds do not match the ordering used elsewhere in dataset {dataset:?}")]
    MemberOrder { id: String, dataset: String },

    #[error("record {id:?}: paraphrase id {paraphrase:?} appears more than once")]
    ParaphraseIdCollision { id: String, paraphrase: String },

    #[error("record {id:?} has no {field}")]
    MissingField { id: String, field: &'static str },

    #[error("no reference prediction for record {id:?}")]
    MissingReference { id: String },

    #[error("cannot split {n} records: calibration needs {calibration}, leaving no evaluation records")]
    SplitTooSmall { n: usize, calibration: usize },

    #[error("{name} = {value} is outside its valid range")]
    Domain { name: &'static str, value: f64 },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("row {row} has {got} columns, expected {expected}")]
    Ragged { row: usize, expected: usize, got: usize },

    #[error("{what}: need at least {needed} samples, got {got}")]
    TooFew { what: &'static str, needed: usize, got: usize },

    #[error("{what}: both label values must be present")]
    SingleClass { what: &'static str },

    #[error("unknown corruption kind {0:?}")]
    UnknownKind(String),

    #[error("severity {0} is not one of 1, 3, 5")]
    InvalidSeverity(u8),

    #[error("image has zero size")]
    EmptyImage,

    #[error("image buffer holds {got} pixels, expected {expected}")]
    ImageShape { expected: usize, got: usize },

    #[error("jpeg codec: {0}")]
    Codec(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
