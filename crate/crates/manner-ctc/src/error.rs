//! Crate-wide error type.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid label {0:?}: labels must be non-empty and contain no newline, comma, or tab")]
    InvalidLabel(String),

    #[error("duplicate label {0:?}")]
    DuplicateLabel(String),

    #[error("alphabet needs at least {required} non-blank labels, found {found}")]
    AlphabetTooSmall { required: usize, found: usize },

    #[error("blank label \"<\" must sit at index 0")]
    MisplacedBlank,

    #[error("alphabet has no space label \">\"")]
    MissingSpace,

    #[error("unknown manner class {0:?}: expected one of V, $, N, F, S, DELETE")]
    InvalidMannerClass(String),

    #[error("manner-map line {line} is not \"CHAR<TAB>CLASS\": {content:?}")]
    MalformedMapLine { line: usize, content: String },

    #[error("symbol {0:?} has no manner mapping")]
    UnmappableSymbol(String),

    #[error("symbol {0:?} is not in the alphabet")]
    UnknownSymbol(String),

    #[error("transcripts cannot contain the blank label")]
    BlankInTranscript,

    #[error("label index {index} out of range for alphabet of size {size}")]
    LabelIndexOutOfRange { index: usize, size: usize },

    #[error("operands are bound to different alphabets")]
    AlphabetMismatch,

    #[error("frame counts differ: manner stream has {manner}, character stream has {chars}")]
    FrameCountMismatch { manner: usize, chars: usize },

    #[error("posterior matrix must have at least one frame")]
    EmptyMatrix,

    #[error("row {row} has {found} entries, expected {expected}")]
    RowLength {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("row {row}, column {col}: negative entry {value}")]
    NegativeEntry { row: usize, col: usize, value: f64 },

    #[error("row {row}, column {col}: entry is not finite")]
    NonFiniteEntry { row: usize, col: usize },

    #[error("row {row} sums to {sum}, outside 1 \u{b1} {tolerance}")]
    RowSumOutOfTolerance { row: usize, sum: f64, tolerance: f64 },

    #[error("path enumeration would visit {paths:.3e} paths, above the {limit:.1e} guard")]
    PathLimitExceeded { paths: f64, limit: f64 },

    #[error("target transcript has zero probability; gradient is undefined")]
    ZeroProbabilityTarget,

    #[error("alphabet has fewer than 2 non-blank labels; exclusion is unsatisfiable")]
    ExclusionUnsatisfiable,

    #[error("peak occurrence {occurrence} out of range: matrix has {peaks} non-blank peaks")]
    PeakOutOfRange { occurrence: usize, peaks: usize },

    #[error("suppression factor {0} must lie in (0, 1)")]
    InvalidFactor(f64),

    #[error("invalid synthesis parameters: {0}")]
    InvalidSynthSpec(String),

    #[error("reference is empty but hypothesis is not; rate is undefined")]
    EmptyReference,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("duplicate manifest id {0:?}")]
    DuplicateId(String),

    #[error("manifest entry {id:?} references missing file {path}")]
    MissingEntryFile { id: String, path: PathBuf },

    #[error("manifest entry {id:?} has no manner posteriors and manner derivation is disabled")]
    MissingMannerStream { id: String },

    #[error("utterance {id:?}: {source}")]
    Utterance {
        id: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Attach the utterance id an eval-time error belongs to.
    pub fn for_utterance(self, id: &str) -> Error {
        Error::Utterance {
            id: id.to_string(),
            source: Box::new(self),
        }
    }
}
