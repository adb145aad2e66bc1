use std::path::PathBuf;

/// Unified error type for the library.
///
/// The CLI maps these onto process exit codes via [`Error::exit_code`]:
/// input/validation problems exit 2, numerical failures exit 3. (Exit 4 is
/// reserved by the CLI for calibration results pinned at a search bound,
/// which the library reports as data, not as an error.)
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed input file content; names the file and 1-based line.
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    /// Structurally valid input that violates a data invariant.
    #[error("invalid data: {0}")]
    Invalid(String),

    /// Function argument outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A VIX level outside the fitted range of the quantile map. Callers
    /// decide how to react; the library never clamps.
    #[error("VIX level {value} outside fitted range [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    /// Polynomial fit rejected (conditioning or monotonicity).
    #[error("fit failed: {0}")]
    Fit(String),

    /// Numerical evaluation broke down (non-finite values, accuracy loss).
    #[error("numerical error: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code the CLI uses for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. }
            | Error::Parse { .. }
            | Error::Invalid(_)
            | Error::Domain(_)
            | Error::OutOfRange { .. } => 2,
            Error::Fit(_) | Error::Numerical(_) => 3,
        }
    }
}
