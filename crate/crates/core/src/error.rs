use core::fmt;

/// Errors produced by decomposition and correlation routines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// The input is too short for the requested operation.
    DegenerateInput {
        /// Observed length.
        len: usize,
        /// Minimum accepted length.
        min: usize,
    },
    /// A sample is NaN or infinite.
    NonFinite {
        /// Index of the first offending sample.
        index: usize,
    },
    /// Fewer than two interior maxima or minima; the series cannot be sifted.
    NotSiftable {
        /// Interior maxima found.
        maxima: usize,
        /// Interior minima found.
        minima: usize,
    },
    /// The series has no interior maximum, so it has no period.
    UndefinedPeriod,
    /// Two series that must have equal length do not.
    LengthMismatch {
        /// Length of the left operand.
        left: usize,
        /// Length of the right operand.
        right: usize,
    },
    /// Lag bound is not strictly below the window size.
    LagNotBelowWindow {
        /// Requested maximum lag.
        lambda_max: usize,
        /// Window size.
        window: usize,
    },
    /// Window longer than the series.
    WindowTooLong {
        /// Window size.
        window: usize,
        /// Series length.
        len: usize,
    },
    /// Matrices or fields that must share a layout do not.
    NotConformable,
    /// Nothing to aggregate on the requested grid.
    NoOverlappingGrid,
    /// A configuration value is outside its allowed range.
    InvalidConfig(&'static str),
    /// A requested instrument label is missing from a panel.
    MissingLabel,
}

/// Crate result alias.
pub type Result<T, E = Error> = core::result::Result<T, E>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DegenerateInput { len, min } => {
                write!(f, "degenerate input: length {len}, need at least {min}")
            }
            Error::NonFinite { index } => write!(f, "non-finite sample at index {index}"),
            Error::NotSiftable { maxima, minima } => write!(
                f,
                "not siftable: {maxima} interior maxima and {minima} interior minima"
            ),
            Error::UndefinedPeriod => f.write_str("period undefined: no interior maximum"),
            Error::LengthMismatch { left, right } => {
                write!(f, "length mismatch: {left} vs {right}")
            }
            Error::LagNotBelowWindow { lambda_max, window } => write!(
                f,
                "maximum lag {lambda_max} must be strictly smaller than window {window}"
            ),
            Error::WindowTooLong { window, len } => {
                write!(f, "window {window} exceeds series length {len}")
            }
            Error::NotConformable => f.write_str("inputs are not conformable"),
            Error::NoOverlappingGrid => f.write_str("no overlapping lag/window grid"),
            Error::InvalidConfig(what) => write!(f, "invalid configuration: {what}"),
            Error::MissingLabel => f.write_str("label not present in panel"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
