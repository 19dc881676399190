use alloc::string::String;
use core::fmt;

/// Errors reported by dataset handling, problem construction, and solvers.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Two containers that must agree in size do not.
    DimensionMismatch {
        expected: usize,
        got: usize,
        what: &'static str,
    },
    /// A dataset had no samples or no features.
    EmptyDataset(&'static str),
    /// A label was not -1 or +1 (after the 0/1 remap).
    InvalidLabel { row: usize, value: f64 },
    /// All labels belong to one class; class weights and stratified
    /// splitting are undefined.
    DegenerateClasses,
    /// Requested train size outside `1..l`.
    SplitSize { requested: usize, total: usize },
    /// Parameter outside its valid range.
    InvalidParameter { name: &'static str, detail: String },
    /// `tau` outside `[-1, 1]`.
    TauOutOfRange(f64),
    /// A formulation was paired with a `tau` whose sign it does not accept.
    TauSignMismatch { formulation: &'static str, tau: f64 },
    /// Per-coordinate bounds crossed (`lower > upper`).
    InfeasibleBox { index: usize },
    /// The equality constraint cannot be met anywhere inside the box.
    InfeasibleEquality,
    /// Multiplier recovery at `tau = -1`: alpha and beta are indeterminate.
    AlphaIndeterminate,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch {
                expected,
                got,
                what,
            } => {
                write!(
                    f,
                    "dimension mismatch for {what}: expected {expected}, got {got}"
                )
            }
            Error::EmptyDataset(what) => write!(f, "no samples: {what}"),
            Error::InvalidLabel { row, value } => {
                write!(f, "label not \u{b1}1 or 0/1 at row {row}: {value}")
            }
            Error::DegenerateClasses => {
                write!(
                    f,
                    "degenerate class distribution: both classes must be present"
                )
            }
            Error::SplitSize { requested, total } => {
                write!(f, "train size {requested} out of range 1..{total}")
            }
            Error::InvalidParameter { name, detail } => {
                write!(f, "invalid parameter {name}: {detail}")
            }
            Error::TauOutOfRange(v) => write!(f, "tau {v} outside [-1, 1]"),
            Error::TauSignMismatch { formulation, tau } => {
                write!(f, "formulation {formulation} does not accept tau = {tau}")
            }
            Error::InfeasibleBox { index } => {
                write!(f, "infeasible box: lower > upper at coordinate {index}")
            }
            Error::InfeasibleEquality => {
                write!(f, "equality constraint infeasible over the box")
            }
            Error::AlphaIndeterminate => {
                write!(f, "alpha/beta recovery undefined at tau = -1")
            }
        }
    }
}

impl core::error::Error for Error {}

impl Error {
    pub(crate) fn param(name: &'static str, detail: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            detail: detail.into(),
        }
    }
}
