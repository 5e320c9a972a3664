use alloc::string::String;
use alloc::vec::Vec;

/// Which accounting identity of an input-output table failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// `x_i = sum_j Z_ij + sum_d F_id`
    Row,
    /// `x_j = sum_i Z_ij + va_j`
    Column,
}

impl core::fmt::Display for Axis {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Axis::Row => f.write_str("row"),
            Axis::Column => f.write_str("column"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid country code {0:?}: expected three uppercase ASCII letters")]
    InvalidCountryCode(String),

    #[error("duplicate {kind} identifier {id:?}")]
    DuplicateId { kind: &'static str, id: String },

    #[error("{0} registry is empty")]
    EmptyRegistry(&'static str),

    #[error("unknown country code {0:?}")]
    UnknownCountry(String),

    #[error("unknown sector {0:?}")]
    UnknownSector(String),

    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: String,
        found: String,
    },

    #[error("negative entry {value} in {matrix} at ({row}, {col})")]
    NegativeEntry {
        matrix: &'static str,
        row: usize,
        col: usize,
        value: f64,
    },

    #[error(
        "accounting identity violated on {axis} {index} ({label}): residual {residual:.6e} \
         (relative {relative:.3e})"
    )]
    AccountingIdentity {
        axis: Axis,
        index: usize,
        label: String,
        residual: f64,
        relative: f64,
    },

    #[error("non-positive {variable} = {value} for {country} in {year}")]
    NonPositiveSeries {
        country: String,
        year: i32,
        variable: &'static str,
        value: f64,
    },

    #[error("I - A is singular (spectral radius of A estimated at {spectral_radius:.6})")]
    SingularLeontief { spectral_radius: f64 },

    #[error("{0} is identically zero")]
    AllZero(&'static str),

    #[error("non-finite value in {what} at index {index} ({label})")]
    NonFinite {
        what: &'static str,
        index: usize,
        label: String,
    },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter {
        name: &'static str,
        reason: String,
    },

    #[error("{what} {index} has no non-zero entries")]
    EmptyLine { what: &'static str, index: usize },

    #[error("degenerate scores: {0}")]
    Degenerate(String),

    #[error("bipartite graph is reducible into {} components", .0.len())]
    Reducible(Vec<Vec<usize>>),

    #[error("regressors are collinear: {column} depends on earlier columns")]
    Collinear { column: String },

    #[error("regressor has zero variance")]
    ZeroVariance,

    #[error("not enough observations: need {needed}, have {have}")]
    InsufficientObservations { needed: usize, have: usize },
}

pub type Result<T> = core::result::Result<T, Error>;
