//! Command errors with stable codes and exit statuses.

use std::fmt;
use std::path::Path;

use serde_json::{json, Value};
use vxf_core::Error as CoreError;

/// Exit statuses shared by every subcommand.
pub mod exit {
    pub const OK: u8 = 0;
    pub const INPUT: u8 = 2;
    pub const VALIDATION: u8 = 3;
    pub const NOT_CONVERGED: u8 = 4;
    pub const DEGENERATE: u8 = 5;
    pub const PANEL: u8 = 6;
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: &'static str,
    pub exit: u8,
    pub message: String,
    pub details: Value,
}

impl CliError {
    pub fn new(code: &'static str, exit: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            exit,
            message: message.into(),
            details: Value::Null,
        }
    }

    pub fn with_details(mut self, details: Value) -> Self {
        self.details = details;
        self
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self::new("usage", exit::INPUT, message)
    }

    pub fn malformed(path: &Path, message: impl Into<String>) -> Self {
        let message = message.into();
        Self::new("malformed_input", exit::INPUT, format!("{}: {message}", path.display()))
            .with_details(json!({ "path": path.display().to_string() }))
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        let p = path.display().to_string();
        if err.kind() == std::io::ErrorKind::NotFound {
            Self::new("input_not_found", exit::INPUT, format!("{p}: file not found"))
                .with_details(json!({ "path": p }))
        } else {
            Self::new("io_error", exit::INPUT, format!("{p}: {err}")).with_details(json!({ "path": p }))
        }
    }

    pub fn csv(path: &Path, err: csv::Error) -> Self {
        let line = err.position().map(|p| p.line());
        let message = err.to_string();
        match err.into_kind() {
            csv::ErrorKind::Io(e) => Self::io(path, e),
            _ => Self::malformed(path, message)
                .with_details(json!({ "path": path.display().to_string(), "line": line })),
        }
    }

    /// Adds the input path to the details.
    pub fn at(mut self, path: &Path) -> Self {
        let p = Value::String(path.display().to_string());
        match &mut self.details {
            Value::Object(m) => {
                m.entry("path").or_insert(p);
            }
            Value::Null => self.details = json!({ "path": p }),
            _ => {}
        }
        self
    }

    /// Machine-readable form written to stderr.
    pub fn to_json(&self) -> Value {
        json!({
            "error": {
                "code": self.code,
                "exit": self.exit,
                "message": self.message,
                "details": self.details,
            }
        })
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

impl std::error::Error for CliError {}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        use exit::*;
        let message = e.to_string();
        let (code, status, details) = match &e {
            CoreError::AccountingIdentity { axis, index, label, residual, relative } => (
                "accounting_identity",
                VALIDATION,
                json!({ "axis": axis.to_string(), "index": index, "activity": label, "residual": residual, "relative": relative }),
            ),
            CoreError::NegativeEntry { matrix, row, col, value } => (
                "negative_entry",
                VALIDATION,
                json!({ "matrix": matrix, "row": row, "col": col, "value": value }),
            ),
            CoreError::InvalidCountryCode(c) => ("invalid_country_code", VALIDATION, json!({ "country": c })),
            CoreError::UnknownCountry(c) => ("unknown_country", VALIDATION, json!({ "country": c })),
            CoreError::UnknownSector(s) => ("unknown_sector", VALIDATION, json!({ "sector": s })),
            CoreError::DuplicateId { kind, id } => ("duplicate_entry", VALIDATION, json!({ "kind": kind, "id": id })),
            CoreError::EmptyRegistry(what) => ("empty_input", VALIDATION, json!({ "what": what })),
            CoreError::DimensionMismatch { what, expected, found } => (
                "dimension_mismatch",
                VALIDATION,
                json!({ "what": what, "expected": expected, "found": found }),
            ),
            CoreError::NonPositiveSeries { country, year, variable, value } => (
                "non_positive_series",
                VALIDATION,
                json!({ "country": country, "year": year, "variable": variable, "value": value }),
            ),
            CoreError::SingularLeontief { spectral_radius } => (
                "singular_leontief",
                VALIDATION,
                json!({ "spectral_radius_estimate": spectral_radius }),
            ),
            CoreError::AllZero(what) => ("all_zero", VALIDATION, json!({ "what": what })),
            CoreError::EmptyLine { what, index } => ("empty_line", VALIDATION, json!({ "what": what, "index": index })),
            CoreError::Collinear { column } => ("collinear", VALIDATION, json!({ "column": column })),
            CoreError::InvalidParameter { name, reason } => (
                "invalid_parameter",
                INPUT,
                json!({ "name": name, "reason": reason }),
            ),
            CoreError::NonFinite { what, index, label } => (
                "non_finite",
                DEGENERATE,
                json!({ "what": what, "index": index, "label": label }),
            ),
            CoreError::Degenerate(msg) => ("eci_degenerate", DEGENERATE, json!({ "reason": msg })),
            CoreError::Reducible(components) => ("eci_reducible", DEGENERATE, json!({ "components": components })),
            CoreError::ZeroVariance => ("zero_variance", DEGENERATE, Value::Null),
            CoreError::InsufficientObservations { needed, have } => (
                "insufficient_observations",
                PANEL,
                json!({ "needed": needed, "have": have }),
            ),
        };
        CliError::new(code, status, message).with_details(details)
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
