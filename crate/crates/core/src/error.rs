use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An input lies outside the domain where a model is defined.
    #[error("{quantity} = {value} is outside the valid domain: {bound}")]
    Domain { quantity: &'static str, value: f64, bound: String },

    #[error("propellant record `{0}` has no burn-rate data")]
    UnsupportedRecord(String),

    #[error("integration did not converge: t = {t:.1} s exceeds the {limit:.0} s limit")]
    Divergence { t: f64, limit: f64 },

    #[error("vehicle reached the ground at t = {t:.1} s, x = {x:.0} m before apogee")]
    GroundImpactBeforeApogee { t: f64, x: f64 },

    #[error("no firing angle produced a valid trajectory: {0}")]
    Optimization(String),

    #[error("net heat flux is still positive ({flux:.3e} W/m^2) at the {upper} K bracket limit")]
    OutOfBracket { flux: f64, upper: f64 },

    #[error("invalid {field}: {reason}")]
    Validation { field: String, reason: String },

    #[error("missing required field `{0}`")]
    MissingField(String),

    #[error("parse error{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Parse { line: Option<usize>, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(quantity: &'static str, value: f64, bound: impl Into<String>) -> Self {
        Error::Domain { quantity, value, bound: bound.into() }
    }

    pub(crate) fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation { field: field.into(), reason: reason.into() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// True for errors caused by bad user input rather than by the run itself.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Validation { .. }
                | Error::MissingField(_)
                | Error::Parse { .. }
                | Error::Domain { .. }
                | Error::UnsupportedRecord(_)
        )
    }
}
