use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the control-signal engine.
#[derive(Debug, Error)]
pub enum Error {
    /// Input violates a documented precondition. `field` names the offending input.
    #[error("invalid {field}: {message}")]
    Validation { field: String, message: String },

    #[error("dimension mismatch for {what}: expected {expected_w}x{expected_h}, got {actual_w}x{actual_h}")]
    DimensionMismatch {
        what: String,
        expected_w: u32,
        expected_h: u32,
        actual_w: u32,
        actual_h: u32,
    },

    #[error("point behind camera (Z = {z})")]
    BehindCamera { z: f64 },

    #[error("k = {k} exceeds the number of points ({points})")]
    InfeasibleK { k: usize, points: usize },

    #[error("k-means input is empty")]
    EmptyInput,

    /// Malformed binary or text container.
    #[error("parse error in {field}: {message}")]
    Parse { field: String, message: String },

    #[error("payload too short: expected {expected} bytes, got {actual}")]
    Truncated { expected: usize, actual: usize },

    #[error("{path}: {message}")]
    File { path: PathBuf, message: String },

    #[error("{kind} provider error: {cause}")]
    Provider { kind: String, cause: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn parse(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn file(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::File {
            path: path.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by bad caller input rather than the environment.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Validation { .. }
                | Error::DimensionMismatch { .. }
                | Error::BehindCamera { .. }
                | Error::InfeasibleK { .. }
                | Error::EmptyInput
                | Error::Parse { .. }
                | Error::Truncated { .. }
                | Error::File { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Non-fatal condition reported alongside a successful result.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Diagnostic {
    /// A requested instance has no pixels in the source mask.
    InstanceNotInMask { instance_id: u32 },
    /// An instance left the rendered frame in every frame and emits no control points.
    InstanceVanished { instance_id: u32 },
    /// An instance is empty in every annotated frame and was skipped.
    InstanceEmpty { instance_id: u32 },
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Diagnostic::InstanceNotInMask { instance_id } => {
                write!(f, "instance {instance_id} has no pixels in the mask")
            }
            Diagnostic::InstanceVanished { instance_id } => {
                write!(f, "instance {instance_id} is not visible in any rendered frame")
            }
            Diagnostic::InstanceEmpty { instance_id } => {
                write!(f, "instance {instance_id} is empty in every frame; skipped")
            }
        }
    }
}
