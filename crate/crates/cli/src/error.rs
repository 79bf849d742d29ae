use bosonic_cert::Error;
use serde::Serialize;

/// Failure classes, each with its own exit code.
#[derive(Debug)]
pub enum CliError {
    Validation { field: String, message: String },
    Resource(String),
    Internal(String),
}

impl CliError {
    pub fn field(field: &str, message: impl Into<String>) -> Self {
        CliError::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation { .. } => 2,
            CliError::Resource(_) => 3,
            CliError::Internal(_) => 1,
        }
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Payload<'a> {
            error: &'a str,
            #[serde(skip_serializing_if = "Option::is_none")]
            field: Option<&'a str>,
            message: &'a str,
        }
        let p = match self {
            CliError::Validation { field, message } => Payload {
                error: "validation",
                field: Some(field),
                message,
            },
            CliError::Resource(m) => Payload {
                error: "resource",
                field: None,
                message: m,
            },
            CliError::Internal(m) => Payload {
                error: "internal",
                field: None,
                message: m,
            },
        };
        serde_json::to_string(&p).expect("error payload serializes")
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter { field, reason } => CliError::Validation { field, message: reason },
            Error::ResourceLimit(_) | Error::TruncationUnsafe { .. } => CliError::Resource(e.to_string()),
            Error::InvalidDimension(_)
            | Error::InvalidComposition(_)
            | Error::DimensionMismatch { .. }
            | Error::NotHermitian(_)
            | Error::UnsupportedShape(_)
            | Error::MissingCoverage(_)
            | Error::InsufficientShots(_) => CliError::Validation {
                field: "config".into(),
                message: e.to_string(),
            },
            _ => CliError::Internal(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}
