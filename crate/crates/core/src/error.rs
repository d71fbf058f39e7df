use std::path::PathBuf;

use crate::corpus::ClassLabel;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{origin}:{line}: {message}")]
    Parse {
        origin: String,
        line: usize,
        message: String,
    },

    #[error("{origin}:{line}: unknown label {token:?} (expected \"pos\" or \"neg\")")]
    UnknownLabel { origin: String, line: usize, token: String },

    #[error("{0}: file contains no records")]
    EmptyFile(String),

    #[error("{0}: unsupported format version")]
    VersionMismatch(String),

    #[error("class {class} has no training documents{}", in_domain(.domain))]
    MissingClass { class: ClassLabel, domain: Option<String> },

    #[error("length mismatch: {left} documents vs {right} labels")]
    LengthMismatch { left: usize, right: usize },

    #[error("domain {0:?} has no labels")]
    Unlabeled(String),

    #[error("insufficient initial domains: got {got}, at least {need} labeled domains are required")]
    InsufficientDomains { got: usize, need: usize },

    #[error("domain {0:?} has already been consumed")]
    DuplicateDomain(String),

    #[error("class {class} has {have} documents in {domain:?}, need at least {need}")]
    InsufficientClassCount {
        domain: String,
        class: ClassLabel,
        have: usize,
        need: usize,
    },

    #[error("no eligible words to select from")]
    EmptySelection,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("state directory {} is locked by another process", .0.display())]
    Locked(PathBuf),

    #[error("input {path} changed since it was recorded (digest mismatch)")]
    DigestMismatch { path: String },
}

fn in_domain(domain: &Option<String>) -> String {
    match domain {
        Some(d) => format!(" in domain {d:?}"),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(origin: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            origin: origin.into(),
            line,
            message: message.into(),
        }
    }

    /// Process exit status: 1 for environment and I/O failures, 2 for usage
    /// and contract violations.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } | Error::Locked(_) | Error::DigestMismatch { .. } => 1,
            _ => 2,
        }
    }
}
