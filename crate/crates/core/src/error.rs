use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the engine can report. Each variant has a stable
/// machine-readable [`code`](Error::code) used by the CLI, the HTTP service
/// and the C ABI.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("knowledge base has {0} error-level diagnostic(s)")]
    InvalidKb(usize),

    #[error("unknown {kind} `{id}`")]
    UnknownId { kind: &'static str, id: String },

    #[error("node `{node}` has {parents} parents; at most {max} are supported")]
    TooManyParents {
        node: String,
        parents: usize,
        max: usize,
    },

    #[error("network has {nodes} nodes; exact enumeration supports at most {max}")]
    NetworkTooLarge { nodes: usize, max: usize },

    #[error("evidence has zero total weight under the model")]
    ZeroWeight,

    #[error("evidence has zero probability under the model")]
    ZeroProbability,

    #[error("conflicting observations for sensor `{sensor}`, class `{class}`")]
    ConflictingEvidence { sensor: String, class: String },

    #[error("class `{class}` at sensor `{sensor}` is not in the compiled network; recompile with the evidence classes")]
    RecompileNeeded { sensor: String, class: String },

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("invalid observations: {0}")]
    InvalidObservations(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{0}")]
    Io(String),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::Syntax { .. } => "syntax",
            Error::InvalidKb(_) => "invalid-kb",
            Error::UnknownId { kind, .. } => match *kind {
                "sensor" => "unknown-sensor",
                "class" => "unknown-class",
                "node" => "unknown-node",
                "action" => "unknown-action",
                _ => "unknown-id",
            },
            Error::TooManyParents { .. } => "too-many-parents",
            Error::NetworkTooLarge { .. } => "network-too-large",
            Error::ZeroWeight => "zero-weight",
            Error::ZeroProbability => "zero-probability",
            Error::ConflictingEvidence { .. } => "conflicting-evidence",
            Error::RecompileNeeded { .. } => "recompile-needed",
            Error::InvalidNetwork(_) => "invalid-network",
            Error::InvalidObservations(_) => "invalid-observations",
            Error::InvalidArgument(_) => "invalid-argument",
            Error::Io(_) => "io",
        }
    }

    pub(crate) fn unknown(kind: &'static str, id: impl Into<String>) -> Self {
        Error::UnknownId {
            kind,
            id: id.into(),
        }
    }
}
