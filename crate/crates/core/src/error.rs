use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("connection failed for {descriptor}: {message}")]
    Connection { descriptor: String, message: String },

    #[error("unsupported connection descriptor `{0}`")]
    UnsupportedDescriptor(String),

    #[error("registration aborted: table `{table}` has no readable column list")]
    UnreadableTable { table: String },

    #[error("SQL error on `{target}`: {message}")]
    Sql { target: String, message: String },

    #[error("statement timed out on `{target}` after {seconds}s")]
    Timeout { target: String, seconds: u64 },

    #[error("parameter count mismatch: statement has {expected} placeholders, got {actual} values")]
    ParameterArity { expected: usize, actual: usize },

    #[error("only select statements may be issued through the gateway")]
    WriteRejected,

    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },

    #[error("no meaning found for keyword `{keyword}` (unmapped keyword policy: {policy})")]
    UnmappableKeyword { keyword: String, policy: String },

    #[error("query has no valid interpretation: {0}")]
    NoInterpretation(String),

    #[error("query is too ambiguous: {0} candidate interpretations")]
    TooAmbiguous(usize),

    #[error("relations `{0}` and `{1}` are not related within the configured path length")]
    UnrelatedRelations(String, String),

    #[error("cannot intersect repeated values of {relation}.{attribute}: {reason}")]
    NoIntersection {
        relation: String,
        attribute: String,
        reason: String,
    },

    #[error("unsupported query shape: {0}")]
    Unsupported(String),

    #[error("unknown table `{0}`")]
    UnknownTable(String),

    #[error("unknown column `{column}` on table `{table}`")]
    UnknownColumn { table: String, column: String },

    #[error("invalid request: {0}")]
    Validation(String),

    #[error("search system store error: {0}")]
    Store(String),

    #[error("annotation file error: {0}")]
    Annotations(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable error code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Connection { .. } => "connection_failed",
            Error::UnsupportedDescriptor(_) => "unsupported_descriptor",
            Error::UnreadableTable { .. } => "unreadable_table",
            Error::Sql { .. } => "sql_error",
            Error::Timeout { .. } => "timeout",
            Error::ParameterArity { .. } => "parameter_arity",
            Error::WriteRejected => "write_rejected",
            Error::Syntax { .. } => "syntax_error",
            Error::UnmappableKeyword { .. } => "unmappable_keyword",
            Error::NoInterpretation(_) => "no_interpretation",
            Error::TooAmbiguous(_) => "too_ambiguous",
            Error::UnrelatedRelations(..) => "unrelated_relations",
            Error::NoIntersection { .. } => "no_intersection",
            Error::Unsupported(_) => "unsupported_query",
            Error::UnknownTable(_) => "unknown_table",
            Error::UnknownColumn { .. } => "unknown_column",
            Error::Validation(_) => "invalid_request",
            Error::Store(_) => "store_error",
            Error::Annotations(_) => "annotation_error",
            Error::Config(_) => "config_error",
            Error::Io(_) => "io_error",
        }
    }

    /// Structured detail for API error bodies.
    pub fn detail(&self) -> serde_json::Value {
        use serde_json::json;
        match self {
            Error::UnmappableKeyword { keyword, policy } => json!({"keyword": keyword, "policy": policy}),
            Error::UnrelatedRelations(a, b) => json!({"pair": [a, b]}),
            Error::NoIntersection {
                relation, attribute, ..
            } => {
                json!({"relation": relation, "attribute": attribute})
            }
            Error::Syntax { position, .. } => json!({"position": position}),
            Error::Sql { target, .. } | Error::Timeout { target, .. } => json!({"relation": target}),
            Error::UnknownTable(t) => json!({"table": t}),
            Error::UnknownColumn { table, column } => json!({"table": table, "column": column}),
            _ => serde_json::Value::Null,
        }
    }

    /// True for errors caused by the request rather than the system.
    pub fn is_client_error(&self) -> bool {
        matches!(
            self,
            Error::Syntax { .. }
                | Error::UnmappableKeyword { .. }
                | Error::NoInterpretation(_)
                | Error::TooAmbiguous(_)
                | Error::UnrelatedRelations(..)
                | Error::NoIntersection { .. }
                | Error::Unsupported(_)
                | Error::Validation(_)
        )
    }

    pub fn is_not_found(&self) -> bool {
        matches!(self, Error::UnknownTable(_) | Error::UnknownColumn { .. })
    }
}

impl From<rusqlite::Error> for Error {
    fn from(e: rusqlite::Error) -> Self {
        Error::Store(e.to_string())
    }
}
