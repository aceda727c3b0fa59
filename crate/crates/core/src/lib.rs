//! Keyword search over relational databases.
//!
//! A database is registered once: its catalog (tables, columns, keys and
//! foreign keys) is introspected, join paths over the foreign-key graph are
//! precomputed, and a value-to-attribute index is built over selected
//! columns. Keyword queries are then bound to schema elements and stored
//! values, compiled into parameterized SQL (one statement per relation),
//! executed, optionally ranked, and presented as linked tuple sets.
//!
//! The pipeline, end to end:
//!
//! ```text
//! tokenize -> bind -> interpret -> classify -> plan -> rank -> execute -> annotate -> render
//! ```
//!
//! [`search::Searcher`] wires these stages together and is shared by the
//! HTTP server and the command-line tool.

pub mod catalog;
pub mod config;
pub mod engine;
pub mod error;
pub mod lexicon;
pub mod parser;
pub mod planner;
pub mod presenter;
pub mod search;
pub mod store;
pub mod value;

pub use catalog::{
    ColumnId, ColumnMeta, ColumnRef, DataType, FkRef, ForeignKeySpec, JoinPath, KeySpec, Orientation, PathStep,
    SchemaCatalog, TableId, TableMeta,
};
pub use config::{Config, UnmappedKeywordPolicy};
pub use engine::{SortDirection, SortOrderSpec, TupleSet};
pub use error::{Error, Result};
pub use lexicon::{IndexPolicy, Lexicon, VMapEntry, VocEntry, VocScope};
pub use parser::{Interpretation, PathTerm, QueryTree, Token, TokenKind};
pub use planner::{GeneratedQuery, QueryClass, QueryPlan, QueryRole, RankMode};
pub use presenter::{LinkAnnotation, LinkKind, ResultDocument};
pub use search::{
    register_application, DrillDirection, DrillRequest, InterpMode, OutputFormat, RegistrationReport, Rendered,
    SearchOutcome, SearchRequest, Searcher,
};
pub use store::annotations::AdminAnnotations;
pub use store::{SqlGateway, SsDb, SsDbContent};
pub use value::SqlValue;
