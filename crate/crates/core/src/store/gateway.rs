use std::sync::Arc;
use std::time::Duration;

use crate::error::{Error, Result};
use crate::value::SqlValue;

/// Schema as declared by the database, before ids are assigned.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawSchema {
    pub tables: Vec<RawTable>,
    pub foreign_keys: Vec<RawForeignKey>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawTable {
    pub name: String,
    pub columns: Vec<RawColumn>,
    pub primary_key: Vec<String>,
    pub unique_keys: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawColumn {
    pub name: String,
    pub native_type: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawForeignKey {
    pub from_table: String,
    pub from_columns: Vec<String>,
    pub to_table: String,
    /// Empty when the declaration references the primary key implicitly.
    pub to_columns: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Rows {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<SqlValue>>,
}

/// Provider-neutral access to the application database.
pub trait SqlGateway: Send + Sync {
    fn descriptor(&self) -> &str;

    /// Open an independent session. Concurrent statements each get their own.
    fn open_session(&self) -> Result<Box<dyn Session>>;
}

pub trait Session: Send {
    fn introspect(&mut self) -> Result<RawSchema>;

    /// Run one select statement with positional `?` parameters.
    fn run_select(&mut self, sql: &str, params: &[SqlValue], timeout: Option<Duration>) -> Result<Rows>;
}

pub fn introspect(gateway: &dyn SqlGateway) -> Result<RawSchema> {
    gateway.open_session()?.introspect()
}

pub fn run_select(gateway: &dyn SqlGateway, sql: &str, params: &[SqlValue]) -> Result<Rows> {
    gateway.open_session()?.run_select(sql, params, None)
}

/// Open a gateway from a connection descriptor: `sqlite://<path>`,
/// `sqlite::memory:<name>`, or `postgres://...`.
pub fn connect(descriptor: &str) -> Result<Arc<dyn SqlGateway>> {
    if descriptor.starts_with("sqlite:") {
        return Ok(Arc::new(super::sqlite::SqliteGateway::open(descriptor)?));
    }
    #[cfg(feature = "postgres")]
    if descriptor.starts_with("postgres://") || descriptor.starts_with("postgresql://") {
        return Ok(Arc::new(super::postgres::PostgresGateway::open(descriptor)?));
    }
    Err(Error::UnsupportedDescriptor(descriptor.to_owned()))
}

/// Checks shared by every provider before a statement reaches the database.
pub(crate) fn check_statement(sql: &str, params: &[SqlValue]) -> Result<()> {
    let head: String = sql.trim_start().chars().take(6).collect();
    if !head.eq_ignore_ascii_case("select") {
        return Err(Error::WriteRejected);
    }
    let expected = placeholder_positions(sql).len();
    if expected != params.len() {
        return Err(Error::ParameterArity {
            expected,
            actual: params.len(),
        });
    }
    Ok(())
}

/// Byte offsets of `?` placeholders outside string literals and quoted
/// identifiers.
pub(crate) fn placeholder_positions(sql: &str) -> Vec<usize> {
    let mut out = Vec::new();
    let mut quote: Option<char> = None;
    for (i, ch) in sql.char_indices() {
        match quote {
            Some(q) if ch == q => quote = None,
            Some(_) => {}
            None => match ch {
                '\'' | '"' => quote = Some(ch),
                '?' => out.push(i),
                _ => {}
            },
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn placeholders_skip_quoted_text() {
        assert_eq!(
            placeholder_positions(r#"select "a?" from t where x = ? and y = '?'"#).len(),
            1
        );
        assert_eq!(placeholder_positions("select 1").len(), 0);
    }

    #[test]
    fn only_selects_pass() {
        assert!(check_statement("  SELECT 1", &[]).is_ok());
        assert!(matches!(
            check_statement("delete from t", &[]),
            Err(Error::WriteRejected)
        ));
        assert!(matches!(
            check_statement("select * from t where a = ?", &[]),
            Err(Error::ParameterArity { expected: 1, actual: 0 })
        ));
    }

    #[test]
    fn unknown_descriptor_is_rejected() {
        assert!(matches!(connect("mysql://x"), Err(Error::UnsupportedDescriptor(_))));
    }
}
