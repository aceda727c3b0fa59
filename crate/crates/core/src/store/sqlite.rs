//! Embedded SQLite provider.

use std::time::{Duration, Instant};

use rusqlite::functions::FunctionFlags;
use rusqlite::types::ValueRef;
use rusqlite::{Connection, OpenFlags};

use super::gateway::{check_statement, RawColumn, RawForeignKey, RawSchema, RawTable, Rows, Session, SqlGateway};
use crate::error::{Error, Result};
use crate::value::SqlValue;

#[derive(Debug, Clone)]
enum Location {
    File(String),
    Memory(String),
}

pub struct SqliteGateway {
    descriptor: String,
    location: Location,
}

impl SqliteGateway {
    /// `sqlite://relative/path.db`, `sqlite:///abs/path.db`, or
    /// `sqlite::memory:<name>` for a named shared in-memory database (which
    /// lives as long as some connection to it stays open).
    pub fn open(descriptor: &str) -> Result<SqliteGateway> {
        let location = if let Some(name) = descriptor.strip_prefix("sqlite::memory:") {
            Location::Memory(name.to_owned())
        } else if let Some(path) = descriptor.strip_prefix("sqlite://") {
            if path.is_empty() {
                return Err(Error::UnsupportedDescriptor(descriptor.to_owned()));
            }
            Location::File(path.to_owned())
        } else {
            return Err(Error::UnsupportedDescriptor(descriptor.to_owned()));
        };
        let gateway = SqliteGateway {
            descriptor: descriptor.to_owned(),
            location,
        };
        // fail early on unreachable files
        gateway.connection()?;
        Ok(gateway)
    }

    fn connection(&self) -> Result<Connection> {
        let fail = |e: rusqlite::Error| Error::Connection {
            descriptor: self.descriptor.clone(),
            message: e.to_string(),
        };
        let conn = match &self.location {
            Location::File(path) => {
                Connection::open_with_flags(path, OpenFlags::SQLITE_OPEN_READ_ONLY | OpenFlags::SQLITE_OPEN_NO_MUTEX)
                    .map_err(fail)?
            }
            Location::Memory(name) => {
                let conn = Connection::open_with_flags(
                    memory_uri(name),
                    OpenFlags::SQLITE_OPEN_READ_WRITE | OpenFlags::SQLITE_OPEN_URI | OpenFlags::SQLITE_OPEN_NO_MUTEX,
                )
                .map_err(fail)?;
                conn.pragma_update(None, "query_only", true).map_err(fail)?;
                conn
            }
        };
        install_functions(&conn).map_err(fail)?;
        Ok(conn)
    }
}

/// URI for a named shared in-memory database, for fixtures that need to
/// create one and keep it alive.
pub fn memory_uri(name: &str) -> String {
    format!("file:{name}?mode=memory&cache=shared")
}

/// Unicode-aware `lower` and `trim`, so that SQL-side normalization agrees
/// with [`crate::value::normalize`].
pub fn install_functions(conn: &Connection) -> rusqlite::Result<()> {
    let flags = FunctionFlags::SQLITE_UTF8 | FunctionFlags::SQLITE_DETERMINISTIC;
    conn.create_scalar_function("lower", 1, flags, |ctx| {
        Ok(match ctx.get_raw(0) {
            ValueRef::Text(t) => Some(String::from_utf8_lossy(t).to_lowercase()),
            ValueRef::Null => None,
            other => Some(value_ref_text(other)),
        })
    })?;
    conn.create_scalar_function("trim", 1, flags, |ctx| {
        Ok(match ctx.get_raw(0) {
            ValueRef::Text(t) => Some(String::from_utf8_lossy(t).trim().to_owned()),
            ValueRef::Null => None,
            other => Some(value_ref_text(other)),
        })
    })?;
    Ok(())
}

fn value_ref_text(v: ValueRef<'_>) -> String {
    match v {
        ValueRef::Integer(i) => i.to_string(),
        ValueRef::Real(f) => format!("{f}"),
        ValueRef::Text(t) | ValueRef::Blob(t) => String::from_utf8_lossy(t).into_owned(),
        ValueRef::Null => String::new(),
    }
}

impl SqlGateway for SqliteGateway {
    fn descriptor(&self) -> &str {
        &self.descriptor
    }

    fn open_session(&self) -> Result<Box<dyn Session>> {
        Ok(Box::new(SqliteSession {
            conn: self.connection()?,
        }))
    }
}

struct SqliteSession {
    conn: Connection,
}

fn sql_err(e: rusqlite::Error) -> Error {
    Error::Sql {
        target: String::new(),
        message: e.to_string(),
    }
}

fn to_sql_value(v: ValueRef<'_>) -> SqlValue {
    match v {
        ValueRef::Null => SqlValue::Null,
        ValueRef::Integer(i) => SqlValue::Integer(i),
        ValueRef::Real(f) => SqlValue::Real(f),
        ValueRef::Text(t) | ValueRef::Blob(t) => SqlValue::Text(String::from_utf8_lossy(t).into_owned()),
    }
}

impl SqliteSession {
    fn strings(&self, sql: &str, arg: &str) -> Result<Vec<Vec<SqlValue>>> {
        Ok(self.select(sql, &[SqlValue::Text(arg.to_owned())])?.rows)
    }

    fn select(&self, sql: &str, params: &[SqlValue]) -> Result<Rows> {
        check_statement(sql, params)?;
        let mut stmt = self.conn.prepare(sql).map_err(sql_err)?;
        let columns: Vec<String> = stmt.column_names().into_iter().map(str::to_owned).collect();
        let bound: Vec<rusqlite::types::Value> = params
            .iter()
            .map(|p| match p {
                SqlValue::Null => rusqlite::types::Value::Null,
                SqlValue::Integer(i) => rusqlite::types::Value::Integer(*i),
                SqlValue::Real(f) => rusqlite::types::Value::Real(*f),
                SqlValue::Text(s) => rusqlite::types::Value::Text(s.clone()),
            })
            .collect();
        let width = columns.len();
        let mut rows = stmt.query(rusqlite::params_from_iter(bound.iter())).map_err(sql_err)?;
        let mut out = Vec::new();
        while let Some(row) = rows.next().map_err(sql_err)? {
            let mut cells = Vec::with_capacity(width);
            for i in 0..width {
                cells.push(to_sql_value(row.get_ref(i).map_err(sql_err)?));
            }
            out.push(cells);
        }
        Ok(Rows { columns, rows: out })
    }
}

fn text(v: &SqlValue) -> String {
    v.display_text().unwrap_or_default()
}

impl Session for SqliteSession {
    fn introspect(&mut self) -> Result<RawSchema> {
        let names = self.select(
            "select name from sqlite_master where type = 'table' and name not like 'sqlite\\_%' escape '\\' order by name",
            &[],
        )?;
        let mut schema = RawSchema::default();
        for row in names.rows {
            let name = text(&row[0]);
            let info = self.strings("select name, type, pk from pragma_table_info(?) order by cid", &name)?;
            let columns: Vec<RawColumn> = info
                .iter()
                .map(|r| RawColumn {
                    name: text(&r[0]),
                    native_type: text(&r[1]),
                })
                .collect();
            let mut pk: Vec<(i64, String)> = info
                .iter()
                .filter_map(|r| match r[2] {
                    SqlValue::Integer(p) if p > 0 => Some((p, text(&r[0]))),
                    _ => None,
                })
                .collect();
            pk.sort();
            let mut unique_keys = Vec::new();
            let indexes = self.strings(
                "select name from pragma_index_list(?) where \"unique\" = 1 and origin <> 'pk' order by name",
                &name,
            )?;
            for idx in indexes {
                let cols = self.strings("select name from pragma_index_info(?) order by seqno", &text(&idx[0]))?;
                let cols: Vec<String> = cols.iter().map(|r| text(&r[0])).collect();
                // expression indexes report null column names
                if !cols.is_empty() && cols.iter().all(|c| !c.is_empty()) {
                    unique_keys.push(cols);
                }
            }
            let fks = self.strings(
                "select id, \"table\", \"from\", \"to\" from pragma_foreign_key_list(?) order by id, seq",
                &name,
            )?;
            let mut current: Option<(i64, RawForeignKey)> = None;
            for r in fks {
                let id = match r[0] {
                    SqlValue::Integer(i) => i,
                    _ => -1,
                };
                if current.as_ref().map(|c| c.0) != Some(id) {
                    if let Some((_, fk)) = current.take() {
                        schema.foreign_keys.push(fk);
                    }
                    current = Some((
                        id,
                        RawForeignKey {
                            from_table: name.clone(),
                            from_columns: Vec::new(),
                            to_table: text(&r[1]),
                            to_columns: Vec::new(),
                        },
                    ));
                }
                let fk = &mut current.as_mut().unwrap().1;
                fk.from_columns.push(text(&r[2]));
                if !r[3].is_null() {
                    fk.to_columns.push(text(&r[3]));
                }
            }
            if let Some((_, mut fk)) = current.take() {
                if fk.to_columns.len() != fk.from_columns.len() {
                    fk.to_columns.clear();
                }
                schema.foreign_keys.push(fk);
            }
            schema.tables.push(RawTable {
                name,
                columns,
                primary_key: pk.into_iter().map(|p| p.1).collect(),
                unique_keys,
            });
        }
        Ok(schema)
    }

    fn run_select(&mut self, sql: &str, params: &[SqlValue], timeout: Option<Duration>) -> Result<Rows> {
        let deadline = timeout.map(|t| Instant::now() + t);
        if let Some(deadline) = deadline {
            self.conn
                .progress_handler(1000, Some(move || Instant::now() > deadline))?;
        }
        let result = self.select(sql, params);
        if deadline.is_some() {
            self.conn.progress_handler(0, None::<fn() -> bool>)?;
        }
        match result {
            Err(Error::Sql { message, .. })
                if deadline.is_some_and(|d| Instant::now() > d) && message.contains("interrupt") =>
            {
                Err(Error::Timeout {
                    target: String::new(),
                    seconds: timeout.unwrap_or_default().as_secs(),
                })
            }
            other => other,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn memory_fixture(name: &str) -> Connection {
        let conn = Connection::open_with_flags(
            memory_uri(name),
            OpenFlags::SQLITE_OPEN_READ_WRITE | OpenFlags::SQLITE_OPEN_CREATE | OpenFlags::SQLITE_OPEN_URI,
        )
        .unwrap();
        conn.execute_batch(
            "create table P (id integer primary key, name text unique, code text);
             create table C (a integer, b integer, p_id integer references P(id), primary key (a, b));
             insert into P values (1, 'Ünïcode', 'x'), (2, '  padded ', 'y');
             insert into C values (1, 1, 1), (1, 2, 2);",
        )
        .unwrap();
        conn
    }

    #[test]
    fn introspection_reads_keys_and_foreign_keys() {
        let _keep = memory_fixture("sqlite_introspect");
        let gw = SqliteGateway::open("sqlite::memory:sqlite_introspect").unwrap();
        let schema = gw.open_session().unwrap().introspect().unwrap();
        let names: Vec<_> = schema.tables.iter().map(|t| t.name.as_str()).collect();
        assert_eq!(names, ["C", "P"]);
        assert_eq!(schema.tables[0].primary_key, ["a", "b"]);
        assert_eq!(schema.tables[1].unique_keys, vec![vec!["name".to_string()]]);
        assert_eq!(schema.foreign_keys.len(), 1);
        assert_eq!(schema.foreign_keys[0].to_columns, ["id"]);
    }

    #[test]
    fn normalization_functions_are_unicode_aware() {
        let _keep = memory_fixture("sqlite_functions");
        let gw = SqliteGateway::open("sqlite::memory:sqlite_functions").unwrap();
        let mut s = gw.open_session().unwrap();
        let rows = s
            .run_select(
                "select id from P where lower(trim(name)) = ?",
                &["ünïcode".into()],
                None,
            )
            .unwrap();
        assert_eq!(rows.rows, vec![vec![SqlValue::Integer(1)]]);
        let rows = s
            .run_select("select id from P where lower(trim(name)) = ?", &["padded".into()], None)
            .unwrap();
        assert_eq!(rows.rows, vec![vec![SqlValue::Integer(2)]]);
    }

    #[test]
    fn sessions_are_read_only() {
        let _keep = memory_fixture("sqlite_readonly");
        let gw = SqliteGateway::open("sqlite::memory:sqlite_readonly").unwrap();
        let mut s = gw.open_session().unwrap();
        assert!(matches!(
            s.run_select("delete from P", &[], None),
            Err(Error::WriteRejected)
        ));
        // a select wrapping a write is still refused by the engine
        assert!(s.run_select("select 1; delete from P", &[], None).is_err());
    }

    #[test]
    fn bad_descriptors() {
        assert!(SqliteGateway::open("sqlite://").is_err());
        assert!(SqliteGateway::open("sqlite:///nonexistent/dir/db.sqlite").is_err());
    }
}
