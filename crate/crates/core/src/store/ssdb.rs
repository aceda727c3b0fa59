//! The search system's own database: catalog, index and vocabulary,
//! persisted in an embedded SQLite file separate from the application
//! database.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use rusqlite::{params, Connection, OpenFlags};

use crate::catalog::{
    ColumnId, ColumnMeta, ColumnRef, DataType, ForeignKeySpec, JoinPath, KeySpec, SchemaCatalog, TableId, TableMeta,
};
use crate::engine::{SortDirection, SortOrderSpec};
use crate::error::{Error, Result};
use crate::lexicon::{Lexicon, VMapEntry, VocEntry, VocScope};

const SCHEMA: &str = "
create table ss_tbl (tid integer primary key, name text not null, description text not null);
create table ss_col (tid integer not null, column_id integer not null, name text not null,
                     type text not null, description text not null, primary key (tid, column_id));
create table ss_pkey (tid integer not null, k_no integer not null, column_id integer not null);
create table ss_fkey (t1_id integer not null, f_no integer not null, column_id1 integer not null,
                      t2_id integer not null, k_no integer not null, column_id2 integer not null);
create table ss_path (path text not null);
create table ss_vmap (value text not null, column_id integer not null, tid integer not null,
                      primary key (value, tid, column_id));
create index ss_vmap_value on ss_vmap (value);
create table ss_voc (internal text not null, external text not null, scope text not null,
                     primary key (external, scope));
create table ss_sortorder (tid integer not null, column_id integer not null, direction text not null);
create table ss_meta (key text primary key, value text not null);
";

const TABLES: [&str; 9] = [
    "ss_tbl",
    "ss_col",
    "ss_pkey",
    "ss_fkey",
    "ss_path",
    "ss_vmap",
    "ss_voc",
    "ss_sortorder",
    "ss_meta",
];

/// Everything persisted in the store.
#[derive(Debug, Clone, PartialEq)]
pub struct SsDbContent {
    pub catalog: SchemaCatalog,
    pub lexicon: Lexicon,
    pub sort_orders: Vec<SortOrderSpec>,
    /// Free-form settings recorded at registration (e.g. the connection
    /// descriptor of the application database).
    pub meta: BTreeMap<String, String>,
}

/// Handle on a store file. Writes go through a single connection behind a
/// lock.
pub struct SsDb {
    path: PathBuf,
    writer: Mutex<Connection>,
}

fn store_err(e: rusqlite::Error) -> Error {
    Error::Store(e.to_string())
}

impl SsDb {
    /// Create (or overwrite) a store at `path`.
    pub fn create(path: &Path) -> Result<SsDb> {
        let conn = Connection::open(path).map_err(store_err)?;
        let tx = conn.unchecked_transaction().map_err(store_err)?;
        for t in TABLES {
            tx.execute_batch(&format!("drop table if exists {t};"))
                .map_err(store_err)?;
        }
        tx.execute_batch(SCHEMA).map_err(store_err)?;
        tx.commit().map_err(store_err)?;
        Ok(SsDb {
            path: path.to_owned(),
            writer: Mutex::new(conn),
        })
    }

    /// Open an existing store; missing files and missing tables are errors.
    pub fn open(path: &Path) -> Result<SsDb> {
        if !path.is_file() {
            return Err(Error::Store(format!("no search store at {}", path.display())));
        }
        let conn = Connection::open_with_flags(path, OpenFlags::SQLITE_OPEN_READ_WRITE).map_err(store_err)?;
        for t in TABLES {
            let n: i64 = conn
                .query_row(
                    "select count(*) from sqlite_master where type = 'table' and name = ?",
                    [t],
                    |r| r.get(0),
                )
                .map_err(|e| Error::Store(format!("{}: {e}", path.display())))?;
            if n == 0 {
                return Err(Error::Store(format!("{}: missing table {t}", path.display())));
            }
        }
        Ok(SsDb {
            path: path.to_owned(),
            writer: Mutex::new(conn),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn save(&self, content: &SsDbContent) -> Result<()> {
        let conn = self.writer.lock().unwrap();
        let tx = conn.unchecked_transaction().map_err(store_err)?;
        for t in TABLES {
            tx.execute(&format!("delete from {t}"), []).map_err(store_err)?;
        }
        let cat = &content.catalog;
        for t in cat.tables() {
            tx.execute(
                "insert into ss_tbl values (?, ?, ?)",
                params![t.table_id.0, t.name, t.description],
            )
            .map_err(store_err)?;
        }
        for c in cat.columns() {
            tx.execute(
                "insert into ss_col values (?, ?, ?, ?, ?)",
                params![c.table_id.0, c.column_id.0, c.name, c.data_type.as_str(), c.description],
            )
            .map_err(store_err)?;
        }
        for k in cat.keys() {
            for c in &k.columns {
                tx.execute(
                    "insert into ss_pkey values (?, ?, ?)",
                    params![k.table_id.0, k.key_no, c.0],
                )
                .map_err(store_err)?;
            }
        }
        for f in cat.foreign_keys() {
            for (a, b) in &f.column_pairs {
                tx.execute(
                    "insert into ss_fkey values (?, ?, ?, ?, ?, ?)",
                    params![f.from_table.0, f.fk_no, a.0, f.to_table.0, f.to_key_no, b.0],
                )
                .map_err(store_err)?;
            }
        }
        for p in cat.all_paths() {
            tx.execute("insert into ss_path values (?)", [p.encode()])
                .map_err(store_err)?;
        }
        for e in content.lexicon.vmap_entries() {
            tx.execute(
                "insert into ss_vmap values (?, ?, ?)",
                params![e.value, e.column.column.0, e.column.table.0],
            )
            .map_err(store_err)?;
        }
        for v in content.lexicon.voc_entries() {
            tx.execute(
                "insert into ss_voc values (?, ?, ?)",
                params![v.internal, v.external, v.scope.as_str()],
            )
            .map_err(store_err)?;
        }
        for s in &content.sort_orders {
            tx.execute(
                "insert into ss_sortorder values (?, ?, ?)",
                params![s.table_id.0, s.column_id.0, s.direction.as_str()],
            )
            .map_err(store_err)?;
        }
        let mut meta = content.meta.clone();
        meta.insert("max_hops".into(), cat.max_hops().to_string());
        for (k, v) in &meta {
            tx.execute("insert into ss_meta values (?, ?)", params![k, v])
                .map_err(store_err)?;
        }
        tx.commit().map_err(store_err)
    }

    pub fn load(&self) -> Result<SsDbContent> {
        let conn = self.writer.lock().unwrap();
        let corrupt = |m: String| Error::Store(format!("{}: {m}", self.path.display()));
        let mut tables = Vec::new();
        let mut stmt = conn
            .prepare("select tid, name, description from ss_tbl order by tid")
            .map_err(store_err)?;
        let mut rows = stmt.query([]).map_err(store_err)?;
        while let Some(r) = rows.next().map_err(store_err)? {
            tables.push(TableMeta {
                table_id: TableId(r.get(0).map_err(store_err)?),
                name: r.get(1).map_err(store_err)?,
                description: r.get(2).map_err(store_err)?,
            });
        }
        drop(rows);
        drop(stmt);

        let mut columns = Vec::new();
        let mut stmt = conn
            .prepare("select tid, column_id, name, type, description from ss_col order by tid, column_id")
            .map_err(store_err)?;
        let mut rows = stmt.query([]).map_err(store_err)?;
        while let Some(r) = rows.next().map_err(store_err)? {
            let ty: String = r.get(3).map_err(store_err)?;
            columns.push(ColumnMeta {
                table_id: TableId(r.get(0).map_err(store_err)?),
                column_id: ColumnId(r.get(1).map_err(store_err)?),
                name: r.get(2).map_err(store_err)?,
                data_type: DataType::parse(&ty).ok_or_else(|| corrupt(format!("unknown column type `{ty}`")))?,
                description: r.get(4).map_err(store_err)?,
            });
        }
        drop(rows);
        drop(stmt);

        let mut keys: Vec<KeySpec> = Vec::new();
        let mut stmt = conn
            .prepare("select tid, k_no, column_id from ss_pkey order by rowid")
            .map_err(store_err)?;
        let mut rows = stmt.query([]).map_err(store_err)?;
        while let Some(r) = rows.next().map_err(store_err)? {
            let (tid, k_no, col): (u32, u32, u32) = (
                r.get(0).map_err(store_err)?,
                r.get(1).map_err(store_err)?,
                r.get(2).map_err(store_err)?,
            );
            match keys.iter_mut().find(|k| k.table_id.0 == tid && k.key_no == k_no) {
                Some(k) => k.columns.push(ColumnId(col)),
                None => keys.push(KeySpec {
                    table_id: TableId(tid),
                    key_no: k_no,
                    columns: vec![ColumnId(col)],
                }),
            }
        }
        drop(rows);
        drop(stmt);

        let mut fks: Vec<ForeignKeySpec> = Vec::new();
        let mut stmt = conn
            .prepare("select t1_id, f_no, column_id1, t2_id, k_no, column_id2 from ss_fkey order by rowid")
            .map_err(store_err)?;
        let mut rows = stmt.query([]).map_err(store_err)?;
        while let Some(r) = rows.next().map_err(store_err)? {
            let t1 = TableId(r.get(0).map_err(store_err)?);
            let f_no: u32 = r.get(1).map_err(store_err)?;
            let pair = (
                ColumnId(r.get(2).map_err(store_err)?),
                ColumnId(r.get(5).map_err(store_err)?),
            );
            let t2 = TableId(r.get(3).map_err(store_err)?);
            let k_no: u32 = r.get(4).map_err(store_err)?;
            match fks.iter_mut().find(|f| f.from_table == t1 && f.fk_no == f_no) {
                Some(f) => {
                    if f.to_table != t2 || f.to_key_no != k_no {
                        return Err(corrupt(format!("foreign key {}.{f_no} has mixed targets", t1.0)));
                    }
                    f.column_pairs.push(pair);
                }
                None => fks.push(ForeignKeySpec {
                    from_table: t1,
                    fk_no: f_no,
                    column_pairs: vec![pair],
                    to_table: t2,
                    to_key_no: k_no,
                }),
            }
        }
        drop(rows);
        drop(stmt);

        let mut catalog = SchemaCatalog::from_parts(tables, columns, keys, fks).map_err(|e| corrupt(e.to_string()))?;

        let meta: BTreeMap<String, String> =
            collect(&conn, "select key, value from ss_meta", |r| Ok((r.get(0)?, r.get(1)?)))?
                .into_iter()
                .collect();
        let max_hops = meta
            .get("max_hops")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| corrupt("missing max_hops".into()))?;
        let path_strings: Vec<String> = collect(&conn, "select path from ss_path order by rowid", |r| r.get(0))?;
        let paths = path_strings
            .iter()
            .map(|s| JoinPath::decode(s, &catalog))
            .collect::<Result<Vec<_>>>()?;
        catalog.set_paths(paths, max_hops);

        let vmap: Vec<VMapEntry> = collect(&conn, "select value, column_id, tid from ss_vmap", |r| {
            Ok(VMapEntry {
                value: r.get(0)?,
                column: ColumnRef::new(TableId(r.get(2)?), ColumnId(r.get(1)?)),
            })
        })?;
        let voc_rows: Vec<(String, String, String)> =
            collect(&conn, "select internal, external, scope from ss_voc", |r| {
                Ok((r.get(0)?, r.get(1)?, r.get(2)?))
            })?;
        let mut voc = Vec::new();
        for (internal, external, scope) in voc_rows {
            let scope =
                VocScope::parse(&scope).ok_or_else(|| corrupt(format!("unknown vocabulary scope `{scope}`")))?;
            voc.push(VocEntry {
                external,
                internal,
                scope,
            });
        }
        let sort_rows: Vec<(u32, u32, String)> = collect(
            &conn,
            "select tid, column_id, direction from ss_sortorder order by rowid",
            |r| Ok((r.get(0)?, r.get(1)?, r.get(2)?)),
        )?;
        let mut sort_orders = Vec::new();
        for (tid, col, dir) in sort_rows {
            let spec = SortOrderSpec {
                table_id: TableId(tid),
                column_id: ColumnId(col),
                direction: SortDirection::parse(&dir).ok_or_else(|| corrupt(format!("bad sort direction `{dir}`")))?,
            };
            if catalog.column(ColumnRef::new(spec.table_id, spec.column_id)).is_none() {
                return Err(corrupt("sort order names an unknown column".into()));
            }
            sort_orders.push(spec);
        }
        let mut meta = meta;
        meta.remove("max_hops");
        Ok(SsDbContent {
            catalog,
            lexicon: Lexicon::from_parts(vmap, voc),
            sort_orders,
            meta,
        })
    }

    /// Persist index entries discovered after registration.
    pub fn append_vmap(&self, entries: &[VMapEntry]) -> Result<()> {
        let conn = self.writer.lock().unwrap();
        let tx = conn.unchecked_transaction().map_err(store_err)?;
        for e in entries {
            tx.execute(
                "insert or ignore into ss_vmap values (?, ?, ?)",
                params![e.value, e.column.column.0, e.column.table.0],
            )
            .map_err(store_err)?;
        }
        tx.commit().map_err(store_err)
    }
}

fn collect<T>(
    conn: &Connection,
    sql: &str,
    f: impl FnMut(&rusqlite::Row<'_>) -> rusqlite::Result<T>,
) -> Result<Vec<T>> {
    let mut stmt = conn.prepare(sql).map_err(store_err)?;
    let rows = stmt.query_map([], f).map_err(store_err)?;
    rows.collect::<rusqlite::Result<Vec<T>>>().map_err(store_err)
}

pub fn save_ssdb(content: &SsDbContent, location: &Path) -> Result<()> {
    SsDb::create(location)?.save(content)
}

pub fn load_ssdb(location: &Path) -> Result<SsDbContent> {
    SsDb::open(location)?.load()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_store_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(load_ssdb(&dir.path().join("nope.db")).is_err());
    }

    #[test]
    fn foreign_file_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("other.db");
        Connection::open(&p)
            .unwrap()
            .execute_batch("create table x (a)")
            .unwrap();
        assert!(load_ssdb(&p).is_err());
        std::fs::write(&p, b"not a database at all, just some bytes padding padding").unwrap();
        assert!(load_ssdb(&p).is_err());
    }
}
