//! Application database metadata: tables, columns, candidate keys, foreign
//! keys, and precomputed join paths over the foreign-key graph.

mod paths;
mod register;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use paths::{enumerate_paths, DEFAULT_MAX_HOPS};
pub use register::{register_database, Registration};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TableId(pub u32);

/// Column identifier, unique within its table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ColumnId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ColumnRef {
    pub table: TableId,
    pub column: ColumnId,
}

impl ColumnRef {
    pub fn new(table: TableId, column: ColumnId) -> Self {
        ColumnRef { table, column }
    }
}

/// Identifies a foreign key by its holding table and per-table number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FkRef {
    pub table: TableId,
    pub fk_no: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataType {
    Text,
    Integer,
    Decimal,
    Date,
    Other,
}

impl DataType {
    /// Collapse a native declared type name into the five-way enum.
    pub fn from_native(native: &str) -> DataType {
        let t = native.trim().to_ascii_uppercase();
        if t.is_empty() {
            return DataType::Other;
        }
        if t.contains("DATE") || t.contains("TIME") {
            DataType::Date
        } else if t.contains("INT") || t == "SERIAL" || t == "BIGSERIAL" {
            DataType::Integer
        } else if t.contains("CHAR") || t.contains("CLOB") || t.contains("TEXT") || t == "NAME" {
            DataType::Text
        } else if t.contains("REAL")
            || t.contains("FLOA")
            || t.contains("DOUB")
            || t.contains("DEC")
            || t.contains("NUMERIC")
        {
            DataType::Decimal
        } else {
            DataType::Other
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DataType::Text => "text",
            DataType::Integer => "integer",
            DataType::Decimal => "decimal",
            DataType::Date => "date",
            DataType::Other => "other",
        }
    }

    pub fn parse(s: &str) -> Option<DataType> {
        Some(match s {
            "text" => DataType::Text,
            "integer" => DataType::Integer,
            "decimal" => DataType::Decimal,
            "date" => DataType::Date,
            "other" => DataType::Other,
            _ => return None,
        })
    }

    pub fn is_numeric(self) -> bool {
        matches!(self, DataType::Integer | DataType::Decimal)
    }

    /// Whether values of the two types can be meaningfully equated in a
    /// foreign-key pairing.
    pub fn compatible_with(self, other: DataType) -> bool {
        self == other
            || (self.is_numeric() && other.is_numeric())
            || matches!(
                (self, other),
                (DataType::Text, DataType::Date) | (DataType::Date, DataType::Text)
            )
            || self == DataType::Other
            || other == DataType::Other
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TableMeta {
    pub table_id: TableId,
    pub name: String,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ColumnMeta {
    pub table_id: TableId,
    pub column_id: ColumnId,
    pub name: String,
    pub data_type: DataType,
    pub description: String,
}

impl ColumnMeta {
    pub fn column_ref(&self) -> ColumnRef {
        ColumnRef::new(self.table_id, self.column_id)
    }
}

/// A candidate key. `key_no == 1` is the primary key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeySpec {
    pub table_id: TableId,
    pub key_no: u32,
    pub columns: Vec<ColumnId>,
}

impl KeySpec {
    pub fn is_primary(&self) -> bool {
        self.key_no == 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForeignKeySpec {
    pub from_table: TableId,
    pub fk_no: u32,
    /// (referencing column, referenced column), in referenced-key order.
    pub column_pairs: Vec<(ColumnId, ColumnId)>,
    pub to_table: TableId,
    pub to_key_no: u32,
}

impl ForeignKeySpec {
    pub fn fk_ref(&self) -> FkRef {
        FkRef {
            table: self.from_table,
            fk_no: self.fk_no,
        }
    }

    pub fn from_columns(&self) -> impl Iterator<Item = ColumnId> + '_ {
        self.column_pairs.iter().map(|p| p.0)
    }

    pub fn to_columns(&self) -> impl Iterator<Item = ColumnId> + '_ {
        self.column_pairs.iter().map(|p| p.1)
    }

    /// The table on the other end of this key, seen from `table`.
    pub fn other_end(&self, table: TableId) -> Option<TableId> {
        if table == self.from_table {
            Some(self.to_table)
        } else if table == self.to_table {
            Some(self.from_table)
        } else {
            None
        }
    }
}

/// Direction in which a path step traverses its foreign key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Orientation {
    /// From the referencing (foreign-key holding) table to the referenced one.
    Forward,
    /// From the referenced table to the referencing one.
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PathStep {
    pub fk: FkRef,
    pub orientation: Orientation,
}

/// A simple path through the foreign-key graph: `tables[i]` and
/// `tables[i + 1]` are connected by `steps[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct JoinPath {
    pub tables: Vec<TableId>,
    pub steps: Vec<PathStep>,
}

impl JoinPath {
    pub fn hops(&self) -> usize {
        self.steps.len()
    }

    pub fn start(&self) -> TableId {
        self.tables[0]
    }

    pub fn end(&self) -> TableId {
        *self.tables.last().expect("paths have at least two tables")
    }

    pub fn reversed(&self) -> JoinPath {
        let tables = self.tables.iter().rev().copied().collect();
        let steps = self
            .steps
            .iter()
            .rev()
            .map(|s| PathStep {
                fk: s.fk,
                orientation: match s.orientation {
                    Orientation::Forward => Orientation::Backward,
                    Orientation::Backward => Orientation::Forward,
                },
            })
            .collect();
        JoinPath { tables, steps }
    }

    /// Storage form: tables and foreign-key edges alternately, e.g.
    /// `T3,F3.1,T1,F1.1,T2`.
    pub fn encode(&self) -> String {
        let mut parts = Vec::with_capacity(self.tables.len() * 2);
        for (i, t) in self.tables.iter().enumerate() {
            parts.push(format!("T{}", t.0));
            if let Some(step) = self.steps.get(i) {
                parts.push(format!("F{}.{}", step.fk.table.0, step.fk.fk_no));
            }
        }
        parts.join(",")
    }

    /// Inverse of [`JoinPath::encode`]; orientation is recovered from the
    /// catalog's foreign keys.
    pub fn decode(s: &str, catalog: &SchemaCatalog) -> Result<JoinPath> {
        let bad = || Error::Store(format!("malformed path string `{s}`"));
        let parts: Vec<&str> = s.split(',').collect();
        if parts.len() < 3 || parts.len().is_multiple_of(2) {
            return Err(bad());
        }
        let mut tables = Vec::new();
        let mut steps = Vec::new();
        for (i, part) in parts.iter().enumerate() {
            if i % 2 == 0 {
                let id = part.strip_prefix('T').and_then(|n| n.parse().ok()).ok_or_else(bad)?;
                tables.push(TableId(id));
            } else {
                let (t, n) = part.strip_prefix('F').and_then(|p| p.split_once('.')).ok_or_else(bad)?;
                let fk = FkRef {
                    table: TableId(t.parse().map_err(|_| bad())?),
                    fk_no: n.parse().map_err(|_| bad())?,
                };
                steps.push(fk);
            }
        }
        let steps = steps
            .into_iter()
            .enumerate()
            .map(|(i, fk)| {
                let spec = catalog.foreign_key(fk).ok_or_else(bad)?;
                let (left, right) = (tables[i], tables[i + 1]);
                let orientation = if spec.from_table == left && spec.to_table == right {
                    Orientation::Forward
                } else if spec.to_table == left && spec.from_table == right {
                    Orientation::Backward
                } else {
                    return Err(bad());
                };
                Ok(PathStep { fk, orientation })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(JoinPath { tables, steps })
    }

    /// Human-readable form: `Course -(Study.f2)- Study -(Study.f1)- Student`.
    pub fn display<'a>(&'a self, catalog: &'a SchemaCatalog) -> impl fmt::Display + 'a {
        struct Shown<'a>(&'a JoinPath, &'a SchemaCatalog);
        impl fmt::Display for Shown<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                let Shown(path, catalog) = self;
                for (i, t) in path.tables.iter().enumerate() {
                    f.write_str(catalog.table_name(*t))?;
                    if let Some(step) = path.steps.get(i) {
                        write!(f, " -({}.f{})- ", catalog.table_name(step.fk.table), step.fk.fk_no)?;
                    }
                }
                Ok(())
            }
        }
        Shown(self, catalog)
    }
}

/// Which side of a direct relationship holds the foreign key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DirectLink<'a> {
    pub fk: &'a ForeignKeySpec,
    pub holder: TableId,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemaCatalog {
    tables: Vec<TableMeta>,
    columns: Vec<ColumnMeta>,
    keys: Vec<KeySpec>,
    foreign_keys: Vec<ForeignKeySpec>,
    paths: BTreeMap<(TableId, TableId), Vec<JoinPath>>,
    max_hops: usize,
    table_by_name: HashMap<String, TableId>,
}

impl SchemaCatalog {
    /// Assemble a catalog from its records, checking referential consistency.
    /// Paths start out empty.
    pub fn from_parts(
        mut tables: Vec<TableMeta>,
        mut columns: Vec<ColumnMeta>,
        mut keys: Vec<KeySpec>,
        mut foreign_keys: Vec<ForeignKeySpec>,
    ) -> Result<SchemaCatalog> {
        let inconsistent = |m: String| Err(Error::Store(format!("inconsistent catalog: {m}")));
        tables.sort_by_key(|t| t.table_id);
        columns.sort_by_key(|c| (c.table_id, c.column_id));
        let mut table_by_name = HashMap::new();
        for (i, t) in tables.iter().enumerate() {
            if i > 0 && tables[i - 1].table_id == t.table_id {
                return inconsistent(format!("duplicate table id {}", t.table_id.0));
            }
            if table_by_name.insert(t.name.to_lowercase(), t.table_id).is_some() {
                return inconsistent(format!("duplicate table name `{}`", t.name));
            }
        }
        let mut catalog = SchemaCatalog {
            tables,
            columns,
            keys: Vec::new(),
            foreign_keys: Vec::new(),
            paths: BTreeMap::new(),
            max_hops: 0,
            table_by_name,
        };
        let mut seen_ids = std::collections::HashSet::new();
        let mut seen_names = std::collections::HashSet::new();
        for c in &catalog.columns {
            if catalog.table(c.table_id).is_none() {
                return inconsistent(format!("column `{}` on unknown table {}", c.name, c.table_id.0));
            }
            if !seen_ids.insert((c.table_id, c.column_id)) || !seen_names.insert((c.table_id, c.name.to_lowercase())) {
                return inconsistent(format!("duplicate column `{}`", c.name));
            }
        }
        keys.sort_by_key(|k| (k.table_id, k.key_no));
        for k in &keys {
            if k.columns.is_empty() || k.key_no == 0 {
                return inconsistent(format!("empty or unnumbered key on table {}", k.table_id.0));
            }
            for c in &k.columns {
                if catalog.column(ColumnRef::new(k.table_id, *c)).is_none() {
                    return inconsistent(format!("key column {} not on table {}", c.0, k.table_id.0));
                }
            }
        }
        catalog.keys = keys;
        foreign_keys.sort_by_key(|f| (f.from_table, f.fk_no));
        for f in &foreign_keys {
            let Some(key) = catalog.key(f.to_table, f.to_key_no) else {
                return inconsistent(format!(
                    "foreign key {}.{} references a missing key",
                    f.from_table.0, f.fk_no
                ));
            };
            if key.columns.len() != f.column_pairs.len()
                || key.columns.iter().ne(f.to_columns().collect::<Vec<_>>().iter())
            {
                return inconsistent(format!(
                    "foreign key {}.{} does not match the arity of its referenced key",
                    f.from_table.0, f.fk_no
                ));
            }
            for (from, to) in &f.column_pairs {
                let (Some(a), Some(b)) = (
                    catalog.column(ColumnRef::new(f.from_table, *from)),
                    catalog.column(ColumnRef::new(f.to_table, *to)),
                ) else {
                    return inconsistent(format!(
                        "foreign key {}.{} names unknown columns",
                        f.from_table.0, f.fk_no
                    ));
                };
                if !a.data_type.compatible_with(b.data_type) {
                    return inconsistent(format!(
                        "foreign key {}.{} pairs incompatible types",
                        f.from_table.0, f.fk_no
                    ));
                }
            }
        }
        catalog.foreign_keys = foreign_keys;
        Ok(catalog)
    }

    pub fn tables(&self) -> &[TableMeta] {
        &self.tables
    }

    pub fn columns(&self) -> &[ColumnMeta] {
        &self.columns
    }

    pub fn keys(&self) -> &[KeySpec] {
        &self.keys
    }

    pub fn foreign_keys(&self) -> &[ForeignKeySpec] {
        &self.foreign_keys
    }

    pub fn max_hops(&self) -> usize {
        self.max_hops
    }

    pub fn table(&self, id: TableId) -> Option<&TableMeta> {
        self.tables
            .binary_search_by_key(&id, |t| t.table_id)
            .ok()
            .map(|i| &self.tables[i])
    }

    pub fn require_table(&self, id: TableId) -> Result<&TableMeta> {
        self.table(id).ok_or_else(|| Error::UnknownTable(format!("#{}", id.0)))
    }

    /// Table name, or `?` for unknown ids.
    pub fn table_name(&self, id: TableId) -> &str {
        self.table(id).map(|t| t.name.as_str()).unwrap_or("?")
    }

    /// Case-insensitive lookup by stored name.
    pub fn table_by_name(&self, name: &str) -> Option<&TableMeta> {
        self.table_by_name
            .get(&name.to_lowercase())
            .and_then(|id| self.table(*id))
    }

    pub fn columns_of(&self, table: TableId) -> &[ColumnMeta] {
        let start = self.columns.partition_point(|c| c.table_id < table);
        let end = self.columns.partition_point(|c| c.table_id <= table);
        &self.columns[start..end]
    }

    pub fn column(&self, r: ColumnRef) -> Option<&ColumnMeta> {
        self.columns
            .binary_search_by_key(&(r.table, r.column), |c| (c.table_id, c.column_id))
            .ok()
            .map(|i| &self.columns[i])
    }

    pub fn column_name(&self, r: ColumnRef) -> &str {
        self.column(r).map(|c| c.name.as_str()).unwrap_or("?")
    }

    pub fn column_by_name(&self, table: TableId, name: &str) -> Option<&ColumnMeta> {
        self.columns_of(table)
            .iter()
            .find(|c| c.name.eq_ignore_ascii_case(name))
    }

    pub fn keys_of(&self, table: TableId) -> impl Iterator<Item = &KeySpec> {
        self.keys.iter().filter(move |k| k.table_id == table)
    }

    pub fn key(&self, table: TableId, key_no: u32) -> Option<&KeySpec> {
        self.keys.iter().find(|k| k.table_id == table && k.key_no == key_no)
    }

    pub fn primary_key(&self, table: TableId) -> Option<&KeySpec> {
        self.key(table, 1)
    }

    pub fn foreign_key(&self, fk: FkRef) -> Option<&ForeignKeySpec> {
        self.foreign_keys
            .iter()
            .find(|f| f.from_table == fk.table && f.fk_no == fk.fk_no)
    }

    pub fn foreign_keys_from(&self, table: TableId) -> impl Iterator<Item = &ForeignKeySpec> {
        self.foreign_keys.iter().filter(move |f| f.from_table == table)
    }

    /// Foreign keys in any table that reference one of `table`'s keys.
    pub fn foreign_keys_to(&self, table: TableId) -> impl Iterator<Item = &ForeignKeySpec> {
        self.foreign_keys.iter().filter(move |f| f.to_table == table)
    }

    /// Is this column part of some foreign key held by its table?
    pub fn is_foreign_key_column(&self, r: ColumnRef) -> bool {
        self.foreign_keys_from(r.table)
            .any(|f| f.from_columns().any(|c| c == r.column))
    }

    /// Replace stored paths with every simple path of at most `max_hops`
    /// edges between every ordered pair of distinct tables.
    pub fn compute_paths(mut self, max_hops: usize) -> SchemaCatalog {
        let max_hops = max_hops.max(1);
        self.paths = paths::all_pair_paths(&self, max_hops);
        self.max_hops = max_hops;
        self
    }

    /// Install externally stored paths (used when loading the store).
    pub(crate) fn set_paths(&mut self, paths: Vec<JoinPath>, max_hops: usize) {
        let mut map: BTreeMap<(TableId, TableId), Vec<JoinPath>> = BTreeMap::new();
        for p in paths {
            map.entry((p.start(), p.end())).or_default().push(p);
        }
        for list in map.values_mut() {
            paths::sort_paths(self, list);
        }
        self.paths = map;
        self.max_hops = max_hops;
    }

    /// All stored paths, in (start, end, rank) order.
    pub fn all_paths(&self) -> impl Iterator<Item = &JoinPath> {
        self.paths.values().flatten()
    }

    /// Stored paths between two tables, shortest first.
    pub fn find_paths(&self, from: TableId, to: TableId) -> Result<&[JoinPath]> {
        self.require_table(from)?;
        self.require_table(to)?;
        Ok(self.paths.get(&(from, to)).map(Vec::as_slice).unwrap_or(&[]))
    }

    /// The foreign key directly linking two tables in either direction.
    /// When several exist, the first under the path tie-break order wins.
    pub fn direct_relationship(&self, a: TableId, b: TableId) -> Result<Option<DirectLink<'_>>> {
        self.require_table(a)?;
        self.require_table(b)?;
        let mut candidates: Vec<&ForeignKeySpec> = self
            .foreign_keys
            .iter()
            .filter(|f| (f.from_table == a && f.to_table == b) || (f.from_table == b && f.to_table == a))
            .filter(|f| a != b || f.from_table == f.to_table)
            .collect();
        candidates.sort_by_key(|x| paths::fk_order_key(self, x.fk_ref()));
        Ok(candidates.first().map(|fk| DirectLink {
            fk,
            holder: fk.from_table,
        }))
    }

    /// Columns of `table`'s primary key, or all columns when it has none.
    pub fn ordering_columns(&self, table: TableId) -> Vec<ColumnId> {
        match self.primary_key(table) {
            Some(k) => k.columns.clone(),
            None => self.columns_of(table).iter().map(|c| c.column_id).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> SchemaCatalog {
        let t = |id, name: &str| TableMeta {
            table_id: TableId(id),
            name: name.into(),
            description: String::new(),
        };
        let c = |t, id, name: &str, ty| ColumnMeta {
            table_id: TableId(t),
            column_id: ColumnId(id),
            name: name.into(),
            data_type: ty,
            description: String::new(),
        };
        SchemaCatalog::from_parts(
            vec![t(1, "A"), t(2, "B")],
            vec![
                c(1, 1, "id", DataType::Integer),
                c(2, 1, "id", DataType::Integer),
                c(2, 2, "a_id", DataType::Integer),
            ],
            vec![
                KeySpec {
                    table_id: TableId(1),
                    key_no: 1,
                    columns: vec![ColumnId(1)],
                },
                KeySpec {
                    table_id: TableId(2),
                    key_no: 1,
                    columns: vec![ColumnId(1)],
                },
            ],
            vec![ForeignKeySpec {
                from_table: TableId(2),
                fk_no: 1,
                column_pairs: vec![(ColumnId(2), ColumnId(1))],
                to_table: TableId(1),
                to_key_no: 1,
            }],
        )
        .unwrap()
    }

    #[test]
    fn native_type_mapping() {
        assert_eq!(DataType::from_native("VARCHAR(20)"), DataType::Text);
        assert_eq!(DataType::from_native("integer"), DataType::Integer);
        assert_eq!(DataType::from_native("BIGINT"), DataType::Integer);
        assert_eq!(DataType::from_native("NUMERIC(10,2)"), DataType::Decimal);
        assert_eq!(DataType::from_native("double precision"), DataType::Decimal);
        assert_eq!(DataType::from_native("DATE"), DataType::Date);
        assert_eq!(DataType::from_native("timestamp"), DataType::Date);
        assert_eq!(DataType::from_native("BLOB"), DataType::Other);
        assert_eq!(DataType::from_native(""), DataType::Other);
    }

    #[test]
    fn lookups_are_case_insensitive() {
        let cat = tiny();
        assert_eq!(cat.table_by_name("b").unwrap().table_id, TableId(2));
        assert_eq!(cat.column_by_name(TableId(2), "A_ID").unwrap().column_id, ColumnId(2));
        assert!(cat.is_foreign_key_column(ColumnRef::new(TableId(2), ColumnId(2))));
        assert!(!cat.is_foreign_key_column(ColumnRef::new(TableId(2), ColumnId(1))));
    }

    #[test]
    fn foreign_key_arity_is_checked() {
        let cat = tiny();
        let mut fks = cat.foreign_keys().to_vec();
        fks[0].column_pairs.push((ColumnId(1), ColumnId(1)));
        let err = SchemaCatalog::from_parts(cat.tables().to_vec(), cat.columns().to_vec(), cat.keys().to_vec(), fks);
        assert!(err.is_err());
    }

    #[test]
    fn path_string_round_trip() {
        let cat = tiny().compute_paths(2);
        let p = &cat.find_paths(TableId(1), TableId(2)).unwrap()[0];
        assert_eq!(p.encode(), "T1,F2.1,T2");
        assert_eq!(JoinPath::decode(&p.encode(), &cat).unwrap(), *p);
        assert_eq!(p.steps[0].orientation, Orientation::Backward);
        assert_eq!(p.reversed().steps[0].orientation, Orientation::Forward);
        assert!(JoinPath::decode("T1,F9.9,T2", &cat).is_err());
        assert!(JoinPath::decode("T1", &cat).is_err());
    }

    #[test]
    fn unknown_tables_are_errors() {
        let cat = tiny().compute_paths(3);
        assert!(cat.find_paths(TableId(1), TableId(9)).is_err());
        assert!(cat.direct_relationship(TableId(9), TableId(1)).is_err());
        assert!(cat.find_paths(TableId(1), TableId(1)).unwrap().is_empty());
    }
}
