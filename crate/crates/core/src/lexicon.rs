//! Value-to-attribute index (VMAP), application vocabulary (VOC), and the
//! exhaustive fallback scan for keywords missing from the index.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::RwLock;

use serde::Serialize;

use crate::catalog::{ColumnRef, DataType, SchemaCatalog};
use crate::error::{Error, Result};
use crate::planner::sql::{quote_ident, value_predicate};
use crate::store::annotations::{AdminAnnotations, IndexDefault};
use crate::store::{Session, SqlGateway};
use crate::value::{normalize, LiteralKind, SqlValue};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VMapEntry {
    pub value: String,
    pub column: ColumnRef,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VocScope {
    ValueCode,
    TableName,
    ColumnName,
}

impl VocScope {
    pub fn as_str(self) -> &'static str {
        match self {
            VocScope::ValueCode => "value-code",
            VocScope::TableName => "table-name",
            VocScope::ColumnName => "column-name",
        }
    }

    pub fn parse(s: &str) -> Option<VocScope> {
        Some(match s {
            "value-code" => VocScope::ValueCode,
            "table-name" => VocScope::TableName,
            "column-name" => VocScope::ColumnName,
            _ => return None,
        })
    }
}

/// One vocabulary pair. For `TableName` the internal form is the stored
/// table name; for `ColumnName` it is `Table.Column`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct VocEntry {
    pub external: String,
    pub internal: String,
    pub scope: VocScope,
}

/// Columns selected for value indexing.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IndexPolicy {
    pub columns: Vec<ColumnRef>,
}

fn indexable(t: DataType) -> bool {
    !matches!(t, DataType::Other)
}

impl IndexPolicy {
    /// Every indexable column in the catalog.
    pub fn all(catalog: &SchemaCatalog) -> IndexPolicy {
        IndexPolicy {
            columns: catalog
                .columns()
                .iter()
                .filter(|c| indexable(c.data_type))
                .map(|c| c.column_ref())
                .collect(),
        }
    }

    /// Resolve the policy described by an annotation file: the default set,
    /// adjusted by per-column `index` flags.
    pub fn from_annotations(catalog: &SchemaCatalog, annotations: &AdminAnnotations) -> IndexPolicy {
        let in_key = |c: ColumnRef| {
            catalog.keys_of(c.table).any(|k| k.columns.contains(&c.column)) || catalog.is_foreign_key_column(c)
        };
        let columns = catalog
            .columns()
            .iter()
            .filter(|c| indexable(c.data_type))
            .filter(|c| {
                let table = catalog.table_name(c.table_id);
                match annotations.column(table, &c.name).and_then(|a| a.index) {
                    Some(flag) => flag,
                    None => match annotations.index_default {
                        IndexDefault::All => true,
                        IndexDefault::Keys => in_key(c.column_ref()),
                        IndexDefault::None => false,
                    },
                }
            })
            .map(|c| c.column_ref())
            .collect();
        IndexPolicy { columns }
    }

    pub fn validate(&self, catalog: &SchemaCatalog) -> Result<()> {
        for c in &self.columns {
            let meta = catalog.column(*c).ok_or_else(|| Error::UnknownColumn {
                table: catalog.table_name(c.table).to_owned(),
                column: format!("#{}", c.column.0),
            })?;
            if !indexable(meta.data_type) {
                return Err(Error::Validation(format!(
                    "column {}.{} has a type that cannot be indexed",
                    catalog.table_name(c.table),
                    meta.name
                )));
            }
        }
        Ok(())
    }
}

/// Result of a fallback scan.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ScanResult {
    /// Every type-compatible column containing the keyword.
    pub hits: Vec<ColumnRef>,
    /// Index entries that were not present before the scan.
    pub added: Vec<VMapEntry>,
}

#[derive(Debug, Default)]
pub struct Lexicon {
    vmap: RwLock<BTreeMap<String, BTreeSet<ColumnRef>>>,
    voc: BTreeMap<(String, VocScope), VocEntry>,
}

impl PartialEq for Lexicon {
    fn eq(&self, other: &Self) -> bool {
        self.vmap_entries() == other.vmap_entries() && self.voc == other.voc
    }
}

impl Clone for Lexicon {
    fn clone(&self) -> Self {
        Lexicon {
            vmap: RwLock::new(self.vmap.read().unwrap().clone()),
            voc: self.voc.clone(),
        }
    }
}

impl Lexicon {
    pub fn new() -> Lexicon {
        Lexicon::default()
    }

    pub fn from_parts(vmap: impl IntoIterator<Item = VMapEntry>, voc: impl IntoIterator<Item = VocEntry>) -> Lexicon {
        let mut lex = Lexicon::new();
        lex.insert_entries(vmap);
        for e in voc {
            lex.add_vocabulary(e);
        }
        lex
    }

    fn insert_entries(&mut self, entries: impl IntoIterator<Item = VMapEntry>) {
        let map = self.vmap.get_mut().unwrap();
        for e in entries {
            if !e.value.is_empty() {
                map.entry(e.value).or_default().insert(e.column);
            }
        }
    }

    /// Add a vocabulary pair; the external form is normalized. Returns
    /// false when the (external, scope) pair is already taken.
    pub fn add_vocabulary(&mut self, entry: VocEntry) -> bool {
        let external = normalize(&entry.external);
        if external.is_empty() {
            return false;
        }
        let key = (external.clone(), entry.scope);
        if self.voc.contains_key(&key) {
            return false;
        }
        self.voc.insert(
            key,
            VocEntry {
                external,
                internal: entry.internal,
                scope: entry.scope,
            },
        );
        true
    }

    /// Populate the index from the selected columns. One entry per distinct
    /// (normalized value, column). Unreadable columns are skipped with a
    /// warning. Returns the number of entries in the index afterwards.
    pub fn build_vmap(
        &mut self,
        gateway: &dyn SqlGateway,
        catalog: &SchemaCatalog,
        policy: &IndexPolicy,
    ) -> Result<usize> {
        policy.validate(catalog)?;
        let mut session = gateway.open_session()?;
        let mut entries = Vec::new();
        for c in &policy.columns {
            let table = catalog.table_name(c.table);
            let column = catalog.column_name(*c);
            let sql = format!("select distinct {} from {}", quote_ident(column), quote_ident(table));
            match session.run_select(&sql, &[], None) {
                Ok(rows) => {
                    for row in rows.rows {
                        if let Some(value) = row[0].normalized() {
                            entries.push(VMapEntry { value, column: *c });
                        }
                    }
                }
                Err(e) => tracing::warn!("skipping unreadable column {table}.{column}: {e}"),
            }
        }
        self.insert_entries(entries);
        Ok(self.vmap_len())
    }

    pub fn vmap_len(&self) -> usize {
        self.vmap.read().unwrap().values().map(BTreeSet::len).sum()
    }

    pub fn vmap_entries(&self) -> Vec<VMapEntry> {
        self.vmap
            .read()
            .unwrap()
            .iter()
            .flat_map(|(v, cols)| {
                cols.iter().map(move |c| VMapEntry {
                    value: v.clone(),
                    column: *c,
                })
            })
            .collect()
    }

    pub fn voc_entries(&self) -> impl Iterator<Item = &VocEntry> {
        self.voc.values()
    }

    /// Columns whose indexed values include the normalized keyword.
    pub fn lookup_value(&self, keyword: &str) -> Vec<ColumnRef> {
        let key = normalize(keyword);
        self.vmap
            .read()
            .unwrap()
            .get(&key)
            .map(|s| s.iter().copied().collect())
            .unwrap_or_default()
    }

    /// Vocabulary entries whose external form matches the term, restricted
    /// to the given scopes (all scopes when empty).
    pub fn translate(&self, term: &str, scopes: &[VocScope]) -> Vec<VocEntry> {
        let key = normalize(term);
        [VocScope::ValueCode, VocScope::TableName, VocScope::ColumnName]
            .into_iter()
            .filter(|s| scopes.is_empty() || scopes.contains(s))
            .filter_map(|s| self.voc.get(&(key.clone(), s)).cloned())
            .collect()
    }

    /// The user-facing term recorded for an internal value or schema name.
    pub fn external_for(&self, internal: &str, scope: VocScope) -> Option<&str> {
        let wanted = normalize(internal);
        self.voc
            .values()
            .find(|e| e.scope == scope && normalize(&e.internal) == wanted)
            .map(|e| e.external.as_str())
    }

    /// Whether some vocabulary entry's external form equals this text.
    pub fn has_phrase(&self, text: &str) -> bool {
        let key = normalize(text);
        self.voc.keys().any(|(ext, _)| *ext == key)
    }

    /// Search every type-compatible column of every table for the keyword,
    /// adding each hit to the index. Gateway failures discard partial
    /// results.
    pub fn fallback_scan(
        &self,
        gateway: &dyn SqlGateway,
        catalog: &SchemaCatalog,
        keyword: &str,
    ) -> Result<ScanResult> {
        let value = normalize(keyword);
        if value.is_empty() {
            return Ok(ScanResult::default());
        }
        let kind = LiteralKind::of(&value);
        let mut session = gateway.open_session()?;
        let mut hits = Vec::new();
        for col in catalog.columns() {
            if !scan_compatible(kind, col.data_type) {
                continue;
            }
            let table = catalog.table_name(col.table_id);
            let (pred, param) = value_predicate(&quote_ident(&col.name), col.data_type, &value, false);
            let sql = format!(
                "select 1 where exists (select * from {} where {pred})",
                quote_ident(table)
            );
            if !probe(session.as_mut(), &sql, param)?.is_empty() {
                hits.push(col.column_ref());
            }
        }
        let mut added = Vec::new();
        let mut map = self.vmap.write().unwrap();
        for c in &hits {
            if map.entry(value.clone()).or_default().insert(*c) {
                added.push(VMapEntry {
                    value: value.clone(),
                    column: *c,
                });
            }
        }
        Ok(ScanResult { hits, added })
    }
}

fn probe(session: &mut dyn Session, sql: &str, param: SqlValue) -> Result<Vec<Vec<SqlValue>>> {
    Ok(session.run_select(sql, &[param], None)?.rows)
}

/// Which column types a keyword of the given literal shape may match.
pub fn scan_compatible(kind: LiteralKind, ty: DataType) -> bool {
    match ty {
        DataType::Other => false,
        DataType::Text => true,
        DataType::Integer => kind == LiteralKind::Integer,
        DataType::Decimal => matches!(kind, LiteralKind::Integer | LiteralKind::Decimal),
        DataType::Date => kind == LiteralKind::Date,
    }
}
