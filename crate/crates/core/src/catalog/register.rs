use std::collections::BTreeSet;

use super::{ColumnId, ColumnMeta, DataType, ForeignKeySpec, KeySpec, SchemaCatalog, TableId, TableMeta};
use crate::error::{Error, Result};
use crate::store::annotations::AdminAnnotations;
use crate::store::{RawForeignKey, RawSchema, SqlGateway};

/// A freshly built catalog plus whatever was skipped along the way.
#[derive(Debug, Clone)]
pub struct Registration {
    pub catalog: SchemaCatalog,
    pub warnings: Vec<String>,
}

/// Read the database's declared schema and merge in the administrator's
/// annotations. Paths are left empty.
pub fn register_database(gateway: &dyn SqlGateway, annotations: &AdminAnnotations) -> Result<Registration> {
    let raw = gateway.open_session()?.introspect()?;
    build_catalog(raw, annotations)
}

pub(crate) fn build_catalog(mut raw: RawSchema, annotations: &AdminAnnotations) -> Result<Registration> {
    let mut warnings = std::mem::take(&mut raw.warnings);
    raw.tables.sort_by(|a, b| {
        a.name
            .to_lowercase()
            .cmp(&b.name.to_lowercase())
            .then(a.name.cmp(&b.name))
    });

    let mut tables = Vec::new();
    let mut columns = Vec::new();
    let mut keys = Vec::new();
    for (i, t) in raw.tables.iter().enumerate() {
        if t.columns.is_empty() {
            return Err(Error::UnreadableTable { table: t.name.clone() });
        }
        let table_id = TableId(i as u32 + 1);
        let ann = annotations.table(&t.name);
        tables.push(TableMeta {
            table_id,
            name: t.name.clone(),
            description: ann.and_then(|a| a.description.clone()).unwrap_or_default(),
        });
        for (j, c) in t.columns.iter().enumerate() {
            columns.push(ColumnMeta {
                table_id,
                column_id: ColumnId(j as u32 + 1),
                name: c.name.clone(),
                data_type: DataType::from_native(&c.native_type),
                description: annotations
                    .column(&t.name, &c.name)
                    .and_then(|a| a.description.clone())
                    .unwrap_or_default(),
            });
        }
        let resolve = |names: &[String]| -> Option<Vec<ColumnId>> {
            names
                .iter()
                .map(|n| {
                    t.columns
                        .iter()
                        .position(|c| c.name.eq_ignore_ascii_case(n))
                        .map(|p| ColumnId(p as u32 + 1))
                })
                .collect()
        };
        let pk_names = ann
            .and_then(|a| a.primary_key.clone())
            .unwrap_or_else(|| t.primary_key.clone());
        let mut key_no = 1;
        if !pk_names.is_empty() {
            match resolve(&pk_names) {
                Some(cols) => {
                    keys.push(KeySpec {
                        table_id,
                        key_no: 1,
                        columns: cols,
                    });
                }
                None => warnings.push(format!("{}: primary key names unknown columns, ignored", t.name)),
            }
        }
        let mut uniques: Vec<Vec<ColumnId>> = t.unique_keys.iter().filter_map(|u| resolve(u)).collect();
        uniques.sort();
        uniques.dedup();
        for cols in uniques {
            if keys
                .iter()
                .any(|k: &KeySpec| k.table_id == table_id && k.columns == cols)
            {
                continue;
            }
            key_no += 1;
            keys.push(KeySpec {
                table_id,
                key_no,
                columns: cols,
            });
        }
    }

    for name in annotations.tables.keys() {
        if !raw.tables.iter().any(|t| t.name.eq_ignore_ascii_case(name)) {
            warnings.push(format!("annotation names unknown table `{name}`"));
        }
    }

    let mut declared: Vec<RawForeignKey> = raw.foreign_keys.clone();
    for f in &annotations.foreign_keys {
        declared.push(RawForeignKey {
            from_table: f.from_table.clone(),
            from_columns: f.from_columns.clone(),
            to_table: f.to_table.clone(),
            to_columns: f.to_columns.clone(),
        });
    }

    let table_id = |name: &str| {
        raw.tables
            .iter()
            .position(|t| t.name.eq_ignore_ascii_case(name))
            .map(|p| TableId(p as u32 + 1))
    };
    let column_id = |t: TableId, name: &str| {
        columns
            .iter()
            .find(|c| c.table_id == t && c.name.eq_ignore_ascii_case(name))
            .map(|c| c.column_id)
    };

    // (from table, from columns, to table, to key, pairs)
    type Resolved = (TableId, Vec<ColumnId>, TableId, u32, Vec<(ColumnId, ColumnId)>);
    let mut resolved: BTreeSet<Resolved> = BTreeSet::new();
    for f in declared {
        let describe = || format!("{}({}) -> {}", f.from_table, f.from_columns.join(", "), f.to_table);
        let (Some(from), Some(to)) = (table_id(&f.from_table), table_id(&f.to_table)) else {
            warnings.push(format!("foreign key {} names an unknown table, skipped", describe()));
            continue;
        };
        let from_cols: Option<Vec<ColumnId>> = f.from_columns.iter().map(|c| column_id(from, c)).collect();
        let Some(from_cols) = from_cols.filter(|c| !c.is_empty()) else {
            warnings.push(format!("foreign key {} names unknown columns, skipped", describe()));
            continue;
        };
        let to_cols: Vec<ColumnId> = if f.to_columns.is_empty() {
            match keys.iter().find(|k| k.table_id == to && k.key_no == 1) {
                Some(k) => k.columns.clone(),
                None => {
                    warnings.push(format!(
                        "foreign key {} references a table without primary key, skipped",
                        describe()
                    ));
                    continue;
                }
            }
        } else {
            match f
                .to_columns
                .iter()
                .map(|c| column_id(to, c))
                .collect::<Option<Vec<_>>>()
            {
                Some(c) => c,
                None => {
                    warnings.push(format!("foreign key {} names unknown columns, skipped", describe()));
                    continue;
                }
            }
        };
        if to_cols.len() != from_cols.len() {
            warnings.push(format!(
                "foreign key {} has mismatched column counts, skipped",
                describe()
            ));
            continue;
        }
        let to_set: BTreeSet<ColumnId> = to_cols.iter().copied().collect();
        let Some(key) = keys
            .iter()
            .filter(|k| k.table_id == to)
            .find(|k| k.columns.len() == to_cols.len() && k.columns.iter().copied().collect::<BTreeSet<_>>() == to_set)
        else {
            warnings.push(format!(
                "foreign key {} does not reference a candidate key, skipped",
                describe()
            ));
            continue;
        };
        let pairs: Vec<(ColumnId, ColumnId)> = key
            .columns
            .iter()
            .map(|kc| {
                let i = to_cols.iter().position(|c| c == kc).unwrap();
                (from_cols[i], *kc)
            })
            .collect();
        let type_of = |t: TableId, c: ColumnId| {
            columns
                .iter()
                .find(|m| m.table_id == t && m.column_id == c)
                .map(|m| m.data_type)
                .unwrap()
        };
        if pairs
            .iter()
            .any(|(a, b)| !type_of(from, *a).compatible_with(type_of(to, *b)))
        {
            warnings.push(format!(
                "foreign key {} pairs incompatible column types, skipped",
                describe()
            ));
            continue;
        }
        let from_in_key_order = pairs.iter().map(|p| p.0).collect();
        resolved.insert((from, from_in_key_order, to, key.key_no, pairs));
    }

    let mut foreign_keys = Vec::new();
    let mut last: Option<TableId> = None;
    let mut fk_no = 0;
    for (from, _, to, key_no, pairs) in resolved {
        if last != Some(from) {
            fk_no = 0;
            last = Some(from);
        }
        fk_no += 1;
        foreign_keys.push(ForeignKeySpec {
            from_table: from,
            fk_no,
            column_pairs: pairs,
            to_table: to,
            to_key_no: key_no,
        });
    }

    for w in &warnings {
        tracing::warn!("{w}");
    }
    let catalog = SchemaCatalog::from_parts(tables, columns, keys, foreign_keys)?;
    Ok(Registration { catalog, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::{RawColumn, RawTable};

    fn col(name: &str, ty: &str) -> RawColumn {
        RawColumn {
            name: name.into(),
            native_type: ty.into(),
        }
    }

    fn club_schema(with_fks: bool) -> RawSchema {
        RawSchema {
            tables: vec![
                RawTable {
                    name: "Member".into(),
                    columns: vec![
                        col("Name", "varchar(20)"),
                        col("City", "varchar(10)"),
                        col("Age", "integer"),
                    ],
                    primary_key: vec!["Name".into()],
                    unique_keys: vec![],
                },
                RawTable {
                    name: "Activity".into(),
                    columns: vec![col("Name", "varchar(20)"), col("Sport", "varchar(20)")],
                    primary_key: vec!["Name".into(), "Sport".into()],
                    unique_keys: vec![],
                },
                RawTable {
                    name: "City".into(),
                    columns: vec![col("Code", "varchar(10)"), col("Location", "varchar(20)")],
                    primary_key: vec!["Code".into()],
                    unique_keys: vec![],
                },
            ],
            foreign_keys: if with_fks {
                vec![
                    RawForeignKey {
                        from_table: "Member".into(),
                        from_columns: vec!["City".into()],
                        to_table: "City".into(),
                        to_columns: vec![],
                    },
                    RawForeignKey {
                        from_table: "Activity".into(),
                        from_columns: vec!["Name".into()],
                        to_table: "Member".into(),
                        to_columns: vec!["Name".into()],
                    },
                ]
            } else {
                vec![]
            },
            warnings: vec![],
        }
    }

    #[test]
    fn ids_follow_table_name_order() {
        let reg = build_catalog(club_schema(true), &AdminAnnotations::default()).unwrap();
        let names: Vec<&str> = reg.catalog.tables().iter().map(|t| t.name.as_str()).collect();
        assert_eq!(names, ["Activity", "City", "Member"]);
        assert_eq!(reg.catalog.foreign_keys().len(), 2);
        assert_eq!(reg.catalog.primary_key(TableId(1)).unwrap().columns.len(), 2);
        assert!(reg.warnings.is_empty());
    }

    #[test]
    fn annotated_foreign_keys_fill_gaps() {
        let ann = AdminAnnotations::parse(
            r#"
[[foreign_keys]]
from_table = "activity"
from_columns = ["name"]
to_table = "MEMBER"
[[foreign_keys]]
from_table = "Member"
from_columns = ["Age"]
to_table = "Nowhere"
"#,
        )
        .unwrap();
        let reg = build_catalog(club_schema(false), &ann).unwrap();
        assert_eq!(reg.catalog.foreign_keys().len(), 1);
        let fk = &reg.catalog.foreign_keys()[0];
        assert_eq!(reg.catalog.table_name(fk.from_table), "Activity");
        assert_eq!(reg.catalog.table_name(fk.to_table), "Member");
        assert_eq!(reg.warnings.len(), 1);
    }

    #[test]
    fn duplicate_declarations_collapse() {
        let mut raw = club_schema(true);
        raw.foreign_keys.push(raw.foreign_keys[0].clone());
        let reg = build_catalog(raw, &AdminAnnotations::default()).unwrap();
        assert_eq!(reg.catalog.foreign_keys().len(), 2);
    }

    #[test]
    fn tables_without_columns_abort() {
        let mut raw = club_schema(true);
        raw.tables[0].columns.clear();
        assert!(matches!(
            build_catalog(raw, &AdminAnnotations::default()),
            Err(Error::UnreadableTable { .. })
        ));
    }

    #[test]
    fn empty_database() {
        let reg = build_catalog(RawSchema::default(), &AdminAnnotations::default()).unwrap();
        assert!(reg.catalog.tables().is_empty());
    }
}
