//! Turning tuple sets into a linked result document: foreign-key cells
//! point at the referenced row, and each row offers a drill-down into
//! referencing tables that are not already shown.

mod render;

use serde::Serialize;

use crate::catalog::{ColumnId, ColumnRef, DataType, FkRef, SchemaCatalog, TableId};
use crate::engine::TupleSet;
use crate::lexicon::{Lexicon, VocScope};
use crate::parser::{Interpretation, PathTerm};
use crate::planner::{QueryClass, QueryPlan};
use crate::search::{DrillDirection, DrillRequest};
use crate::value::SqlValue;

pub use render::{render_html, render_html_groups, render_json, render_text};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkKind {
    /// A foreign-key cell linking to the referenced row.
    FkCell,
    /// A line under a row linking to the rows of a referencing table.
    DrillLine,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinkAnnotation {
    pub kind: LinkKind,
    pub row: usize,
    /// Column carrying the link (first column of the foreign key); absent
    /// for drill lines.
    #[serde(skip)]
    pub column: Option<ColumnId>,
    #[serde(rename = "column")]
    pub column_name: Option<String>,
    #[serde(skip)]
    pub target: TableId,
    pub target_table: String,
    /// The foreign key followed; for drill lines it is held by the target.
    #[serde(skip)]
    pub fk: FkRef,
    pub fk_no: u32,
    #[serde(skip)]
    pub key_values: Vec<(ColumnId, SqlValue)>,
    /// `(column name, value)` pairs of the key on the target table.
    pub key: Vec<(String, SqlValue)>,
    pub label: String,
    pub href: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColumnView {
    pub name: String,
    pub caption: String,
    #[serde(rename = "type")]
    pub data_type: DataType,
}

/// One tuple set with its display metadata and links.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Frame {
    #[serde(skip)]
    pub relation_id: TableId,
    pub relation: String,
    pub caption: String,
    pub description: String,
    pub columns: Vec<ColumnView>,
    pub rows: Vec<Vec<SqlValue>>,
    pub rank_counts: Option<Vec<i64>>,
    pub total_rows: usize,
    pub offset: usize,
    pub links: Vec<LinkAnnotation>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TermView {
    pub relation: String,
    pub attribute: Option<String>,
    pub value: Option<String>,
    pub negated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterpretationView {
    pub text: String,
    pub class: QueryClass,
    pub score: crate::parser::Score,
    pub terms: Vec<TermView>,
    pub join_path: Option<String>,
    pub alternate_paths: Vec<String>,
    pub extrapolated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultDocument {
    pub query: String,
    pub interpretation: Option<InterpretationView>,
    pub frames: Vec<Frame>,
    pub diagnostics: Vec<String>,
}

/// Display name for a table: its description, else its vocabulary term,
/// else its stored name.
pub fn table_caption(catalog: &SchemaCatalog, lexicon: &Lexicon, table: TableId) -> String {
    let Some(meta) = catalog.table(table) else {
        return "?".into();
    };
    if !meta.description.trim().is_empty() {
        return meta.description.clone();
    }
    lexicon
        .external_for(&meta.name, VocScope::TableName)
        .map(str::to_owned)
        .unwrap_or_else(|| meta.name.clone())
}

pub fn column_caption(catalog: &SchemaCatalog, lexicon: &Lexicon, column: ColumnRef) -> String {
    let Some(meta) = catalog.column(column) else {
        return "?".into();
    };
    if !meta.description.trim().is_empty() {
        return meta.description.clone();
    }
    let internal = format!("{}.{}", catalog.table_name(column.table), meta.name);
    lexicon
        .external_for(&internal, VocScope::ColumnName)
        .map(str::to_owned)
        .unwrap_or_else(|| meta.name.clone())
}

fn value_caption(lexicon: &Lexicon, value: &str) -> String {
    lexicon
        .external_for(value, VocScope::ValueCode)
        .map(str::to_owned)
        .unwrap_or_else(|| value.to_owned())
}

fn term_text(catalog: &SchemaCatalog, lexicon: &Lexicon, t: &PathTerm) -> String {
    let rel = table_caption(catalog, lexicon, t.relation);
    match (t.column(), &t.value) {
        (None, _) => rel,
        (Some(c), None) => format!("{rel}.{}", column_caption(catalog, lexicon, c)),
        (Some(c), Some(v)) => format!(
            "{rel}.{} {} \"{}\"",
            column_caption(catalog, lexicon, c),
            if t.negated { "<>" } else { "=" },
            value_caption(lexicon, v)
        ),
    }
}

pub fn describe_interpretation(
    interp: &Interpretation,
    plan: &QueryPlan,
    catalog: &SchemaCatalog,
    lexicon: &Lexicon,
) -> InterpretationView {
    InterpretationView {
        text: interp
            .terms
            .iter()
            .map(|t| term_text(catalog, lexicon, t))
            .collect::<Vec<_>>()
            .join(" and "),
        class: plan.class,
        score: interp.score,
        terms: interp
            .terms
            .iter()
            .map(|t| TermView {
                relation: catalog.table_name(t.relation).to_owned(),
                attribute: t.column().map(|c| catalog.column_name(c).to_owned()),
                value: t.value.clone(),
                negated: t.negated,
            })
            .collect(),
        join_path: plan.join_path_used.as_ref().map(|p| p.display(catalog).to_string()),
        alternate_paths: plan
            .alternate_paths
            .iter()
            .map(|p| p.display(catalog).to_string())
            .collect(),
        extrapolated: plan.extrapolated,
    }
}

/// Build the document for a list of tuple sets, in the given order.
///
/// Each foreign-key cell with no null component links to the referenced
/// row. For each foreign key elsewhere referencing a frame's relation, from
/// a table that has no frame of its own, every row gets a drill line.
pub fn annotate(query: &str, sets: Vec<TupleSet>, catalog: &SchemaCatalog, lexicon: &Lexicon) -> ResultDocument {
    let shown: Vec<TableId> = sets.iter().map(|s| s.relation).collect();
    let mut frames = Vec::with_capacity(sets.len());
    for set in sets {
        let r = set.relation;
        let position = |c: ColumnId| set.columns.iter().position(|m| m.column_id == c);
        let mut links = Vec::new();
        for (i, row) in set.rows.iter().enumerate() {
            for fk in catalog.foreign_keys_from(r) {
                let values: Option<Vec<(ColumnId, SqlValue)>> = fk
                    .column_pairs
                    .iter()
                    .map(|(from, to)| {
                        let v = row.get(position(*from)?)?;
                        (!v.is_null()).then(|| (*to, v.clone()))
                    })
                    .collect();
                let Some(key_values) = values else { continue };
                let first = fk.column_pairs[0].0;
                let label = row[position(first).unwrap()].display_text().unwrap_or_default();
                links.push(link(
                    catalog,
                    LinkKind::FkCell,
                    i,
                    Some(first),
                    fk.to_table,
                    fk.fk_ref(),
                    key_values,
                    label,
                    DrillDirection::Row,
                ));
            }
            for fk in catalog.foreign_keys_to(r) {
                if shown.contains(&fk.from_table) {
                    continue;
                }
                let values: Option<Vec<(ColumnId, SqlValue)>> = fk
                    .column_pairs
                    .iter()
                    .map(|(from, to)| {
                        let v = row.get(position(*to)?)?;
                        (!v.is_null()).then(|| (*from, v.clone()))
                    })
                    .collect();
                let Some(key_values) = values else { continue };
                let label = format!("All {} information", table_caption(catalog, lexicon, fk.from_table));
                links.push(link(
                    catalog,
                    LinkKind::DrillLine,
                    i,
                    None,
                    fk.from_table,
                    fk.fk_ref(),
                    key_values,
                    label,
                    DrillDirection::Referencing,
                ));
            }
        }
        let meta = catalog.table(r);
        frames.push(Frame {
            relation_id: r,
            relation: catalog.table_name(r).to_owned(),
            caption: table_caption(catalog, lexicon, r),
            description: meta.map(|m| m.description.clone()).unwrap_or_default(),
            columns: set
                .columns
                .iter()
                .map(|c| ColumnView {
                    name: c.name.clone(),
                    caption: column_caption(catalog, lexicon, c.column_ref()),
                    data_type: c.data_type,
                })
                .collect(),
            rows: set.rows,
            rank_counts: set.rank_counts,
            total_rows: set.total_rows,
            offset: set.offset,
            links,
        });
    }
    let mut diagnostics = Vec::new();
    if frames.is_empty() {
        diagnostics.push("no results".to_owned());
    } else if frames.iter().all(|f| f.total_rows == 0) {
        diagnostics.push("no rows matched".to_owned());
    }
    ResultDocument {
        query: query.to_owned(),
        interpretation: None,
        frames,
        diagnostics,
    }
}

#[allow(clippy::too_many_arguments)]
fn link(
    catalog: &SchemaCatalog,
    kind: LinkKind,
    row: usize,
    column: Option<ColumnId>,
    target: TableId,
    fk: FkRef,
    key_values: Vec<(ColumnId, SqlValue)>,
    label: String,
    direction: DrillDirection,
) -> LinkAnnotation {
    let key: Vec<(String, SqlValue)> = key_values
        .iter()
        .map(|(c, v)| (catalog.column_name(ColumnRef::new(target, *c)).to_owned(), v.clone()))
        .collect();
    let request = DrillRequest {
        table: catalog.table_name(target).to_owned(),
        key_values: key
            .iter()
            .map(|(c, v)| (c.clone(), v.display_text().unwrap_or_default()))
            .collect(),
        direction,
        fk_no: (direction == DrillDirection::Referencing).then_some(fk.fk_no),
    };
    LinkAnnotation {
        kind,
        row,
        column,
        column_name: column.map(|c| catalog.column_name(ColumnRef::new(fk.table, c)).to_owned()),
        target,
        target_table: request.table.clone(),
        fk,
        fk_no: fk.fk_no,
        key_values,
        key,
        label,
        href: request.href(),
    }
}
