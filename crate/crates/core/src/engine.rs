//! Plan execution: one session per statement, statements run side by side.

use std::thread;
use std::time::Duration;

use serde::Serialize;

use crate::catalog::{ColumnId, ColumnMeta, SchemaCatalog, TableId};
use crate::error::{Error, Result};
use crate::planner::{GeneratedQuery, QueryPlan, QueryRole};
use crate::store::SqlGateway;
use crate::value::SqlValue;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SortDirection {
    Ascending,
    Descending,
}

impl SortDirection {
    pub fn as_str(self) -> &'static str {
        match self {
            SortDirection::Ascending => "asc",
            SortDirection::Descending => "desc",
        }
    }

    pub fn parse(s: &str) -> Option<SortDirection> {
        match s.trim().to_ascii_lowercase().as_str() {
            "asc" | "ascending" => Some(SortDirection::Ascending),
            "desc" | "descending" => Some(SortDirection::Descending),
            _ => None,
        }
    }
}

/// Preferred ordering for one relation, applied in storage order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SortOrderSpec {
    pub table_id: TableId,
    pub column_id: ColumnId,
    pub direction: SortDirection,
}

/// Rows retrieved from one relation.
#[derive(Debug, Clone, PartialEq)]
pub struct TupleSet {
    pub relation: TableId,
    pub columns: Vec<ColumnMeta>,
    pub rows: Vec<Vec<SqlValue>>,
    /// Related-row count per row, when ranked by foreign-key counts.
    pub rank_counts: Option<Vec<i64>>,
    /// Row count before any slicing.
    pub total_rows: usize,
    /// Position of the first row within the full result.
    pub offset: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExecOptions {
    pub timeout: Option<Duration>,
    /// Run statements one after another on the calling thread.
    pub sequential: bool,
}

impl Default for ExecOptions {
    fn default() -> Self {
        ExecOptions {
            timeout: Some(Duration::from_secs(30)),
            sequential: false,
        }
    }
}

fn with_target(e: Error, target: &str) -> Error {
    match e {
        Error::Sql { message, .. } => Error::Sql {
            target: target.to_owned(),
            message,
        },
        Error::Timeout { seconds, .. } => Error::Timeout {
            target: target.to_owned(),
            seconds,
        },
        other => other,
    }
}

fn run_one(
    gateway: &dyn SqlGateway,
    catalog: &SchemaCatalog,
    q: &GeneratedQuery,
    timeout: Option<Duration>,
) -> Result<TupleSet> {
    let name = catalog.table_name(q.target);
    let columns = catalog.columns_of(q.target).to_vec();
    let mut session = gateway.open_session().map_err(|e| with_target(e, name))?;
    let raw = session
        .run_select(&q.sql, &q.params, timeout)
        .map_err(|e| with_target(e, name))?;
    let width = columns.len() + usize::from(q.role == QueryRole::RankCount);
    let mut rows = Vec::with_capacity(raw.rows.len());
    let mut counts = Vec::new();
    for mut row in raw.rows {
        if row.len() != width {
            return Err(Error::Sql {
                target: name.to_owned(),
                message: format!("expected {width} columns, got {}", row.len()),
            });
        }
        if q.role == QueryRole::RankCount {
            counts.push(match row.pop() {
                Some(SqlValue::Integer(n)) => n,
                Some(SqlValue::Real(f)) => f as i64,
                Some(SqlValue::Text(s)) => s.parse().unwrap_or(0),
                _ => 0,
            });
        }
        rows.push(row);
    }
    Ok(TupleSet {
        relation: q.target,
        columns,
        total_rows: rows.len(),
        rows,
        rank_counts: (q.role == QueryRole::RankCount).then_some(counts),
        offset: 0,
    })
}

/// Execute every query of the plan and return one tuple set per query, in
/// plan order. The first failure (in plan order) is returned and the other
/// results are dropped.
pub fn execute_plan(
    plan: &QueryPlan,
    gateway: &dyn SqlGateway,
    catalog: &SchemaCatalog,
    options: ExecOptions,
) -> Result<Vec<TupleSet>> {
    if options.sequential || plan.queries.len() <= 1 {
        return plan
            .queries
            .iter()
            .map(|q| run_one(gateway, catalog, q, options.timeout))
            .collect();
    }
    let results: Vec<Result<TupleSet>> = thread::scope(|s| {
        let handles: Vec<_> = plan
            .queries
            .iter()
            .map(|q| s.spawn(move || run_one(gateway, catalog, q, options.timeout)))
            .collect();
        handles
            .into_iter()
            .map(|h| {
                h.join()
                    .unwrap_or_else(|_| Err(Error::Unsupported("query thread panicked".into())))
            })
            .collect()
    });
    results.into_iter().collect()
}

/// Keep `limit` rows starting at `offset`; the total is preserved.
pub fn row_limit_apply(mut set: TupleSet, limit: usize, offset: usize) -> TupleSet {
    let start = offset.min(set.rows.len());
    let end = start.saturating_add(limit).min(set.rows.len());
    set.rows = set.rows[start..end].to_vec();
    if let Some(c) = &mut set.rank_counts {
        *c = c[start..end].to_vec();
    }
    set.offset += offset;
    set
}
