//! Brute-force reference semantics over a fully materialized database.
//!
//! Nothing here calls the planner or the engine: predicates, join paths,
//! reachability and counts are recomputed row by row from the catalog and
//! the raw data.

use std::collections::{BTreeMap, BTreeSet};

use kwsearch_core::store::run_select;
use kwsearch_core::{
    ColumnId, ColumnRef, DataType, ForeignKeySpec, Interpretation, PathTerm, SchemaCatalog, SqlGateway, SqlValue,
    TableId,
};

/// Largest database the oracle agrees to load.
pub const MAX_ROWS: usize = 10_000;

/// Expected rows per relation.
pub type RowSets = BTreeMap<TableId, Vec<Vec<SqlValue>>>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleError {
    /// Some relation cannot be related to the others.
    Unrelated,
    /// A repeated attribute with no relation to intersect through.
    NoIntersection,
    /// More than one repeated attribute.
    Unsupported,
}

/// Every row of every table, in storage order.
pub struct MemoryDb {
    pub catalog: SchemaCatalog,
    pub rows: BTreeMap<TableId, Vec<Vec<SqlValue>>>,
}

fn quote(name: &str) -> String {
    format!("\"{}\"", name.replace('"', "\"\""))
}

impl MemoryDb {
    pub fn load(gateway: &dyn SqlGateway, catalog: &SchemaCatalog) -> MemoryDb {
        let mut rows = BTreeMap::new();
        let mut total = 0;
        for t in catalog.tables() {
            let cols: Vec<String> = catalog.columns_of(t.table_id).iter().map(|c| quote(&c.name)).collect();
            let sql = format!("select {} from {}", cols.join(", "), quote(&t.name));
            let r = run_select(gateway, &sql, &[]).expect("oracle load").rows;
            total += r.len();
            assert!(total <= MAX_ROWS, "database too large for the oracle");
            rows.insert(t.table_id, r);
        }
        MemoryDb {
            catalog: catalog.clone(),
            rows,
        }
    }

    pub fn table(&self, t: TableId) -> &[Vec<SqlValue>] {
        &self.rows[&t]
    }

    fn pos(&self, t: TableId, c: ColumnId) -> usize {
        self.catalog
            .columns_of(t)
            .iter()
            .position(|m| m.column_id == c)
            .expect("column of table")
    }

    fn cell(&self, t: TableId, row: usize, c: ColumnId) -> &SqlValue {
        &self.rows[&t][row][self.pos(t, c)]
    }
}

fn norm(s: &str) -> String {
    s.trim().to_lowercase()
}

fn text_of(v: &SqlValue) -> Option<String> {
    match v {
        SqlValue::Null => None,
        SqlValue::Integer(i) => Some(i.to_string()),
        SqlValue::Real(f) => Some(format!("{f}")),
        SqlValue::Text(s) => Some(s.clone()),
    }
}

fn num_of(v: &SqlValue) -> Option<f64> {
    match v {
        SqlValue::Integer(i) => Some(*i as f64),
        SqlValue::Real(f) => Some(*f),
        _ => None,
    }
}

fn join_eq(a: &SqlValue, b: &SqlValue) -> bool {
    match (a, b) {
        (SqlValue::Null, _) | (_, SqlValue::Null) => false,
        (SqlValue::Text(x), SqlValue::Text(y)) => x == y,
        (SqlValue::Integer(x), SqlValue::Integer(y)) => x == y,
        _ => match (num_of(a), num_of(b)) {
            (Some(x), Some(y)) => x == y,
            _ => false,
        },
    }
}

/// Three-valued comparison of a cell against a normalized keyword; `None`
/// is SQL unknown.
fn cell_equals(cell: &SqlValue, ty: DataType, value: &str) -> Option<bool> {
    if matches!(cell, SqlValue::Null) {
        return None;
    }
    match ty {
        DataType::Integer if value.parse::<i64>().is_ok() => {
            let want = value.parse::<i64>().unwrap();
            Some(match cell {
                SqlValue::Integer(i) => *i == want,
                SqlValue::Real(f) => *f == want as f64,
                _ => false,
            })
        }
        DataType::Decimal if value.parse::<f64>().is_ok() => {
            Some(num_of(cell).is_some_and(|f| f == value.parse::<f64>().unwrap()))
        }
        _ => Some(norm(&text_of(cell)?) == value),
    }
}

fn term_holds(db: &MemoryDb, t: TableId, row: usize, term: &PathTerm) -> bool {
    let (Some(c), Some(v)) = (term.attribute, &term.value) else {
        return true;
    };
    let ty = db.catalog.column(ColumnRef::new(t, c)).unwrap().data_type;
    match cell_equals(db.cell(t, row, c), ty, v) {
        None => false,
        Some(eq) => eq != term.negated,
    }
}

fn local(db: &MemoryDb, terms: &[&PathTerm], t: TableId, row: usize) -> bool {
    terms
        .iter()
        .filter(|x| x.relation == t)
        .all(|x| term_holds(db, t, row, x))
}

/// Occurrences of a keyword as a stored value, over every column.
pub fn brute_find(db: &MemoryDb, keyword: &str) -> Vec<(TableId, ColumnId, usize)> {
    let k = norm(keyword);
    let mut out = Vec::new();
    for (t, rows) in &db.rows {
        let cols = db.catalog.columns_of(*t);
        for (i, row) in rows.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if text_of(v).is_some_and(|s| norm(&s) == k) {
                    out.push((*t, cols[j].column_id, i));
                }
            }
        }
    }
    out
}

/// Related-row count: rows referencing this one, summed over every foreign
/// key into its table.
pub fn brute_rank(db: &MemoryDb, table: TableId, row: usize) -> i64 {
    let mut n = 0;
    for fk in db.catalog.foreign_keys().iter().filter(|f| f.to_table == table) {
        for (j, _) in db.table(fk.from_table).iter().enumerate() {
            let all = fk
                .column_pairs
                .iter()
                .all(|(from, to)| join_eq(db.cell(fk.from_table, j, *from), db.cell(table, row, *to)));
            if all {
                n += 1;
            }
        }
    }
    n
}

/// A simple path as tables and the foreign keys between them.
#[derive(Debug, Clone)]
pub struct OraclePath<'a> {
    pub tables: Vec<TableId>,
    pub fks: Vec<&'a ForeignKeySpec>,
}

fn sort_key(cat: &SchemaCatalog, p: &OraclePath<'_>) -> (usize, Vec<String>, Vec<(String, u32)>) {
    (
        p.fks.len(),
        p.tables.iter().map(|t| cat.table_name(*t).to_lowercase()).collect(),
        p.fks
            .iter()
            .map(|f| (cat.table_name(f.from_table).to_lowercase(), f.fk_no))
            .collect(),
    )
}

/// Preferred path between two tables: fewest hops, then table names, then
/// foreign keys.
pub fn best_path(cat: &SchemaCatalog, from: TableId, to: TableId, max_hops: usize) -> Option<OraclePath<'_>> {
    simple_paths(cat, from, to, max_hops).into_iter().next()
}

/// Every simple path of at most `max_hops` foreign keys, preferred first.
pub fn simple_paths(cat: &SchemaCatalog, from: TableId, to: TableId, max_hops: usize) -> Vec<OraclePath<'_>> {
    fn extend<'a>(
        cat: &'a SchemaCatalog,
        to: TableId,
        max_hops: usize,
        cur: &mut OraclePath<'a>,
        out: &mut Vec<OraclePath<'a>>,
    ) {
        let here = *cur.tables.last().unwrap();
        if here == to {
            out.push(cur.clone());
            return;
        }
        if cur.fks.len() == max_hops {
            return;
        }
        for fk in cat.foreign_keys() {
            if fk.from_table == fk.to_table {
                continue;
            }
            let next = if fk.from_table == here {
                fk.to_table
            } else if fk.to_table == here {
                fk.from_table
            } else {
                continue;
            };
            if cur.tables.contains(&next) {
                continue;
            }
            cur.tables.push(next);
            cur.fks.push(fk);
            extend(cat, to, max_hops, cur, out);
            cur.tables.pop();
            cur.fks.pop();
        }
    }
    if from == to {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut cur = OraclePath {
        tables: vec![from],
        fks: vec![],
    };
    extend(cat, to, max_hops, &mut cur, &mut out);
    out.sort_by_cached_key(|p| sort_key(cat, p));
    out
}

/// Whether row `row` of the path's first table reaches, step by step, a
/// row of its last table accepted by `end`.
fn reaches(db: &MemoryDb, path: &OraclePath<'_>, row: usize, end: &dyn Fn(usize) -> bool) -> bool {
    let mut frontier: BTreeSet<usize> = BTreeSet::from([row]);
    for (i, fk) in path.fks.iter().enumerate() {
        let (left, right) = (path.tables[i], path.tables[i + 1]);
        let pairs: Vec<(ColumnId, ColumnId)> = if fk.from_table == left {
            fk.column_pairs.clone()
        } else {
            fk.column_pairs.iter().map(|(a, b)| (*b, *a)).collect()
        };
        let mut next = BTreeSet::new();
        for (j, _) in db.table(right).iter().enumerate() {
            let hit = frontier.iter().any(|&k| {
                pairs
                    .iter()
                    .all(|(l, r)| join_eq(db.cell(left, k, *l), db.cell(right, j, *r)))
            });
            if hit {
                next.insert(j);
            }
        }
        frontier = next;
        if frontier.is_empty() {
            return false;
        }
    }
    frontier.into_iter().any(end)
}

fn relations(interp: &Interpretation) -> Vec<TableId> {
    let mut out = Vec::new();
    for t in &interp.terms {
        if !out.contains(&t.relation) {
            out.push(t.relation);
        }
    }
    out
}

type PathMap<'a> = BTreeMap<(TableId, TableId), OraclePath<'a>>;

fn pairwise<'a>(
    cat: &'a SchemaCatalog,
    nodes: &[TableId],
    max_hops: usize,
    fixed: &[(TableId, TableId)],
) -> Result<PathMap<'a>, OracleError> {
    let mut paths = BTreeMap::new();
    for &a in nodes {
        for &b in nodes {
            if let Some(p) = best_path(cat, a, b, max_hops) {
                paths.insert((a, b), p);
            }
        }
    }
    // connectivity by flooding from the first node
    let mut seen = BTreeSet::from([nodes[0]]);
    let mut stack = vec![nodes[0]];
    while let Some(a) = stack.pop() {
        for &b in nodes {
            let linked = paths.contains_key(&(a, b)) || fixed.contains(&(a, b)) || fixed.contains(&(b, a));
            if linked && seen.insert(b) {
                stack.push(b);
            }
        }
    }
    if nodes.iter().all(|n| seen.contains(n)) {
        Ok(paths)
    } else {
        Err(OracleError::Unrelated)
    }
}

fn repeated(interp: &Interpretation) -> BTreeMap<(TableId, ColumnId), Vec<String>> {
    let mut m: BTreeMap<(TableId, ColumnId), Vec<String>> = BTreeMap::new();
    for t in &interp.terms {
        if let (Some(c), Some(v), false) = (t.attribute, &t.value, t.negated) {
            let e = m.entry((t.relation, c)).or_default();
            if !e.contains(v) {
                e.push(v.clone());
            }
        }
    }
    m.retain(|_, v| v.len() > 1);
    m
}

fn select(db: &MemoryDb, t: TableId, keep: impl Fn(usize) -> bool) -> Vec<Vec<SqlValue>> {
    db.table(t)
        .iter()
        .enumerate()
        .filter(|(i, _)| keep(*i))
        .map(|(_, r)| r.clone())
        .collect()
}

/// Expected row sets for an interpretation. Relations joined through other
/// relations are reduced once against each partner's own predicates.
pub fn brute_eval(db: &MemoryDb, interp: &Interpretation, max_hops: usize) -> Result<RowSets, OracleError> {
    let terms: Vec<&PathTerm> = interp.terms.iter().collect();
    let rels = relations(interp);
    let groups = repeated(interp);
    let mut out = RowSets::new();
    if groups.len() > 1 {
        return Err(OracleError::Unsupported);
    }
    if let Some(((r, a), values)) = groups.into_iter().next() {
        return eval_repeated(db, &terms, &rels, r, a, &values, max_hops);
    }
    if rels.len() == 1 {
        out.insert(rels[0], select(db, rels[0], |i| local(db, &terms, rels[0], i)));
        return Ok(out);
    }
    let paths = pairwise(&db.catalog, &rels, max_hops, &[])?;
    for &r in &rels {
        let rows = select(db, r, |i| {
            local(db, &terms, r, i)
                && rels.iter().all(|&s| match paths.get(&(r, s)) {
                    None => true,
                    Some(p) => reaches(db, p, i, &|j| local(db, &terms, s, j)),
                })
        });
        out.insert(r, rows);
    }
    Ok(out)
}

/// Iterated reduction until nothing changes, for comparison with the
/// single round. Returns the row sets and the number of rounds.
pub fn brute_fixpoint(
    db: &MemoryDb,
    interp: &Interpretation,
    max_hops: usize,
) -> Result<(RowSets, usize), OracleError> {
    let terms: Vec<&PathTerm> = interp.terms.iter().collect();
    let rels = relations(interp);
    let paths = pairwise(&db.catalog, &rels, max_hops, &[])?;
    let mut alive: BTreeMap<TableId, BTreeSet<usize>> = rels
        .iter()
        .map(|&r| (r, (0..db.table(r).len()).filter(|&i| local(db, &terms, r, i)).collect()))
        .collect();
    let mut rounds = 0;
    loop {
        rounds += 1;
        let mut changed = false;
        let snapshot = alive.clone();
        for &r in &rels {
            let keep: BTreeSet<usize> = snapshot[&r]
                .iter()
                .copied()
                .filter(|&i| {
                    rels.iter().all(|&s| match paths.get(&(r, s)) {
                        None => true,
                        Some(p) => reaches(db, p, i, &|j| snapshot[&s].contains(&j)),
                    })
                })
                .collect();
            if keep.len() != snapshot[&r].len() {
                changed = true;
            }
            alive.insert(r, keep);
        }
        if !changed {
            break;
        }
    }
    let sets = alive
        .into_iter()
        .map(|(r, idx)| (r, select(db, r, |i| idx.contains(&i))))
        .collect();
    Ok((sets, rounds))
}

enum Pivot<'a> {
    /// The repeated relation holds the foreign key.
    Referenced(&'a ForeignKeySpec),
    /// The pivot holds the foreign key; `group` identifies one entity.
    Referencing(&'a ForeignKeySpec, Vec<ColumnId>),
}

fn pivot_of<'a>(cat: &'a SchemaCatalog, r: TableId, o: TableId) -> Option<Pivot<'a>> {
    let fk = cat
        .foreign_keys()
        .iter()
        .filter(|f| (f.from_table == r && f.to_table == o) || (f.from_table == o && f.to_table == r))
        .min_by_key(|f| (cat.table_name(f.from_table).to_lowercase(), f.fk_no))?;
    if fk.from_table == r {
        return Some(Pivot::Referenced(fk));
    }
    let fk_cols: Vec<ColumnId> = fk.column_pairs.iter().map(|p| p.0).collect();
    let group: Vec<ColumnId> = cat
        .primary_key(o)?
        .columns
        .iter()
        .copied()
        .filter(|c| !fk_cols.contains(c))
        .collect();
    (!group.is_empty()).then_some(Pivot::Referencing(fk, group))
}

#[allow(clippy::too_many_arguments)]
fn eval_repeated(
    db: &MemoryDb,
    terms: &[&PathTerm],
    rels: &[TableId],
    r: TableId,
    a: ColumnId,
    values: &[String],
    max_hops: usize,
) -> Result<RowSets, OracleError> {
    let cat = &db.catalog;
    let ty = cat.column(ColumnRef::new(r, a)).unwrap().data_type;
    let has = |i: usize, v: &str| cell_equals(db.cell(r, i, a), ty, v) == Some(true);
    let rest: Vec<&PathTerm> = terms
        .iter()
        .copied()
        .filter(|t| !(t.relation == r && t.attribute == Some(a) && t.value.is_some() && !t.negated))
        .collect();
    let others_ok = |i: usize| local(db, &rest, r, i);
    let core_r = |i: usize| values.iter().any(|v| has(i, v)) && others_ok(i);

    let others: Vec<TableId> = rels.iter().copied().filter(|t| *t != r).collect();
    let mut pivots: Vec<(TableId, Pivot<'_>)> =
        others.iter().filter_map(|&o| Some((o, pivot_of(cat, r, o)?))).collect();
    if pivots.is_empty() {
        let mut near: Vec<TableId> = cat
            .foreign_keys()
            .iter()
            .filter_map(|f| {
                if f.from_table == r && f.to_table != r {
                    Some(f.to_table)
                } else if f.to_table == r && f.from_table != r {
                    Some(f.from_table)
                } else {
                    None
                }
            })
            .filter(|t| !others.contains(t))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        near.sort_by_key(|t| cat.table_name(*t).to_lowercase());
        pivots = near
            .into_iter()
            .filter_map(|o| Some((o, pivot_of(cat, r, o)?)))
            .collect();
    }
    if pivots.is_empty() {
        return Err(OracleError::NoIntersection);
    }
    let is_pivot = |t: TableId| pivots.iter().any(|p| p.0 == t);
    let mut nodes = vec![r];
    nodes.extend(others.iter().copied().filter(|o| is_pivot(*o)));
    nodes.extend(pivots.iter().map(|p| p.0).filter(|p| !others.contains(p)));
    nodes.extend(others.iter().copied().filter(|o| !is_pivot(*o)));
    let fixed: Vec<(TableId, TableId)> = pivots.iter().map(|p| (r, p.0)).collect();
    let paths = pairwise(cat, &nodes, max_hops, &fixed)?;

    // the pivot row i is tied, for every value, to a repeated-relation row
    // carrying it
    let tied = |p: TableId, i: usize| -> bool {
        let (_, link) = pivots.iter().find(|x| x.0 == p).unwrap();
        values.iter().all(|v| match link {
            Pivot::Referenced(fk) => (0..db.table(r).len()).any(|j| {
                fk.column_pairs
                    .iter()
                    .all(|(from, to)| join_eq(db.cell(r, j, *from), db.cell(p, i, *to)))
                    && has(j, v)
                    && others_ok(j)
            }),
            Pivot::Referencing(fk, group) => (0..db.table(p).len()).any(|q| {
                group.iter().all(|c| join_eq(db.cell(p, q, *c), db.cell(p, i, *c)))
                    && (0..db.table(r).len()).any(|j| {
                        fk.column_pairs
                            .iter()
                            .all(|(from, to)| join_eq(db.cell(p, q, *from), db.cell(r, j, *to)))
                            && has(j, v)
                            && others_ok(j)
                    })
            }),
        })
    };
    let core = |t: TableId, i: usize| -> bool {
        if t == r {
            core_r(i)
        } else if is_pivot(t) {
            local(db, terms, t, i) && tied(t, i)
        } else {
            local(db, terms, t, i)
        }
    };

    let mut out = RowSets::new();
    for &t in &nodes {
        let rows = select(db, t, |i| {
            if !core(t, i) {
                return false;
            }
            if t == r {
                return true;
            }
            nodes.iter().all(|&s| {
                if (s == r && is_pivot(t)) || (is_pivot(t) && is_pivot(s)) {
                    return true;
                }
                match paths.get(&(t, s)) {
                    None => true,
                    Some(p) => reaches(db, p, i, &|j| core(s, j)),
                }
            })
        });
        out.insert(t, rows);
    }
    Ok(out)
}
