use std::collections::BTreeMap;

use super::{FkRef, JoinPath, Orientation, PathStep, SchemaCatalog, TableId};

/// Path length bound used when none is configured.
pub const DEFAULT_MAX_HOPS: usize = 3;

struct Edge {
    step: PathStep,
    to: TableId,
}

fn adjacency(catalog: &SchemaCatalog) -> BTreeMap<TableId, Vec<Edge>> {
    let mut adj: BTreeMap<TableId, Vec<Edge>> = catalog.tables().iter().map(|t| (t.table_id, Vec::new())).collect();
    for fk in catalog.foreign_keys() {
        // self-references can never appear on a simple path
        if fk.from_table == fk.to_table {
            continue;
        }
        let fk_ref = fk.fk_ref();
        adj.entry(fk.from_table).or_default().push(Edge {
            step: PathStep {
                fk: fk_ref,
                orientation: Orientation::Forward,
            },
            to: fk.to_table,
        });
        adj.entry(fk.to_table).or_default().push(Edge {
            step: PathStep {
                fk: fk_ref,
                orientation: Orientation::Backward,
            },
            to: fk.from_table,
        });
    }
    adj
}

pub(super) fn fk_order_key(catalog: &SchemaCatalog, fk: FkRef) -> (String, u32) {
    (catalog.table_name(fk.table).to_lowercase(), fk.fk_no)
}

/// Shortest first; ties broken by the sequence of table names, then by the
/// sequence of foreign keys traversed.
pub(super) fn sort_paths(catalog: &SchemaCatalog, paths: &mut [JoinPath]) {
    paths.sort_by_cached_key(|p| {
        let names: Vec<String> = p.tables.iter().map(|t| catalog.table_name(*t).to_lowercase()).collect();
        let edges: Vec<(String, u32)> = p.steps.iter().map(|s| fk_order_key(catalog, s.fk)).collect();
        (p.hops(), names, edges)
    });
}

/// Every simple path from `from` to `to` with at most `max_hops` edges,
/// in tie-break order.
pub fn enumerate_paths(catalog: &SchemaCatalog, from: TableId, to: TableId, max_hops: usize) -> Vec<JoinPath> {
    let adj = adjacency(catalog);
    let mut out = Vec::new();
    if from != to {
        let mut tables = vec![from];
        let mut steps = Vec::new();
        dfs(&adj, to, max_hops, &mut tables, &mut steps, &mut |p| out.push(p));
    }
    sort_paths(catalog, &mut out);
    out
}

pub(super) fn all_pair_paths(catalog: &SchemaCatalog, max_hops: usize) -> BTreeMap<(TableId, TableId), Vec<JoinPath>> {
    let adj = adjacency(catalog);
    let mut map: BTreeMap<(TableId, TableId), Vec<JoinPath>> = BTreeMap::new();
    for start in catalog.tables() {
        let mut tables = vec![start.table_id];
        let mut steps = Vec::new();
        walk(&adj, max_hops, &mut tables, &mut steps, &mut map);
    }
    for list in map.values_mut() {
        sort_paths(catalog, list);
    }
    map
}

// Records every prefix of length >= 1 as a path from the start table.
fn walk(
    adj: &BTreeMap<TableId, Vec<Edge>>,
    max_hops: usize,
    tables: &mut Vec<TableId>,
    steps: &mut Vec<PathStep>,
    out: &mut BTreeMap<(TableId, TableId), Vec<JoinPath>>,
) {
    if steps.len() == max_hops {
        return;
    }
    let here = *tables.last().unwrap();
    for edge in adj.get(&here).into_iter().flatten() {
        if tables.contains(&edge.to) {
            continue;
        }
        tables.push(edge.to);
        steps.push(edge.step);
        out.entry((tables[0], edge.to)).or_default().push(JoinPath {
            tables: tables.clone(),
            steps: steps.clone(),
        });
        walk(adj, max_hops, tables, steps, out);
        tables.pop();
        steps.pop();
    }
}

fn dfs(
    adj: &BTreeMap<TableId, Vec<Edge>>,
    target: TableId,
    max_hops: usize,
    tables: &mut Vec<TableId>,
    steps: &mut Vec<PathStep>,
    emit: &mut dyn FnMut(JoinPath),
) {
    let here = *tables.last().unwrap();
    if here == target {
        emit(JoinPath {
            tables: tables.clone(),
            steps: steps.clone(),
        });
        return;
    }
    if steps.len() == max_hops {
        return;
    }
    for edge in adj.get(&here).into_iter().flatten() {
        if tables.contains(&edge.to) {
            continue;
        }
        tables.push(edge.to);
        steps.push(edge.step);
        dfs(adj, target, max_hops, tables, steps, emit);
        tables.pop();
        steps.pop();
    }
}
