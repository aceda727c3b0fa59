//! Query classification and SQL generation.
//!
//! Every generated statement selects from a single relation under the alias
//! `t0`. Constraints from other relations are expressed as `in` or `exists`
//! subqueries, so each relation's rows come back as its own tuple set.

pub mod sql;

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::catalog::{
    ColumnId, ColumnRef, FkRef, JoinPath, Orientation, PathStep, SchemaCatalog, TableId, DEFAULT_MAX_HOPS,
};
use crate::engine::{SortDirection, SortOrderSpec};
use crate::error::{Error, Result};
use crate::parser::{Interpretation, PathTerm};
use crate::value::SqlValue;
use sql::{qualified, quote_ident, value_predicate, where_clause, Fragment};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryClass {
    SingleRelation,
    MultiRelation,
    RepeatedAttribute,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryRole {
    /// Plain result rows.
    Result,
    /// Result rows followed by one trailing count column.
    RankCount,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RankMode {
    FkCount,
    AppSort,
    #[default]
    None,
}

impl RankMode {
    pub fn parse(s: &str) -> Option<RankMode> {
        match s {
            "fk_count" => Some(RankMode::FkCount),
            "app_sort" => Some(RankMode::AppSort),
            "none" => Some(RankMode::None),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RankMode::FkCount => "fk_count",
            RankMode::AppSort => "app_sort",
            RankMode::None => "none",
        }
    }
}

/// One parameterized statement over one relation.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedQuery {
    pub target: TableId,
    pub role: QueryRole,
    pub sql: String,
    pub params: Vec<SqlValue>,
    columns: Vec<String>,
    filter: Option<Fragment>,
    count: Option<(String, String)>,
    order: Vec<String>,
}

impl GeneratedQuery {
    fn new(catalog: &SchemaCatalog, target: TableId, filter: Option<Fragment>) -> GeneratedQuery {
        let columns = catalog
            .columns_of(target)
            .iter()
            .map(|c| qualified("t0", &c.name))
            .collect();
        let order = catalog
            .ordering_columns(target)
            .into_iter()
            .map(|c| {
                format!(
                    "{} asc",
                    qualified("t0", catalog.column_name(ColumnRef::new(target, c)))
                )
            })
            .collect();
        let mut q = GeneratedQuery {
            target,
            role: QueryRole::Result,
            sql: String::new(),
            params: Vec::new(),
            columns,
            filter,
            count: None,
            order,
        };
        q.render(catalog);
        q
    }

    fn render(&mut self, catalog: &SchemaCatalog) {
        let mut select = self.columns.join(", ");
        if let Some((expr, alias)) = &self.count {
            select = format!("{select}, {expr} as {}", quote_ident(alias));
        }
        self.sql = format!(
            "select {select} from {} t0{} order by {}",
            quote_ident(catalog.table_name(self.target)),
            where_clause(&self.filter),
            self.order.join(", ")
        );
        self.params = self.filter.as_ref().map(|f| f.params.clone()).unwrap_or_default();
    }

    /// Name of the trailing count column, when the query has one.
    pub fn count_alias(&self) -> Option<&str> {
        self.count.as_ref().map(|c| c.1.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryPlan {
    pub class: QueryClass,
    /// One query per relation in the result, in frame order.
    pub queries: Vec<GeneratedQuery>,
    /// The first multi-hop path used to relate two relations.
    pub join_path_used: Option<JoinPath>,
    /// Paths that could also have related those relations but were not
    /// executed.
    pub alternate_paths: Vec<JoinPath>,
    /// Set when the plan goes beyond the documented query shapes (a
    /// repeated attribute combined with further relations).
    pub extrapolated: bool,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlanOptions {
    /// Longest join path considered when relating two relations.
    pub max_hops: usize,
}

impl Default for PlanOptions {
    fn default() -> Self {
        PlanOptions {
            max_hops: DEFAULT_MAX_HOPS,
        }
    }
}

/// The (relation, attribute) pairs bound to two or more distinct
/// non-negated values.
fn repeated_groups(interp: &Interpretation) -> BTreeMap<ColumnRef, Vec<String>> {
    let mut by_column: BTreeMap<ColumnRef, Vec<String>> = BTreeMap::new();
    for t in &interp.terms {
        if let (Some(c), Some(v), false) = (t.column(), &t.value, t.negated) {
            let vals = by_column.entry(c).or_default();
            if !vals.contains(v) {
                vals.push(v.clone());
            }
        }
    }
    by_column.retain(|_, v| v.len() >= 2);
    by_column
}

pub fn classify(interp: &Interpretation) -> QueryClass {
    if !repeated_groups(interp).is_empty() {
        QueryClass::RepeatedAttribute
    } else if interp.relations().len() == 1 {
        QueryClass::SingleRelation
    } else {
        QueryClass::MultiRelation
    }
}

pub fn plan(interp: &Interpretation, catalog: &SchemaCatalog, options: PlanOptions) -> Result<QueryPlan> {
    match classify(interp) {
        QueryClass::SingleRelation => plan_single(interp, catalog),
        QueryClass::MultiRelation => plan_multi(interp, catalog, options),
        QueryClass::RepeatedAttribute => plan_repeated(interp, catalog, options),
    }
}

struct Aliases(usize);

impl Aliases {
    fn next(&mut self) -> String {
        self.0 += 1;
        format!("t{}", self.0)
    }
}

/// Conjunction of the value predicates of `terms` on `relation`.
fn local_filter(catalog: &SchemaCatalog, terms: &[&PathTerm], relation: TableId, alias: &str) -> Vec<Fragment> {
    terms
        .iter()
        .filter(|t| t.relation == relation)
        .filter_map(|t| {
            let col = catalog.column(t.column()?)?;
            let value = t.value.as_ref()?;
            let (sql, param) = value_predicate(&qualified(alias, &col.name), col.data_type, value, t.negated);
            Some(Fragment::new(sql, vec![param]))
        })
        .collect()
}

/// Columns joined by one path step, as (column on the left table, column on
/// the right table).
fn step_columns(catalog: &SchemaCatalog, step: &PathStep) -> Vec<(ColumnId, ColumnId)> {
    let fk = catalog
        .foreign_key(step.fk)
        .expect("path steps name catalog foreign keys");
    match step.orientation {
        Orientation::Forward => fk.column_pairs.clone(),
        Orientation::Backward => fk.column_pairs.iter().map(|(a, b)| (*b, *a)).collect(),
    }
}

/// Require that the row under `outer` reaches, along `path`, some row of the
/// path's last table satisfying `end_filter`.
fn path_constraint(
    catalog: &SchemaCatalog,
    aliases: &mut Aliases,
    outer: &str,
    path: &JoinPath,
    end_filter: &mut dyn FnMut(&mut Aliases, &str) -> Vec<Fragment>,
) -> Fragment {
    let first = step_columns(catalog, &path.steps[0]);
    if path.hops() == 1 && first.len() == 1 {
        let (left, right) = first[0];
        let end = path.end();
        let alias = aliases.next();
        let inner = Fragment::and(end_filter(aliases, &alias));
        let mut params = Vec::new();
        if let Some(f) = &inner {
            params.extend(f.params.iter().cloned());
        }
        let sql = format!(
            "{} in (select {} from {} {alias}{})",
            qualified(outer, catalog.column_name(ColumnRef::new(path.start(), left))),
            qualified(&alias, catalog.column_name(ColumnRef::new(end, right))),
            quote_ident(catalog.table_name(end)),
            where_clause(&inner)
        );
        return Fragment::new(sql, params);
    }
    let mut names = vec![outer.to_owned()];
    let mut from = Vec::new();
    for t in &path.tables[1..] {
        let a = aliases.next();
        from.push(format!("{} {a}", quote_ident(catalog.table_name(*t))));
        names.push(a);
    }
    let mut conds = Vec::new();
    for (i, step) in path.steps.iter().enumerate() {
        for (l, r) in step_columns(catalog, step) {
            conds.push(Fragment::new(
                format!(
                    "{} = {}",
                    qualified(&names[i], catalog.column_name(ColumnRef::new(path.tables[i], l))),
                    qualified(
                        &names[i + 1],
                        catalog.column_name(ColumnRef::new(path.tables[i + 1], r))
                    )
                ),
                vec![],
            ));
        }
    }
    conds.extend(end_filter(aliases, names.last().unwrap()));
    let cond = Fragment::and(conds).expect("paths have at least one join condition");
    Fragment::new(
        format!("exists (select * from {} where {})", from.join(", "), cond.sql),
        cond.params,
    )
}

/// Shortest path within the hop limit, plus the alternates.
fn choose_path(
    catalog: &SchemaCatalog,
    from: TableId,
    to: TableId,
    max_hops: usize,
) -> Result<Option<(JoinPath, Vec<JoinPath>)>> {
    let mut paths = catalog.find_paths(from, to)?.iter().filter(|p| p.hops() <= max_hops);
    Ok(paths.next().map(|p| (p.clone(), paths.cloned().collect())))
}

/// Plan for an interpretation over one relation. Every value term becomes a
/// conjoined predicate, even when an attribute repeats.
pub fn plan_single(interp: &Interpretation, catalog: &SchemaCatalog) -> Result<QueryPlan> {
    let relations = interp.relations();
    let [relation] = relations[..] else {
        return Err(Error::Unsupported("single-relation plan over several relations".into()));
    };
    catalog.require_table(relation)?;
    let terms: Vec<&PathTerm> = interp.terms.iter().collect();
    let filter = Fragment::and(local_filter(catalog, &terms, relation, "t0"));
    Ok(QueryPlan {
        class: QueryClass::SingleRelation,
        queries: vec![GeneratedQuery::new(catalog, relation, filter)],
        join_path_used: None,
        alternate_paths: Vec::new(),
        extrapolated: false,
        notes: Vec::new(),
    })
}

/// Pairwise relatedness among `nodes` within the hop limit; errors when the
/// relation graph falls apart.
/// Chosen path and its alternates for each constrained pair.
type PairPaths = BTreeMap<(TableId, TableId), (JoinPath, Vec<JoinPath>)>;

fn connect(
    catalog: &SchemaCatalog,
    nodes: &[TableId],
    max_hops: usize,
    fixed_edges: &[(TableId, TableId)],
) -> Result<PairPaths> {
    let mut paths = BTreeMap::new();
    for &a in nodes {
        for &b in nodes {
            if a != b {
                if let Some(p) = choose_path(catalog, a, b, max_hops)? {
                    paths.insert((a, b), p);
                }
            }
        }
    }
    let mut reached = BTreeSet::from([nodes[0]]);
    loop {
        let before = reached.len();
        for &a in nodes {
            for &b in nodes {
                let linked =
                    paths.contains_key(&(a, b)) || fixed_edges.contains(&(a, b)) || fixed_edges.contains(&(b, a));
                if linked && reached.contains(&a) {
                    reached.insert(b);
                }
            }
        }
        if reached.len() == before {
            break;
        }
    }
    if let Some(missing) = nodes.iter().find(|n| !reached.contains(n)) {
        return Err(Error::UnrelatedRelations(
            catalog.table_name(nodes[0]).to_owned(),
            catalog.table_name(*missing).to_owned(),
        ));
    }
    Ok(paths)
}

fn record_path(plan: &mut QueryPlan, path: &JoinPath, alternates: &[JoinPath]) {
    if path.hops() > 1 && plan.join_path_used.is_none() {
        plan.join_path_used = Some(path.clone());
    }
    for alt in alternates {
        let seen = plan.alternate_paths.iter().any(|p| p == alt || *p == alt.reversed());
        if !seen {
            plan.alternate_paths.push(alt.clone());
        }
    }
}

/// Plan for several distinct relations: each relation's query keeps its own
/// predicates and gains, for every other relation related within the hop
/// limit, the requirement of a related row satisfying that relation's
/// predicates.
pub fn plan_multi(interp: &Interpretation, catalog: &SchemaCatalog, options: PlanOptions) -> Result<QueryPlan> {
    let relations = interp.relations();
    for r in &relations {
        catalog.require_table(*r)?;
    }
    let paths = connect(catalog, &relations, options.max_hops, &[])?;
    let terms: Vec<&PathTerm> = interp.terms.iter().collect();
    let mut plan = QueryPlan {
        class: QueryClass::MultiRelation,
        queries: Vec::new(),
        join_path_used: None,
        alternate_paths: Vec::new(),
        extrapolated: false,
        notes: Vec::new(),
    };
    for &r in &relations {
        let mut aliases = Aliases(0);
        let mut conds = local_filter(catalog, &terms, r, "t0");
        for &s in &relations {
            let Some((path, alternates)) = paths.get(&(r, s)) else {
                continue;
            };
            record_path(&mut plan, path, alternates);
            conds.push(path_constraint(catalog, &mut aliases, "t0", path, &mut |_, alias| {
                local_filter(catalog, &terms, s, alias)
            }));
        }
        plan.queries.push(GeneratedQuery::new(catalog, r, Fragment::and(conds)));
    }
    Ok(plan)
}

/// How a pivot relation reaches rows of the repeated relation.
#[derive(Debug, Clone)]
enum PivotLink {
    /// The repeated relation references the pivot: repeated-relation rows
    /// point straight at a pivot row.
    Referenced { fk: FkRef },
    /// The pivot references the repeated relation: pivot rows sharing the
    /// `group` columns form one entity, each row pointing at one
    /// repeated-relation row.
    Referencing { fk: FkRef, group: Vec<ColumnId> },
}

fn pivot_link(catalog: &SchemaCatalog, repeated: TableId, pivot: TableId) -> Result<Option<PivotLink>> {
    let Some(link) = catalog.direct_relationship(repeated, pivot)? else {
        return Ok(None);
    };
    if link.holder == repeated {
        return Ok(Some(PivotLink::Referenced { fk: link.fk.fk_ref() }));
    }
    let fk_cols: Vec<ColumnId> = link.fk.from_columns().collect();
    let group: Vec<ColumnId> = match catalog.primary_key(pivot) {
        Some(k) => k.columns.iter().copied().filter(|c| !fk_cols.contains(c)).collect(),
        None => Vec::new(),
    };
    if group.is_empty() {
        return Ok(None);
    }
    Ok(Some(PivotLink::Referencing {
        fk: link.fk.fk_ref(),
        group,
    }))
}

struct Repeated<'a> {
    catalog: &'a SchemaCatalog,
    terms: Vec<&'a PathTerm>,
    relation: TableId,
    attribute: ColumnRef,
    values: Vec<String>,
}

impl Repeated<'_> {
    /// Predicates of the repeated relation other than the repeated values.
    fn others(&self, alias: &str) -> Vec<Fragment> {
        let rest: Vec<&PathTerm> = self
            .terms
            .iter()
            .copied()
            .filter(|t| !(t.column() == Some(self.attribute) && !t.negated && t.value.is_some()))
            .collect();
        local_filter(self.catalog, &rest, self.relation, alias)
    }

    fn value_pred(&self, alias: &str, value: &str) -> Fragment {
        let col = self.catalog.column(self.attribute).expect("bound attribute exists");
        let (sql, p) = value_predicate(&qualified(alias, &col.name), col.data_type, value, false);
        Fragment::new(sql, vec![p])
    }

    /// The disjunction over the repeated values plus the other predicates.
    fn core(&self, alias: &str) -> Vec<Fragment> {
        let ors = self.values.iter().map(|v| self.value_pred(alias, v)).collect();
        let mut conds: Vec<Fragment> = Fragment::or(ors).into_iter().collect();
        conds.extend(self.others(alias));
        conds
    }

    /// One existential per repeated value: the pivot row under `alias` is
    /// related to a repeated-relation row carrying that value.
    fn existentials(&self, aliases: &mut Aliases, pivot: TableId, link: &PivotLink, alias: &str) -> Vec<Fragment> {
        let cat = self.catalog;
        let name = |t: TableId, c: ColumnId| cat.column_name(ColumnRef::new(t, c)).to_owned();
        let mut out = Vec::new();
        for v in &self.values {
            match link {
                PivotLink::Referenced { fk } => {
                    let spec = cat.foreign_key(*fk).unwrap();
                    let q = aliases.next();
                    let mut conds: Vec<Fragment> = spec
                        .column_pairs
                        .iter()
                        .map(|(from, to)| {
                            Fragment::new(
                                format!(
                                    "{} = {}",
                                    qualified(&q, &name(self.relation, *from)),
                                    qualified(alias, &name(pivot, *to))
                                ),
                                vec![],
                            )
                        })
                        .collect();
                    conds.push(self.value_pred(&q, v));
                    conds.extend(self.others(&q));
                    let cond = Fragment::and(conds).unwrap();
                    out.push(Fragment::new(
                        format!(
                            "exists (select * from {} {q} where {})",
                            quote_ident(cat.table_name(self.relation)),
                            cond.sql
                        ),
                        cond.params,
                    ));
                }
                PivotLink::Referencing { fk, group } => {
                    let q = aliases.next();
                    let mut conds: Vec<Fragment> = group
                        .iter()
                        .map(|c| {
                            Fragment::new(
                                format!(
                                    "{} = {}",
                                    qualified(&q, &name(pivot, *c)),
                                    qualified(alias, &name(pivot, *c))
                                ),
                                vec![],
                            )
                        })
                        .collect();
                    let step = JoinPath {
                        tables: vec![pivot, self.relation],
                        steps: vec![PathStep {
                            fk: *fk,
                            orientation: Orientation::Forward,
                        }],
                    };
                    conds.push(path_constraint(cat, aliases, &q, &step, &mut |_, a| {
                        let mut c = vec![self.value_pred(a, v)];
                        c.extend(self.others(a));
                        c
                    }));
                    let cond = Fragment::and(conds).unwrap();
                    out.push(Fragment::new(
                        format!(
                            "exists (select * from {} {q} where {})",
                            quote_ident(cat.table_name(pivot)),
                            cond.sql
                        ),
                        cond.params,
                    ));
                }
            }
        }
        out
    }
}

/// Plan for an interpretation naming one attribute with several values.
///
/// The repeated relation is queried with the disjunction of the values.
/// Pivot relations directly related to it (those in the interpretation, or
/// else every qualifying neighbour) are queried for rows related to a
/// repeated-relation row for each value. Any further relations are related
/// pairwise to the rest, and the plan is flagged as extrapolated.
pub fn plan_repeated(interp: &Interpretation, catalog: &SchemaCatalog, options: PlanOptions) -> Result<QueryPlan> {
    let groups = repeated_groups(interp);
    if groups.len() != 1 {
        return Err(Error::Unsupported(format!(
            "{} repeated attributes in one query; only one is supported",
            groups.len()
        )));
    }
    let (attribute, values) = groups.into_iter().next().unwrap();
    let relation = attribute.table;
    catalog.require_table(relation)?;
    let rep = Repeated {
        catalog,
        terms: interp.terms.iter().collect(),
        relation,
        attribute,
        values,
    };

    let others: Vec<TableId> = interp.relations().into_iter().filter(|r| *r != relation).collect();
    let mut pivots: Vec<(TableId, PivotLink)> = Vec::new();
    for &o in &others {
        if let Some(link) = pivot_link(catalog, relation, o)? {
            pivots.push((o, link));
        }
    }
    if pivots.is_empty() {
        let mut neighbours: Vec<TableId> = catalog
            .foreign_keys()
            .iter()
            .filter_map(|f| f.other_end(relation).filter(|t| *t != relation))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .filter(|t| !others.contains(t))
            .collect();
        neighbours.sort_by_key(|t| catalog.table_name(*t).to_lowercase());
        for n in neighbours {
            if let Some(link) = pivot_link(catalog, relation, n)? {
                pivots.push((n, link));
            }
        }
    }
    if pivots.is_empty() {
        return Err(Error::NoIntersection {
            relation: catalog.table_name(relation).to_owned(),
            attribute: catalog.column_name(attribute).to_owned(),
            reason: "no related relation can hold one entity linked to several of its rows".into(),
        });
    }
    let pivot_ids: Vec<TableId> = pivots.iter().map(|p| p.0).collect();
    let extras: Vec<TableId> = others.iter().copied().filter(|o| !pivot_ids.contains(o)).collect();

    let mut nodes = vec![relation];
    nodes.extend(others.iter().copied().filter(|o| pivot_ids.contains(o)));
    nodes.extend(pivot_ids.iter().copied().filter(|p| !others.contains(p)));
    nodes.extend(extras.iter().copied());
    let fixed: Vec<(TableId, TableId)> = pivot_ids.iter().map(|p| (relation, *p)).collect();
    let paths = connect(catalog, &nodes, options.max_hops, &fixed)?;

    let mut plan = QueryPlan {
        class: QueryClass::RepeatedAttribute,
        queries: Vec::new(),
        join_path_used: None,
        alternate_paths: Vec::new(),
        extrapolated: !extras.is_empty(),
        notes: Vec::new(),
    };
    if plan.extrapolated {
        plan.notes.push(
            "repeated attribute combined with further relations: those are related pairwise to the repeated core"
                .into(),
        );
    }

    let link_of = |t: TableId| pivots.iter().find(|p| p.0 == t).map(|p| &p.1);
    // The filter a relation contributes when another relation is
    // constrained against it.
    let core_filter = |aliases: &mut Aliases, t: TableId, alias: &str| -> Vec<Fragment> {
        if t == relation {
            return rep.core(alias);
        }
        let mut conds = local_filter(catalog, &rep.terms, t, alias);
        if let Some(link) = link_of(t) {
            conds.extend(rep.existentials(aliases, t, link, alias));
        }
        conds
    };

    for &t in &nodes {
        let mut aliases = Aliases(0);
        let mut conds = core_filter(&mut aliases, t, "t0");
        if t != relation {
            for &s in &nodes {
                // pivots are tied to the repeated relation by their
                // existentials; everything else is related pairwise
                let skip = s == relation && link_of(t).is_some();
                if skip || (link_of(t).is_some() && link_of(s).is_some()) {
                    continue;
                }
                let Some((path, alternates)) = paths.get(&(t, s)) else {
                    continue;
                };
                record_path(&mut plan, path, alternates);
                conds.push(path_constraint(catalog, &mut aliases, "t0", path, &mut |al, alias| {
                    core_filter(al, s, alias)
                }));
            }
        }
        plan.queries.push(GeneratedQuery::new(catalog, t, Fragment::and(conds)));
    }
    Ok(plan)
}

/// Add ordering to every query of a plan.
///
/// `FkCount` adds a count of referencing rows, summed over every foreign key
/// that references the relation, and orders by it descending. `AppSort`
/// orders by the relation's configured sort columns; relations without any
/// keep their order and get a note. Primary-key order breaks ties.
pub fn attach_ranking(
    mut plan: QueryPlan,
    catalog: &SchemaCatalog,
    mode: RankMode,
    sort_orders: &[SortOrderSpec],
) -> QueryPlan {
    if mode == RankMode::None {
        return plan;
    }
    let mut notes = Vec::new();
    for q in &mut plan.queries {
        let pk_order = std::mem::take(&mut q.order);
        match mode {
            RankMode::FkCount => {
                let parts: Vec<String> = catalog
                    .foreign_keys_to(q.target)
                    .enumerate()
                    .map(|(i, fk)| {
                        let a = format!("c{}", i + 1);
                        let conds: Vec<String> = fk
                            .column_pairs
                            .iter()
                            .map(|(from, to)| {
                                format!(
                                    "{} = {}",
                                    qualified(&a, catalog.column_name(ColumnRef::new(fk.from_table, *from))),
                                    qualified("t0", catalog.column_name(ColumnRef::new(q.target, *to)))
                                )
                            })
                            .collect();
                        format!(
                            "(select count(*) from {} {a} where {})",
                            quote_ident(catalog.table_name(fk.from_table)),
                            conds.join(" and ")
                        )
                    })
                    .collect();
                let expr = if parts.is_empty() {
                    "0".to_owned()
                } else {
                    parts.join(" + ")
                };
                let taken = |n: &str| {
                    catalog
                        .columns_of(q.target)
                        .iter()
                        .any(|c| c.name.eq_ignore_ascii_case(n))
                };
                let mut alias = "C".to_owned();
                let mut n = 0;
                while taken(&alias) {
                    n += 1;
                    alias = format!("C{n}");
                }
                q.order = vec![format!("{} desc", quote_ident(&alias))];
                q.order.extend(pk_order);
                q.count = Some((expr, alias));
                q.role = QueryRole::RankCount;
            }
            RankMode::AppSort => {
                let specs: Vec<&SortOrderSpec> = sort_orders.iter().filter(|s| s.table_id == q.target).collect();
                if specs.is_empty() {
                    notes.push(format!(
                        "no application sort order for {}; left in key order",
                        catalog.table_name(q.target)
                    ));
                    q.order = pk_order;
                    continue;
                }
                q.order = specs
                    .iter()
                    .map(|s| {
                        let dir = match s.direction {
                            SortDirection::Ascending => "asc",
                            SortDirection::Descending => "desc",
                        };
                        format!(
                            "{} {dir}",
                            qualified("t0", catalog.column_name(ColumnRef::new(s.table_id, s.column_id)))
                        )
                    })
                    .collect();
                q.order.extend(pk_order);
            }
            RankMode::None => unreachable!(),
        }
        q.render(catalog);
    }
    for n in &notes {
        tracing::warn!("{n}");
    }
    plan.notes.extend(notes);
    plan
}
