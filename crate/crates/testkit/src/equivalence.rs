//! Engine-versus-oracle comparison over random databases.

use std::cmp::Ordering;

use kwsearch_core::engine::{execute_plan, ExecOptions};
use kwsearch_core::planner::{attach_ranking, plan, PlanOptions};
use kwsearch_core::{Error, Interpretation, QueryClass, RankMode, SqlValue, TableId};

use crate::oracle::{brute_eval, brute_fixpoint, brute_rank, MemoryDb, OracleError, RowSets};
use crate::random::{random_fixture, random_interpretation, rng};

#[derive(Debug, Default, Clone)]
pub struct EquivalenceReport {
    pub databases: usize,
    /// Interpretations evaluated by both sides.
    pub interpretations: usize,
    /// Interpretations both sides rejected with the same kind of error.
    pub agreed_errors: usize,
    pub by_class: [usize; 3],
    pub ranked_rows: usize,
    /// Multi-relation cases where iterating the reduction to a fixpoint
    /// would have removed more rows.
    pub fixpoint_differs: usize,
    pub mismatches: Vec<String>,
}

fn sorted(mut rows: Vec<Vec<SqlValue>>) -> Vec<Vec<SqlValue>> {
    rows.sort_by(|a, b| cmp_rows(a, b));
    rows
}

fn cmp_rows(a: &[SqlValue], b: &[SqlValue]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| *o != Ordering::Equal)
        .unwrap_or(Ordering::Equal)
}

fn same_error(e: &Error, o: &OracleError) -> bool {
    matches!(
        (e, o),
        (Error::UnrelatedRelations(..), OracleError::Unrelated)
            | (Error::NoIntersection { .. }, OracleError::NoIntersection)
            | (Error::Unsupported(_), OracleError::Unsupported)
    )
}

fn describe(db: &MemoryDb, interp: &Interpretation) -> String {
    interp
        .terms
        .iter()
        .map(|t| {
            let rel = db.catalog.table_name(t.relation);
            match (t.column(), &t.value) {
                (None, _) => rel.to_owned(),
                (Some(c), None) => format!("{rel}.{}", db.catalog.column_name(c)),
                (Some(c), Some(v)) => format!(
                    "{rel}.{}{}{v:?}",
                    db.catalog.column_name(c),
                    if t.negated { "<>" } else { "=" }
                ),
            }
        })
        .collect::<Vec<_>>()
        .join(" & ")
}

/// Compare one interpretation; returns a mismatch description if any.
pub fn compare_one(
    db: &MemoryDb,
    gateway: &dyn kwsearch_core::SqlGateway,
    interp: &Interpretation,
    max_hops: usize,
    report: &mut EquivalenceReport,
) {
    let cat = &db.catalog;
    let expected = brute_eval(db, interp, max_hops);
    let planned = plan(interp, cat, PlanOptions { max_hops });
    let what = describe(db, interp);
    let (p, expected) = match (planned, expected) {
        (Err(e), Err(o)) if same_error(&e, &o) => {
            report.agreed_errors += 1;
            return;
        }
        (Ok(p), Ok(x)) => (p, x),
        (p, x) => {
            report.mismatches.push(format!(
                "{what}: engine {:?} vs oracle {:?}",
                p.map(|_| "plan"),
                x.map(|_| "rows")
            ));
            return;
        }
    };
    let ranked = attach_ranking(p.clone(), cat, RankMode::FkCount, &[]);
    let exec = ExecOptions::default();
    let (plain, ranked_sets) = match (
        execute_plan(&p, gateway, cat, exec),
        execute_plan(&ranked, gateway, cat, exec),
    ) {
        (Ok(a), Ok(b)) => (a, b),
        (a, b) => {
            report
                .mismatches
                .push(format!("{what}: execution failed: {:?} {:?}", a.err(), b.err()));
            return;
        }
    };
    report.interpretations += 1;
    report.by_class[match p.class {
        QueryClass::SingleRelation => 0,
        QueryClass::MultiRelation => 1,
        QueryClass::RepeatedAttribute => 2,
    }] += 1;

    let got: RowSets = plain.iter().map(|s| (s.relation, s.rows.clone())).collect();
    if got.keys().collect::<Vec<_>>() != expected.keys().collect::<Vec<_>>() {
        report.mismatches.push(format!("{what}: relations differ"));
        return;
    }
    for (t, rows) in &expected {
        let mine = sorted(got[t].clone());
        let theirs = sorted(rows.clone());
        if mine != theirs {
            report.mismatches.push(format!(
                "{what}: {} rows differ: engine {:?} oracle {:?}",
                cat.table_name(*t),
                mine,
                theirs
            ));
        }
    }

    for set in &ranked_sets {
        let counts = set.rank_counts.as_ref().expect("ranked sets carry counts");
        let order_cols: Vec<usize> = cat
            .ordering_columns(set.relation)
            .into_iter()
            .map(|c| set.columns.iter().position(|m| m.column_id == c).unwrap())
            .collect();
        let mut prev: Option<(i64, &Vec<SqlValue>)> = None;
        for (row, &count) in set.rows.iter().zip(counts) {
            let idx = db
                .table(set.relation)
                .iter()
                .position(|r| r == row)
                .expect("returned row exists");
            let want = brute_rank(db, set.relation, idx);
            report.ranked_rows += 1;
            if want != count {
                report.mismatches.push(format!(
                    "{what}: {} count {count} but oracle {want} for {row:?}",
                    cat.table_name(set.relation)
                ));
            }
            if let Some((pc, pr)) = prev {
                let key_order = order_cols
                    .iter()
                    .map(|&i| pr[i].total_cmp(&row[i]))
                    .find(|o| *o != Ordering::Equal)
                    .unwrap_or(Ordering::Equal);
                if pc < count || (pc == count && key_order == Ordering::Greater) {
                    report
                        .mismatches
                        .push(format!("{what}: {} ranked order broken", cat.table_name(set.relation)));
                }
            }
            prev = Some((count, row));
        }
    }

    if p.class == QueryClass::MultiRelation {
        if let Ok((fix, _)) = brute_fixpoint(db, interp, max_hops) {
            let differs = fix.iter().any(|(t, rows)| rows.len() != expected[t].len());
            if differs {
                report.fixpoint_differs += 1;
            }
        }
    }
}

/// Run `per_db` random interpretations over each of `databases` random
/// databases generated from `seed`.
pub fn run(seed: u64, databases: usize, per_db: usize, max_rows: usize) -> EquivalenceReport {
    let mut report = EquivalenceReport::default();
    let mut r = rng(seed);
    for _ in 0..databases {
        let fixture = random_fixture(&mut r, 5, max_rows);
        let h = fixture.harness();
        let cat = h.searcher.catalog();
        let db = MemoryDb::load(h.searcher.gateway(), cat);
        report.databases += 1;
        for _ in 0..per_db {
            let interp = random_interpretation(&mut r, &db);
            compare_one(&db, h.searcher.gateway(), &interp, cat.max_hops(), &mut report);
        }
    }
    report
}

/// Tables of a result in a stable order, for assertions.
pub fn relations_of(sets: &RowSets) -> Vec<TableId> {
    sets.keys().copied().collect()
}
