use kwsearch_core::engine::{execute_plan, ExecOptions};
use kwsearch_core::parser::tokenize;
use kwsearch_core::planner::{attach_ranking, classify, plan, PlanOptions};
use kwsearch_core::{Error, Interpretation, PathTerm, QueryClass, RankMode, SqlValue, TokenKind};
use kwsearch_testkit::{club, dept_emp, university, Harness};

fn value(h: &Harness, table: &str, column: &str, v: &str, negated: bool) -> PathTerm {
    let cat = h.searcher.catalog();
    let t = cat.table_by_name(table).unwrap();
    PathTerm::value(cat.column_by_name(t.table_id, column).unwrap().column_ref(), v, negated)
}

fn names(h: &Harness, interp: &Interpretation) -> Vec<String> {
    let cat = h.searcher.catalog();
    interp
        .terms
        .iter()
        .map(|t| {
            let mut s = cat.table_name(t.relation).to_owned();
            if let Some(c) = t.column() {
                s = format!("{s}.{}", cat.column_name(c));
            }
            if let Some(v) = &t.value {
                s = format!("{s}={}{v}", if t.negated { "!" } else { "" });
            }
            s
        })
        .collect()
}

#[test]
fn tokens_carry_quotes_and_implied_and() {
    let toks = tokenize("\"New York\" not Running").unwrap();
    let kinds: Vec<_> = toks.iter().map(|t| (t.kind, t.text.as_str(), t.implicit)).collect();
    assert_eq!(
        kinds,
        [
            (TokenKind::Keyword, "New York", false),
            (TokenKind::OpAnd, "and", true),
            (TokenKind::OpNot, "not", false),
            (TokenKind::Keyword, "Running", false),
        ]
    );
    assert!(toks[0].quoted);
    assert!(tokenize("\"unterminated").is_err());
}

#[test]
fn john_reads_as_member_before_activity() {
    let fx = club();
    let h = fx.harness();
    let readings = h.searcher.interpretations("John").unwrap();
    let shown: Vec<_> = readings.iter().map(|(i, _)| names(&h, i)).collect();
    assert_eq!(shown, [vec!["Member.Name=john"], vec!["Activity.Name=john"]]);
    assert!(readings[0].0.score < readings[1].0.score);
}

#[test]
fn relation_and_value_terms_merge() {
    let fx = club();
    let h = fx.harness();
    let (best, tree) = h.searcher.interpretations("Member Illinois").unwrap().remove(0);
    assert_eq!(names(&h, &best), ["Member", "City.Location=illinois"]);
    assert!(tree.is_well_formed(h.searcher.catalog()));
    assert_eq!(classify(&best), QueryClass::MultiRelation);
}

#[test]
fn negation_reaches_the_predicate() {
    let fx = club();
    let h = fx.harness();
    let cat = h.searcher.catalog();
    let (best, _) = h.searcher.interpretations("Activity not Running").unwrap().remove(0);
    assert!(best.terms.iter().any(|t| t.negated));
    let p = plan(&best, cat, PlanOptions::default()).unwrap();
    assert!(p.queries[0].sql.contains("<> ?"), "{}", p.queries[0].sql);
    let sets = execute_plan(&p, h.searcher.gateway(), cat, ExecOptions::default()).unwrap();
    let sports: Vec<_> = sets[0].rows.iter().map(|r| r[1].clone()).collect();
    assert!(!sports.is_empty());
    assert!(sports.iter().all(|s| *s != SqlValue::Text("Running".into())));

    let err = h.searcher.interpretations("not Member").unwrap_err();
    assert_eq!(err.code(), "no_interpretation");
}

#[test]
fn unrelated_relations_are_reported() {
    let fx = university();
    let h = fx.harness();
    let i = Interpretation {
        terms: vec![
            value(&h, "Course", "title", "Databases", false),
            value(&h, "Faculty", "name", "Sudarshan", false),
        ],
        score: Default::default(),
    };
    match plan(&i, h.searcher.catalog(), PlanOptions::default()) {
        Err(Error::UnrelatedRelations(a, b)) => assert_eq!((a.as_str(), b.as_str()), ("Course", "Faculty")),
        other => panic!("{other:?}"),
    }
}

#[test]
fn hop_limit_cuts_indirect_paths() {
    let fx = university();
    let h = fx.harness();
    let i = Interpretation {
        terms: vec![
            value(&h, "Course", "dept", "CS", false),
            value(&h, "Student", "status", "weak", false),
        ],
        score: Default::default(),
    };
    let cat = h.searcher.catalog();
    assert!(plan(&i, cat, PlanOptions { max_hops: 1 }).is_err());
    let p = plan(&i, cat, PlanOptions { max_hops: 2 }).unwrap();
    assert_eq!(p.join_path_used.unwrap().hops(), 2);
}

#[test]
fn fk_count_ranking_adds_a_count_column() {
    let fx = dept_emp();
    let h = fx.harness();
    let cat = h.searcher.catalog();
    let (best, _) = h.searcher.interpretations("Dept").unwrap().remove(0);
    let p = attach_ranking(
        plan(&best, cat, PlanOptions::default()).unwrap(),
        cat,
        RankMode::FkCount,
        &[],
    );
    let q = &p.queries[0];
    assert_eq!(q.count_alias(), Some("C"));
    assert!(q.sql.contains("order by \"C\" desc"), "{}", q.sql);
    let sets = execute_plan(&p, h.searcher.gateway(), cat, ExecOptions::default()).unwrap();
    // Research has three employees, Sales one, Operations one, Admin one
    assert_eq!(sets[0].rank_counts.as_deref(), Some(&[3, 1, 1, 1][..]));
    assert_eq!(sets[0].rows[0][1], SqlValue::Text("Research".into()));
}

#[test]
fn app_sort_without_orders_keeps_key_order() {
    let fx = dept_emp();
    let h = fx.harness();
    let cat = h.searcher.catalog();
    let (best, _) = h.searcher.interpretations("Emp").unwrap().remove(0);
    let p = attach_ranking(
        plan(&best, cat, PlanOptions::default()).unwrap(),
        cat,
        RankMode::AppSort,
        &[],
    );
    assert_eq!(p.notes.len(), 1, "{:?}", p.notes);
    assert!(
        p.queries[0].sql.ends_with("order by t0.\"eno\" asc"),
        "{}",
        p.queries[0].sql
    );
}

#[test]
fn numeric_values_compare_as_numbers() {
    let fx = dept_emp();
    let h = fx.harness();
    let cat = h.searcher.catalog();
    let i = Interpretation {
        terms: vec![value(&h, "Emp", "dno", "10", false)],
        score: Default::default(),
    };
    let p = plan(&i, cat, PlanOptions::default()).unwrap();
    let sets = execute_plan(&p, h.searcher.gateway(), cat, ExecOptions::default()).unwrap();
    assert_eq!(sets[0].rows.len(), 3);
}
