use std::collections::BTreeSet;
use std::sync::Arc;
use std::thread;

use kwsearch_core::engine::{execute_plan, ExecOptions};
use kwsearch_core::planner::{plan, PlanOptions};
use kwsearch_core::store::{load_ssdb, save_ssdb};
use kwsearch_core::value::normalize;
use kwsearch_core::{register_application, OutputFormat, SearchRequest, SqlValue};
use kwsearch_testkit::oracle::simple_paths;
use kwsearch_testkit::random::{random_fixture, random_interpretation, rng};
use kwsearch_testkit::{brute_find, club, university, MemoryDb};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn stored_paths_are_every_simple_path(seed in any::<u64>(), hops in 1usize..=4) {
        let mut r = rng(seed);
        let fx = random_fixture(&mut r, 5, 4);
        let gateway = fx.gateway();
        let (content, _) = register_application(gateway.as_ref(), &Default::default(), hops).unwrap();
        let cat = &content.catalog;
        for a in cat.tables() {
            for b in cat.tables() {
                if a.table_id == b.table_id {
                    continue;
                }
                let stored: Vec<Vec<_>> = cat
                    .find_paths(a.table_id, b.table_id)
                    .unwrap()
                    .iter()
                    .map(|p| p.tables.clone())
                    .collect();
                let expected: Vec<Vec<_>> = simple_paths(cat, a.table_id, b.table_id, hops)
                    .into_iter()
                    .map(|p| p.tables)
                    .collect();
                prop_assert_eq!(stored.len(), expected.len(), "{} -> {}", &a.name, &b.name);
                prop_assert_eq!(stored.first(), expected.first());
                for p in cat.find_paths(a.table_id, b.table_id).unwrap() {
                    prop_assert!(p.hops() <= hops);
                    prop_assert_eq!(p.tables.iter().collect::<BTreeSet<_>>().len(), p.tables.len());
                }
            }
        }
    }

    #[test]
    fn value_index_matches_stored_values(seed in any::<u64>()) {
        let mut r = rng(seed);
        let fx = random_fixture(&mut r, 4, 6);
        let gateway = fx.gateway();
        let (content, _) = register_application(gateway.as_ref(), &fx.parsed_annotations(), 3).unwrap();
        let db = MemoryDb::load(gateway.as_ref(), &content.catalog);
        let entries = content.lexicon.vmap_entries();
        // sound: every entry occurs in its column
        for e in &entries {
            let hits = brute_find(&db, &e.value);
            prop_assert!(
                hits.iter().any(|(t, c, _)| *t == e.column.table && *c == e.column.column),
                "{:?} not found in the data", e
            );
        }
        // complete: every non-null text value is indexed in its column
        let indexed: BTreeSet<_> = entries.iter().map(|e| (e.value.clone(), e.column)).collect();
        for (t, rows) in &db.rows {
            let cols = content.catalog.columns_of(*t);
            for row in rows {
                for (j, v) in row.iter().enumerate() {
                    if let SqlValue::Text(s) = v {
                        prop_assert!(indexed.contains(&(normalize(s), cols[j].column_ref())), "{} missing", s);
                    }
                }
            }
        }
    }

    #[test]
    fn store_round_trip(seed in any::<u64>()) {
        let mut r = rng(seed);
        let fx = random_fixture(&mut r, 5, 5);
        let gateway = fx.gateway();
        let (content, _) = register_application(gateway.as_ref(), &Default::default(), 3).unwrap();
        let path = fx.dir().join("roundtrip.db");
        save_ssdb(&content, &path).unwrap();
        let loaded = load_ssdb(&path).unwrap();
        prop_assert_eq!(&loaded, &content);
        save_ssdb(&loaded, &path).unwrap();
        prop_assert_eq!(load_ssdb(&path).unwrap(), content);
    }

    #[test]
    fn sequential_and_parallel_execution_agree(seed in any::<u64>()) {
        let mut r = rng(seed);
        let fx = random_fixture(&mut r, 5, 8);
        let gateway = fx.gateway();
        let (content, _) = register_application(gateway.as_ref(), &Default::default(), 3).unwrap();
        let cat = &content.catalog;
        let db = MemoryDb::load(gateway.as_ref(), cat);
        for _ in 0..5 {
            let interp = random_interpretation(&mut r, &db);
            let Ok(p) = plan(&interp, cat, PlanOptions::default()) else { continue };
            let seq = execute_plan(&p, gateway.as_ref(), cat, ExecOptions { sequential: true, ..Default::default() });
            let par = execute_plan(&p, gateway.as_ref(), cat, ExecOptions { sequential: false, ..Default::default() });
            prop_assert_eq!(seq.map_err(|e| e.to_string()), par.map_err(|e| e.to_string()));
        }
    }
}

#[test]
fn registration_is_deterministic() {
    let fx = university();
    let gateway = fx.gateway();
    let annotations = fx.parsed_annotations();
    let (a, _) = register_application(gateway.as_ref(), &annotations, 3).unwrap();
    let (b, _) = register_application(gateway.as_ref(), &annotations, 3).unwrap();
    assert_eq!(a, b);
}

#[test]
fn concurrent_searches_render_identically() {
    let fx = university();
    let searcher = Arc::new(fx.harness().searcher);
    let queries = [
        "Sudarshan Soumen QueryOptimization",
        "CS weak",
        "Course",
        "Alice Databases",
        "Phatak",
    ];
    let render = |s: &kwsearch_core::Searcher, q: &str| {
        let req = SearchRequest {
            format: OutputFormat::Json,
            ..SearchRequest::new(q)
        };
        s.respond(&req, "").map(|r| r.body).map_err(|e| e.to_string())
    };
    let expected: Vec<_> = queries.iter().map(|q| render(&searcher, q)).collect();
    assert!(expected.iter().filter(|r| r.is_ok()).count() >= 4, "{expected:?}");
    let handles: Vec<_> = (0..8)
        .map(|i| {
            let s = Arc::clone(&searcher);
            thread::spawn(move || {
                let mut out = Vec::new();
                for k in 0..queries.len() {
                    let q = queries[(i + k) % queries.len()];
                    out.push(((i + k) % queries.len(), render(&s, q)));
                }
                out
            })
        })
        .collect();
    for h in handles {
        for (k, body) in h.join().unwrap() {
            assert_eq!(body, expected[k], "{}", queries[k]);
        }
    }
}

#[test]
fn repeated_queries_are_stable() {
    let fx = club();
    let h = fx.harness();
    let req = SearchRequest {
        format: OutputFormat::Table,
        ..SearchRequest::new("Running Illinois")
    };
    let first = h.searcher.respond(&req, "").unwrap().body;
    for _ in 0..5 {
        assert_eq!(h.searcher.respond(&req, "").unwrap().body, first);
    }
}
