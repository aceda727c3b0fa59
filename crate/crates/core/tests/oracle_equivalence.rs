use kwsearch_testkit::equivalence::run;

#[test]
fn engine_matches_oracle_on_random_databases() {
    let report = run(7, 24, 12, 20);
    assert!(report.mismatches.is_empty(), "{:#?}", report.mismatches);
    assert!(report.interpretations >= 200, "{report:?}");
    assert!(report.by_class.iter().all(|n| *n > 0), "{report:?}");
}

#[test]
fn engine_matches_oracle_on_larger_tables() {
    let report = run(1234, 8, 10, 50);
    assert!(report.mismatches.is_empty(), "{:#?}", report.mismatches);
    assert!(report.ranked_rows > 0);
}
