use kwsearch_core::{Interpretation, PathTerm, SqlValue, TableId};
use kwsearch_testkit::random::{random_fixture, random_interpretation, rng};
use kwsearch_testkit::{brute_eval, brute_find, brute_fixpoint, brute_rank, club, university, MemoryDb};

fn load(fx: &kwsearch_testkit::Fixture) -> MemoryDb {
    let gateway = fx.gateway();
    let h = fx.harness();
    MemoryDb::load(gateway.as_ref(), h.searcher.catalog())
}

fn id(db: &MemoryDb, name: &str) -> TableId {
    db.catalog.table_by_name(name).unwrap().table_id
}

fn term(db: &MemoryDb, table: &str, column: &str, v: &str) -> PathTerm {
    let t = id(db, table);
    PathTerm::value(db.catalog.column_by_name(t, column).unwrap().column_ref(), v, false)
}

fn located(db: &MemoryDb, keyword: &str) -> Vec<(String, String)> {
    let mut hits: Vec<_> = brute_find(db, keyword)
        .into_iter()
        .map(|(t, c, i)| {
            let col = db.catalog.columns_of(t).iter().find(|m| m.column_id == c).unwrap();
            (
                format!("{}.{}", db.catalog.table_name(t), col.name),
                db.table(t)[i][0].display_text().unwrap(),
            )
        })
        .collect();
    hits.sort();
    hits
}

#[test]
fn find_scans_every_column() {
    let db = load(&club());
    assert_eq!(
        located(&db, "john"),
        [
            ("Activity.Name".to_owned(), "John".to_owned()),
            ("Activity.Name".to_owned(), "John".to_owned()),
            ("Member.Name".to_owned(), "John".to_owned()),
        ]
    );
    assert_eq!(located(&db, "15"), [("Member.Age".to_owned(), "John".to_owned())]);
    assert!(located(&db, "Zanzibar").is_empty());
}

#[test]
fn single_relation_filter() {
    let db = load(&club());
    let i = Interpretation {
        terms: vec![term(&db, "Member", "Name", "John")],
        score: Default::default(),
    };
    let out = brute_eval(&db, &i, 3).unwrap();
    assert_eq!(out[&id(&db, "Member")].len(), 1);
}

#[test]
fn repeated_sport_keeps_members_with_both() {
    let db = load(&club());
    let i = Interpretation {
        terms: vec![
            PathTerm::relation(id(&db, "Member")),
            term(&db, "Activity", "Sport", "Running"),
            term(&db, "Activity", "Sport", "Biking"),
        ],
        score: Default::default(),
    };
    let out = brute_eval(&db, &i, 3).unwrap();
    let members: Vec<_> = out[&id(&db, "Member")].iter().map(|r| r[0].clone()).collect();
    assert_eq!(members, [SqlValue::Text("John".into())]);
    assert_eq!(out[&id(&db, "Activity")].len(), 4);
}

#[test]
fn course_student_through_study() {
    let db = load(&university());
    let i = Interpretation {
        terms: vec![
            term(&db, "Course", "dept", "CS"),
            term(&db, "Student", "status", "weak"),
        ],
        score: Default::default(),
    };
    let out = brute_eval(&db, &i, 3).unwrap();
    // CS courses are C1 and C2; weak students are S2, S3 and S5; only S2 takes a CS course (C1)
    let keys = |t: &str| {
        out[&id(&db, t)]
            .iter()
            .map(|r| r[0].display_text().unwrap())
            .collect::<Vec<_>>()
    };
    assert_eq!(keys("Course"), ["C1"]);
    assert_eq!(keys("Student"), ["S2"]);
}

#[test]
fn rank_counts_referencing_rows() {
    let db = load(&club());
    let member = id(&db, "Member");
    let john = db
        .table(member)
        .iter()
        .position(|r| r[0] == SqlValue::Text("John".into()))
        .unwrap();
    assert_eq!(brute_rank(&db, member, john), 2);
    let city = id(&db, "City");
    let bo = db
        .table(city)
        .iter()
        .position(|r| r[0] == SqlValue::Text("BO-3492".into()))
        .unwrap();
    assert_eq!(brute_rank(&db, city, bo), 2);
    let activity = id(&db, "Activity");
    assert!((0..db.table(activity).len()).all(|i| brute_rank(&db, activity, i) == 0));
}

/// Summing the per-row counts of a table must give the number of
/// referencing rows whose foreign key is fully present in it, counted
/// from the referencing side.
#[test]
fn rank_totals_balance_from_both_sides() {
    let mut r = rng(5);
    for _ in 0..30 {
        let fx = random_fixture(&mut r, 5, 12);
        let db = load(&fx);
        for t in db.catalog.tables() {
            let by_row: i64 = (0..db.table(t.table_id).len())
                .map(|i| brute_rank(&db, t.table_id, i))
                .sum();
            let mut by_fk = 0;
            for fk in db.catalog.foreign_keys().iter().filter(|f| f.to_table == t.table_id) {
                let pos = |table: TableId, c| {
                    db.catalog
                        .columns_of(table)
                        .iter()
                        .position(|m| m.column_id == c)
                        .unwrap()
                };
                for from in db.table(fk.from_table) {
                    let hit = db.table(t.table_id).iter().any(|to| {
                        fk.column_pairs.iter().all(|(a, b)| {
                            let (x, y) = (&from[pos(fk.from_table, *a)], &to[pos(t.table_id, *b)]);
                            !x.is_null() && x.sql_eq(y)
                        })
                    });
                    by_fk += i64::from(hit);
                }
            }
            assert_eq!(by_row, by_fk, "{}", t.name);
        }
    }
}

#[test]
fn fixpoint_terminates_within_row_bound() {
    let mut r = rng(11);
    for _ in 0..30 {
        let fx = random_fixture(&mut r, 5, 12);
        let db = load(&fx);
        let total: usize = db.rows.values().map(Vec::len).sum();
        for _ in 0..6 {
            let i = random_interpretation(&mut r, &db);
            if let Ok((sets, rounds)) = brute_fixpoint(&db, &i, 3) {
                assert!(rounds <= total + 1, "{rounds} rounds over {total} rows");
                if let Ok(one) = brute_eval(&db, &i, 3) {
                    for (t, rows) in &sets {
                        assert!(rows.len() <= one[t].len(), "fixpoint grew a set");
                    }
                }
            }
        }
    }
}
