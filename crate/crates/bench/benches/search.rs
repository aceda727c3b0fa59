use std::fmt::Write;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use kwsearch_core::parser::tokenize;
use kwsearch_core::planner::{attach_ranking, plan, PlanOptions};
use kwsearch_core::{register_application, RankMode, SearchRequest};
use kwsearch_testkit::{club, university, Fixture};

/// Departments and employees at a chosen size, with a handful of repeated
/// job titles and locations.
fn scaled_dept_emp(depts: usize, per_dept: usize) -> Fixture {
    let mut sql = String::from(
        "create table Dept (dno integer primary key, dname varchar(20), location varchar(20));
         create table Emp (eno integer primary key, ename varchar(20), job_type varchar(20),
             dno integer references Dept(dno));
         begin;",
    );
    let cities = ["London", "Paris", "Rome", "Oslo"];
    let jobs = ["Programmer", "Analyst", "Clerk", "Manager", "Tester"];
    for d in 0..depts {
        writeln!(
            sql,
            "insert into Dept values ({d}, 'dept{d}', '{}');",
            cities[d % cities.len()]
        )
        .unwrap();
        for e in 0..per_dept {
            let eno = d * per_dept + e;
            writeln!(
                sql,
                "insert into Emp values ({eno}, 'emp{eno}', '{}', {d});",
                jobs[eno % jobs.len()]
            )
            .unwrap();
        }
    }
    sql.push_str("commit;");
    Fixture::from_sql(&sql, "index_default = \"all\"\n")
}

fn parsing(c: &mut Criterion) {
    let fx = university();
    let h = fx.harness();
    let q = "Sudarshan Soumen QueryOptimization";
    c.bench_function("tokenize", |b| b.iter(|| tokenize(black_box(q)).unwrap()));
    c.bench_function("interpret", |b| {
        b.iter(|| h.searcher.interpretations(black_box(q)).unwrap())
    });
}

fn planning(c: &mut Criterion) {
    let fx = university();
    let h = fx.harness();
    let cat = h.searcher.catalog();
    let mut group = c.benchmark_group("plan");
    for q in ["Alice", "CS weak", "Sudarshan Soumen QueryOptimization"] {
        let (i, _) = h.searcher.interpretations(q).unwrap().remove(0);
        group.bench_with_input(BenchmarkId::from_parameter(q), &i, |b, i| {
            b.iter(|| {
                let p = plan(i, cat, PlanOptions::default()).unwrap();
                attach_ranking(p, cat, RankMode::FkCount, &[])
            })
        });
    }
    group.finish();
}

fn registration(c: &mut Criterion) {
    let fx = scaled_dept_emp(50, 40);
    let gateway = fx.gateway();
    let annotations = fx.parsed_annotations();
    c.bench_function("register 2k rows", |b| {
        b.iter(|| register_application(gateway.as_ref(), &annotations, 3).unwrap())
    });
}

fn searching(c: &mut Criterion) {
    let small = club();
    let h = small.harness();
    c.bench_function("search club John", |b| {
        b.iter(|| h.searcher.search(&SearchRequest::new("John")).unwrap())
    });

    let mut group = c.benchmark_group("search dept/emp");
    group.sample_size(20);
    for (depts, per_dept) in [(20, 50), (100, 100)] {
        let fx = scaled_dept_emp(depts, per_dept);
        let h = fx.harness();
        let rows = depts * (per_dept + 1);
        for rank in [RankMode::None, RankMode::FkCount] {
            let req = SearchRequest {
                rank,
                ..SearchRequest::new("London Programmer")
            };
            let id = BenchmarkId::new(rank.as_str(), rows);
            group.bench_function(id, |b| b.iter(|| h.searcher.search(&req).unwrap()));
        }
    }
    group.finish();
}

criterion_group!(benches, parsing, planning, registration, searching);
criterion_main!(benches);
