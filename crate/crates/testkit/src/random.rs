//! Random small databases and interpretations over them.

use rand::rngs::StdRng;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};

use kwsearch_core::{ColumnRef, Interpretation, PathTerm, SchemaCatalog, SqlValue, TableId};

use crate::fixtures::Fixture;
use crate::oracle::MemoryDb;

const TABLE_NAMES: [&str; 6] = ["Amber", "birch", "Cedar", "Dune", "elm", "Fjord"];
const WORDS: [&str; 8] = ["apple", "Pear", "plum", " fig ", "KIWI", "lime", "Apple", "pear"];
const DATES: [&str; 3] = ["2001-04-30", "1999-12-31", "2010-06-01"];

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum KeyShape {
    Single,
    Composite,
    None,
}

struct TablePlan {
    name: String,
    key: KeyShape,
    rows: usize,
    texts: usize,
    has_date: bool,
    /// Referenced table indexes, one foreign key each.
    refs: Vec<usize>,
}

fn key_values(shape: KeyShape, rows: usize) -> Vec<Vec<String>> {
    match shape {
        KeyShape::Single | KeyShape::None => (1..=rows).map(|i| vec![i.to_string()]).collect(),
        KeyShape::Composite => (0..rows)
            .map(|i| vec![(i % 3 + 1).to_string(), format!("'k{}'", i / 3)])
            .collect(),
    }
}

fn text_literal(s: &str) -> String {
    format!("'{}'", s.replace('\'', "''"))
}

/// Schema and data as a SQL script: at most `max_tables` tables of at most
/// `max_rows` rows, with random single and composite keys, nullable and
/// dangling foreign keys, and repeated values in different letter cases.
pub fn random_script(rng: &mut StdRng, max_tables: usize, max_rows: usize) -> String {
    let n = rng.random_range(2..=max_tables.clamp(2, TABLE_NAMES.len()));
    let mut tables: Vec<TablePlan> = Vec::new();
    for (i, name) in TABLE_NAMES.iter().enumerate().take(n) {
        let key = match rng.random_range(0..10) {
            0..=5 => KeyShape::Single,
            6..=8 => KeyShape::Composite,
            _ => KeyShape::None,
        };
        let mut refs = Vec::new();
        for j in 0..n {
            let p = if j == i { 0.1 } else { 0.35 };
            if rng.random_bool(p) {
                refs.push(j);
            }
        }
        tables.push(TablePlan {
            name: (*name).to_owned(),
            key,
            rows: rng.random_range(0..=max_rows),
            texts: rng.random_range(1..=2),
            has_date: rng.random_bool(0.3),
            refs,
        });
    }
    // foreign keys can only point at tables with a key
    for i in 0..n {
        let keyed: Vec<bool> = tables.iter().map(|t| t.key != KeyShape::None).collect();
        tables[i].refs.retain(|j| keyed[*j]);
    }

    let mut script = String::new();
    for t in &tables {
        let mut cols = Vec::new();
        match t.key {
            KeyShape::Single => cols.push("id integer primary key".to_owned()),
            KeyShape::Composite => {
                cols.push("k1 integer".to_owned());
                cols.push("k2 varchar(8)".to_owned());
            }
            KeyShape::None => cols.push("id integer".to_owned()),
        }
        for c in 0..t.texts {
            cols.push(format!("w{c} varchar(16)"));
        }
        cols.push("n integer".to_owned());
        if t.has_date {
            cols.push("d date".to_owned());
        }
        for (f, &j) in t.refs.iter().enumerate() {
            let target = &tables[j];
            match target.key {
                KeyShape::Single => cols.push(format!("r{f}_id integer")),
                _ => {
                    cols.push(format!("r{f}_k1 integer"));
                    cols.push(format!("r{f}_k2 varchar(8)"));
                }
            }
        }
        if t.key == KeyShape::Composite {
            cols.push("primary key (k1, k2)".to_owned());
        }
        for (f, &j) in t.refs.iter().enumerate() {
            let target = &tables[j];
            match target.key {
                KeyShape::Single => cols.push(format!("foreign key (r{f}_id) references {}(id)", target.name)),
                _ => cols.push(format!(
                    "foreign key (r{f}_k1, r{f}_k2) references {}(k1, k2)",
                    target.name
                )),
            }
        }
        script.push_str(&format!("create table {} ({});\n", t.name, cols.join(", ")));
    }

    for t in &tables {
        let keys = key_values(t.key, t.rows);
        for key in keys {
            let mut vals = key.clone();
            for _ in 0..t.texts {
                vals.push(if rng.random_bool(0.1) {
                    "null".into()
                } else {
                    text_literal(WORDS.choose(rng).unwrap())
                });
            }
            vals.push(if rng.random_bool(0.1) {
                "null".into()
            } else {
                rng.random_range(0..5).to_string()
            });
            if t.has_date {
                vals.push(text_literal(DATES.choose(rng).unwrap()));
            }
            for &j in &t.refs {
                let target = &tables[j];
                let width = if target.key == KeyShape::Single { 1 } else { 2 };
                let roll = rng.random_range(0..10);
                if roll == 0 || target.rows == 0 {
                    vals.extend(std::iter::repeat_n("null".to_owned(), width));
                } else if roll == 1 {
                    // dangling reference
                    vals.push("99".into());
                    if width == 2 {
                        vals.push("'zz'".into());
                    }
                } else {
                    let pick = rng.random_range(0..target.rows);
                    vals.extend(key_values(target.key, target.rows).swap_remove(pick));
                }
            }
            script.push_str(&format!("insert into {} values ({});\n", t.name, vals.join(", ")));
        }
    }
    script
}

pub fn random_fixture(rng: &mut StdRng, max_tables: usize, max_rows: usize) -> Fixture {
    Fixture::from_sql(&random_script(rng, max_tables, max_rows), "index_default = \"all\"\n")
}

fn random_value_term(rng: &mut StdRng, db: &MemoryDb, t: TableId) -> PathTerm {
    let cols = db.catalog.columns_of(t);
    let col = cols.choose(rng).unwrap();
    let rows = db.table(t);
    let cell = rows
        .choose(rng)
        .map(|r| r[cols.iter().position(|c| c.column_id == col.column_id).unwrap()].clone())
        .unwrap_or(SqlValue::Null);
    let value = match cell.display_text() {
        Some(v) if rng.random_bool(0.85) => v,
        _ => WORDS.choose(rng).unwrap().to_string(),
    };
    PathTerm::value(col.column_ref(), &value, rng.random_bool(0.15))
}

fn metadata_term(rng: &mut StdRng, catalog: &SchemaCatalog, t: TableId) -> PathTerm {
    if rng.random_bool(0.5) {
        PathTerm::relation(t)
    } else {
        let col = catalog.columns_of(t).choose(rng).unwrap();
        PathTerm::attribute(col.column_ref())
    }
}

fn interp(terms: Vec<PathTerm>) -> Interpretation {
    Interpretation {
        terms,
        score: Default::default(),
    }
}

/// A random interpretation of one of the three query shapes.
pub fn random_interpretation(rng: &mut StdRng, db: &MemoryDb) -> Interpretation {
    let tables: Vec<TableId> = db.catalog.tables().iter().map(|t| t.table_id).collect();
    match rng.random_range(0..3) {
        0 => {
            let t = *tables.choose(rng).unwrap();
            let n = rng.random_range(0..=2);
            let mut terms: Vec<PathTerm> = (0..n).map(|_| random_value_term(rng, db, t)).collect();
            if terms.is_empty() {
                terms.push(metadata_term(rng, &db.catalog, t));
            }
            interp(terms)
        }
        1 => {
            let k = rng.random_range(2..=3.min(tables.len()));
            let picked: Vec<TableId> = tables.choose_multiple(rng, k).copied().collect();
            let mut terms = Vec::new();
            for t in picked {
                match rng.random_range(0..3) {
                    0 => terms.push(metadata_term(rng, &db.catalog, t)),
                    1 => terms.push(random_value_term(rng, db, t)),
                    _ => {
                        terms.push(random_value_term(rng, db, t));
                        terms.push(random_value_term(rng, db, t));
                    }
                }
            }
            // keep exactly one value per repeated column out of this shape
            let mut seen: Vec<ColumnRef> = Vec::new();
            terms.retain(|t| match (t.column(), &t.value, t.negated) {
                (Some(c), Some(_), false) => {
                    if seen.contains(&c) {
                        false
                    } else {
                        seen.push(c);
                        true
                    }
                }
                _ => true,
            });
            interp(terms)
        }
        _ => {
            let t = *tables.choose(rng).unwrap();
            let cols = db.catalog.columns_of(t);
            let col = cols.choose(rng).unwrap();
            let pos = cols.iter().position(|c| c.column_id == col.column_id).unwrap();
            let mut values: Vec<String> = db.table(t).iter().filter_map(|r| r[pos].normalized()).collect();
            values.sort();
            values.dedup();
            while values.len() < 2 {
                values.push(WORDS.choose(rng).unwrap().trim().to_lowercase());
                values.sort();
                values.dedup();
            }
            let n = rng.random_range(2..=3.min(values.len()));
            let mut terms: Vec<PathTerm> = values
                .choose_multiple(rng, n)
                .map(|v| PathTerm::value(col.column_ref(), v, false))
                .collect();
            if rng.random_bool(0.5) {
                let o = *tables.choose(rng).unwrap();
                if o != t {
                    terms.push(random_value_term(rng, db, o));
                } else {
                    terms.push(metadata_term(rng, &db.catalog, o));
                }
            }
            interp(terms)
        }
    }
}
