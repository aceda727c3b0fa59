//! Test support for kwsearch: small fixture databases, a brute-force
//! reference evaluator that shares no code with the planner or engine, and
//! generators for random schemas, data and interpretations.

pub mod equivalence;
pub mod fixtures;
pub mod oracle;
pub mod random;

pub use fixtures::{club, club_annotated, dept_emp, university, Fixture, Harness};
pub use oracle::{brute_eval, brute_find, brute_fixpoint, brute_rank, MemoryDb, OracleError, RowSets};
